#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scss/signal.hpp"

namespace scss {

struct SepItConfig {
  int speakers = 2;         // C
  int latent_channels = 16; // N
  int kernel = 4;           // K (even); encoder stride is K/2
  int res_blocks = 3;
  int max_iter = 5;
  double lr = 5e-4;
  double lr_decay = 0.95;   // per epoch
  Eigen::Index mi_bins = 32;
  bool share_weights = false;  // one block reused for every iteration
  double db_cap = kDbCap;
};

/// Same-padded width-3 convolution over an N x T latent, expressed as three
/// N x N taps.
struct ConvK3 {
  Eigen::MatrixXd w_prev, w_mid, w_next;
  Eigen::VectorXd bias;
};

struct ResBlock {
  ConvK3 conv1, conv2;  // conv -> ReLU -> conv, plus input skip
};

/// Parameters of one SepIt refinement block. The encoder is shared between
/// the mixture path and every speaker path; the decoder has no bias so a
/// zero combiner makes the block an exact identity.
struct SepItModel {
  int speakers = 0;
  int latent_channels = 0;
  int kernel = 0;

  Eigen::MatrixXd encoder_w;  // N x K
  Eigen::VectorXd encoder_b;  // N
  std::vector<ResBlock> mask_net;
  Eigen::MatrixXd combiner_w;  // (C N) x (C N)
  Eigen::VectorXd combiner_b;  // C N
  Eigen::MatrixXd decoder_w;   // N x K

  std::size_t parameter_count() const;
};

/// Mutable views over every parameter tensor, in a fixed order shared by the
/// optimizer, serialization, and the finite-difference tests.
std::vector<Eigen::Map<Eigen::VectorXd>> parameter_views(SepItModel& model);
std::vector<std::string> parameter_names(const SepItModel& model);

/// Random init; the combiner starts at zero so training begins from the
/// identity refinement.
SepItModel init_model(const SepItConfig& config, std::uint64_t seed);

/// Gradients use the same layout as the model itself.
using SepItGrads = SepItModel;
SepItGrads zero_grads(const SepItModel& model);

/// Latent frame count for a signal of the given length: 2*ceil(L / K) when
/// padded to a hop multiple (hop = K/2).
Eigen::Index latent_frames(Eigen::Index length, int kernel);

/// Strided encoder followed by ReLU. Returns an N x L' latent.
Eigen::MatrixXd encode(const Eigen::ArrayXd& x, const SepItModel& model);
Eigen::MatrixXd encode(const Signal& x, const SepItModel& model);

/// One refinement pass. Estimates are column-per-speaker (L x C).
/// Throws ShapeMismatch on inconsistent sizes.
Eigen::MatrixXd refine(const Eigen::MatrixXd& prev_estimates, const Eigen::ArrayXd& mixture,
                       const SepItModel& model);
std::vector<Signal> refine(const std::vector<Signal>& prev_estimates, const Signal& mixture,
                           const SepItModel& model);

/// Negative mean SI-SDR across speakers under the best speaker permutation.
double loss(const Eigen::MatrixXd& references, const Eigen::MatrixXd& estimates,
            double cap_db = kDbCap);

/// Best-permutation mean SI-SDR (the evaluation metric).
double mean_si_sdr_best_perm(const Eigen::MatrixXd& references,
                             const Eigen::MatrixXd& estimates, double cap_db = kDbCap);

/// Forward + reverse pass: loss and parameter gradients for one sample.
double loss_and_gradients(const SepItModel& model, const Eigen::ArrayXd& mixture,
                          const Eigen::MatrixXd& prev_estimates,
                          const Eigen::MatrixXd& references, SepItGrads& grads,
                          double cap_db = kDbCap);

struct AdamState {
  std::vector<Eigen::VectorXd> m, v;
  std::int64_t t = 0;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
};
AdamState make_adam(const SepItModel& model);

struct TrainSample {
  Eigen::ArrayXd mixture;
  Eigen::MatrixXd prev;  // L x C input estimates
  Eigen::MatrixXd refs;  // L x C references
};

/// One Adam step on the mean loss over the batch; returns that loss.
double grad_step(SepItModel& model, AdamState& adam, std::span<const TrainSample> batch,
                 double lr, double cap_db = kDbCap);

enum class StopReason { mi_decrease, max_iter };

struct IterationTrace {
  std::vector<Eigen::MatrixXd> estimates;  // iterate 0 (backbone) .. J
  std::vector<double> mi;                  // I(m, est) per iterate, speaker-averaged
  std::vector<double> si_sdr_mean;         // vs references when available, else NaN
  StopReason stop_reason = StopReason::max_iter;
  int selected = 0;  // index of the iterate the stopping rule keeps
};

/// Alg-style inference: iterates refine, stops when the mutual information
/// decreases (strictly) or at max_iter. No parameter updates happen here.
IterationTrace run(const Eigen::ArrayXd& mixture, const Eigen::MatrixXd& backbone_output,
                   std::span<const SepItModel> models, const SepItConfig& config,
                   const Eigen::MatrixXd* references = nullptr);

/// Stand-in for a pretrained separator: each output is the whitened source
/// plus leakage from the other sources at the requested signal-to-
/// interference ratio (dB; +infinity gives the clean sources).
std::vector<Signal> oracle_backbone(const std::vector<Signal>& sources, double interference_db,
                                    std::uint64_t = 0);

/// Checkpoint container (JSON header + raw parameter payload).
void save_models(const std::filesystem::path& path, std::span<const SepItModel> models,
                 const SepItConfig& config);
std::vector<SepItModel> load_models(const std::filesystem::path& path, SepItConfig* config = nullptr);

}  // namespace scss
