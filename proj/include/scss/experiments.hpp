#pragma once

#include <cstdint>
#include <vector>

#include "scss/distributions.hpp"
#include "scss/mixture.hpp"
#include "scss/sepit.hpp"
#include "scss/signal.hpp"
#include "scss/wav.hpp"

namespace scss {

struct LaplaceValidationConfig {
  double window_ms = 20.0;
  Eigen::Index bins = 201;
  double range_sigmas = 6.0;           // histogram spans +- this many pooled sigmas
  double silent_rel_threshold = 1e-6;  // segments quieter than this fraction of
                                       // the signal variance are dropped
};

struct LaplaceValidationReport {
  Pdf1D empirical;
  LaplaceParams laplace_fit;
  NormalParams normal_fit;
  double kl_laplace_nats = 0.0;
  double kl_normal_nats = 0.0;
  std::uint64_t signals = 0;
  std::uint64_t segments_used = 0;
  std::uint64_t segments_silent = 0;
  double silent_rel_threshold = 0.0;
};

/// Pools every non-silent window of the whitened inputs and compares the
/// empirical amplitude density against zero-mean Laplace and normal fits.
/// Throws NoSegments when nothing survives the silence gate.
LaplaceValidationReport validate_laplace(const std::vector<Signal>& speech,
                                         const LaplaceValidationConfig& config = {});

LaplaceValidationReport validate_laplace_corpus(const CorpusIndex& corpus,
                                                const LaplaceValidationConfig& config = {});

/// Synthetic stand-in for a speech corpus: iid Laplace sources.
LaplaceValidationReport validate_laplace_synthetic(int signal_count, double duration_s,
                                                   double sample_rate, std::uint64_t seed,
                                                   const LaplaceValidationConfig& config = {});

struct SimulateConfig {
  SepItConfig model;
  int train_mixtures = 12;
  int test_mixtures = 50;
  double train_duration_s = 1.0;
  double test_duration_s = 1.5;
  double sample_rate = 8000.0;
  double backbone_sir_db = 10.0;
  int steps_first_block = 1200;
  int steps_later_blocks = 250;
  int batch_size = 2;
  std::uint64_t seed = 0;
  SourceModel source_model = SourceModel::ar_laplace;
};

struct SimulateReport {
  std::vector<SepItModel> models;
  std::vector<std::vector<double>> loss_curves;  // per block
  std::vector<IterationTrace> traces;            // per test mixture

  // test-set aggregates, indexed by iteration (0 = backbone)
  std::vector<double> mean_si_sdr_per_iter;
  std::vector<double> mean_mi_per_iter;

  double backbone_mean_si_sdr = 0.0;
  double mixture_mean_si_sdr = 0.0;  // SI-SDR of the raw mixture vs each source
  double mean_si_sdr_selected = 0.0;  // stopping criterion active
  double mean_si_sdr_final = 0.0;     // always max_iter iterations
  double mean_si_sdr_best = 0.0;      // per-trace best-iteration oracle
};

/// Full desk-scale protocol: synthesize mixtures, run the oracle backbone,
/// train one block per iteration on the frozen previous iterates, then
/// evaluate with and without the stopping criterion.
SimulateReport simulate(const SimulateConfig& config);

/// Trains a single block in place; returns the per-step batch losses.
std::vector<double> train_block(SepItModel& model, const std::vector<TrainSample>& data,
                                const SepItConfig& config, int steps, int batch_size);

}  // namespace scss
