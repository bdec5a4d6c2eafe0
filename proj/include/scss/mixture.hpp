#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "scss/distributions.hpp"
#include "scss/signal.hpp"

namespace scss {

/// One energy-conserving mixing-weight vector: every entry positive,
/// sum of squares exactly 1 (up to floating point).
struct CoefficientSample {
  Eigen::ArrayXd a;
};

/// Draws M coefficient vectors: C iid Uniform(0,1) values per vector,
/// normalized so the square sum is 1. Column j of the result is sample j.
/// Materializes the whole C x M matrix; use coefficient_pdf for large M.
Eigen::MatrixXd sample_coefficients(int speakers, std::uint64_t trials, std::uint64_t seed);

/// Histogram density of the first coefficient a0 on [0, 1], computed with
/// chunked substreams (bit-identical for any worker count).
Pdf1D coefficient_pdf(int speakers, std::uint64_t trials, Eigen::Index bin_count,
                      std::uint64_t seed, unsigned workers = 1);

/// Doubles the trial count and reports the largest per-bin density change,
/// the paper-style Monte-Carlo convergence check.
struct PdfConvergence {
  Pdf1D at_m;
  Pdf1D at_2m;
  double max_density_change = 0.0;
};
PdfConvergence coefficient_pdf_convergence(int speakers, std::uint64_t trials,
                                           Eigen::Index bin_count, std::uint64_t seed,
                                           unsigned workers = 1);

/// Recovers mixing weights by least-squares projection of the mixture onto
/// the sources, renormalized to unit square sum.
/// Throws IllConditioned when the source Gram matrix condition exceeds 1e8.
CoefficientSample estimate_dataset_coefficients(const std::vector<Signal>& sources,
                                                const Signal& mixture);

enum class SourceModel {
  iid_laplace,  // iid unit-variance Laplace samples; matches the bound model
  ar_laplace,   // Laplace innovations through a 1-pole filter (pole 0.7)
};

struct SyntheticMixture {
  std::vector<Signal> sources;  // whitened, unit variance
  CoefficientSample coefficients;
  Signal mixture;  // whiten(sum_i a_i * source_i)
};

/// Deterministic synthetic mixture; same seed gives bit-identical output.
SyntheticMixture synth_mixture(int speakers, double duration_s, double sample_rate,
                               std::uint64_t seed,
                               SourceModel model = SourceModel::iid_laplace);

/// Pole of the ar_laplace source model.
inline constexpr double kArPole = 0.7;

}  // namespace scss
