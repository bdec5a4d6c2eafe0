#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "scss/errors.hpp"

namespace scss {

/// Gridded one-dimensional probability density: uniform or non-uniform bins,
/// density normalized so sum(density * width) == 1.
struct Pdf1D {
  Eigen::ArrayXd edges;    // K+1 strictly increasing edges
  Eigen::ArrayXd density;  // K non-negative densities

  // sample accounting from estimate_pdf (clipped-to-edge-bin counts)
  std::uint64_t clipped_low = 0;
  std::uint64_t clipped_high = 0;
  std::uint64_t total_count = 0;

  Eigen::Index bin_count() const { return density.size(); }
  Eigen::ArrayXd widths() const { return edges.tail(density.size()) - edges.head(density.size()); }
  Eigen::ArrayXd centers() const {
    return 0.5 * (edges.tail(density.size()) + edges.head(density.size()));
  }
  double integral() const { return (density * widths()).sum(); }
  double mean() const { return (density * widths() * centers()).sum(); }
  double variance() const;

  /// Piecewise-linear interpolation of bin-center densities; 0 outside.
  double interpolate(double x) const;

  bool same_grid(const Pdf1D& other, double tol = 0.0) const;
};

/// Zero-mean Laplace: f(x) = exp(-|x|/b) / (2b).
struct LaplaceParams {
  double scale = 1.0;  // b > 0
  double location = 0.0;
};

/// Zero-mean normal.
struct NormalParams {
  double sigma = 1.0;
  double location = 0.0;
};

double eval_laplace(double x, const LaplaceParams& p);
double eval_normal(double x, const NormalParams& p);

enum class FitCenter { zero, median };

/// MLE scale b = mean(|x - location|); location fixed at 0 unless the
/// median-centered exploratory variant is requested.
LaplaceParams fit_laplace(const Eigen::ArrayXd& samples, FitCenter center = FitCenter::zero);
/// MLE sigma = sqrt(mean((x - location)^2)).
NormalParams fit_normal(const Eigen::ArrayXd& samples, FitCenter center = FitCenter::zero);

/// Integer-count histogram accumulator. Counts merge associatively, so
/// chunked Monte-Carlo runs give bit-identical densities for any worker
/// count. Out-of-range samples are clipped into the edge bins.
class Histogram1D {
 public:
  Histogram1D() = default;
  Histogram1D(Eigen::Index bins, double lo, double hi);

  void add(double x);
  void merge(const Histogram1D& other);
  Pdf1D to_pdf() const;

  std::uint64_t total() const { return total_; }
  std::uint64_t clipped_low() const { return clipped_low_; }
  std::uint64_t clipped_high() const { return clipped_high_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double lo_ = 0.0, hi_ = 1.0, inv_width_ = 1.0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0, clipped_low_ = 0, clipped_high_ = 0;
};

/// Normalized histogram density over [lo, hi].
Pdf1D estimate_pdf(const Eigen::ArrayXd& samples, Eigen::Index bin_count, double lo, double hi);

/// Discrete KL in nats between two densities on the same grid:
/// sum over p>0 of p*w*ln(p/q), q floored at 1e-300.
double kl_divergence(const Pdf1D& p, const Pdf1D& q);
/// KL against an analytic law, midpoint-evaluated on p's grid.
double kl_divergence(const Pdf1D& p, const LaplaceParams& q);
double kl_divergence(const Pdf1D& p, const NormalParams& q);

/// Differential entropy (nats) of the piecewise-constant density.
double entropy(const Pdf1D& p);

}  // namespace scss
