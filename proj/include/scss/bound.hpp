#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "scss/distributions.hpp"
#include "scss/signal.hpp"

namespace scss {

/// Grids for the mutual-information integration.
struct GridSpec {
  Eigen::Index m_bins = 512;
  double m_min = -8.0, m_max = 8.0;
  Eigen::Index v0_bins = 256;
  double v0_min = -8.0, v0_max = 8.0;
  Eigen::Index a0_bins = 64;  // on (0, 1]

  GridSpec doubled() const {
    GridSpec g = *this;
    g.m_bins *= 2;
    g.v0_bins *= 2;
    g.a0_bins *= 2;
    return g;
  }
  bool operator==(const GridSpec&) const = default;
};

/// Family of reduced-mixture densities conditioned on the first coefficient:
/// slice k holds the (C-1)-speaker energy-conserving mixture rescaled to
/// total energy 1 - a0_k^2, on the m grid. The v0 shift is applied at
/// evaluation time.
struct ConditionalPdfTable {
  int speakers = 0;
  Eigen::ArrayXd a0_centers;
  Eigen::ArrayXd a0_weights;  // per-bin probability mass, sums to 1
  Eigen::ArrayXd a0_density;  // per-bin density of f(a0)
  std::vector<Pdf1D> slices;
};

enum class MiForm { standard, literal };
enum class VarReading { unit, per_speaker };

/// Both evaluations of I(m_r, v_{0,r}) plus diagnostics.
struct MiResult {
  double standard_nats = 0.0;
  double literal_nats = 0.0;
  double h_m_nats = 0.0;           // mixture differential entropy
  double mass_outside_grid = 0.0;  // clipped MC mass + conditional leak
  double value(MiForm form) const {
    return form == MiForm::standard ? standard_nats : literal_nats;
  }
};

inline double nats_to_bits(double nats) { return nats / 0.69314718055994530942; }

/// Marginal PDF of one mixture sample m = sum_i a_i v_i with unit-variance
/// Laplace sources and energy-conserving coefficients.
Pdf1D mixture_pdf(int speakers, std::uint64_t trials, const GridSpec& grid,
                  std::uint64_t seed, unsigned workers = 1);

/// Throws UnsupportedC for speakers < 2. The (C-1)=1 reduced mixture uses the
/// analytic Laplace instead of Monte-Carlo.
ConditionalPdfTable conditional_pdf_table(int speakers, std::uint64_t trials,
                                          const GridSpec& grid, std::uint64_t seed,
                                          unsigned workers = 1);

/// Numerical I(m_r, v_{0,r}) via h(m) - h(m|v0); the literal appendix
/// integrand (f(a0) inside the log) is evaluated alongside.
/// Throws GridUnderflow when more than 0.5% of probability mass falls
/// outside the m grid.
MiResult mutual_information_segment(int speakers, std::uint64_t trials, const GridSpec& grid,
                                    std::uint64_t seed, unsigned workers = 1);

/// Mutual information plus the derived SDR bound and the configuration that
/// produced it.
struct BoundResult {
  int speakers = 0;
  double mi_nats = 0.0;
  double var_v0 = 1.0;
  double l_over_w = 0.0;
  double sdr_bound_db = 0.0;

  // provenance
  double length_s = 0.0;
  double window_ms = 0.0;
  double sample_rate = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  GridSpec grids;
  MiForm form = MiForm::standard;
  VarReading var_reading = VarReading::unit;
  double mi_standard_nats = 0.0;
  double mi_literal_nats = 0.0;
  double grid_refinement_change = 0.0;  // relative MI change under doubled grids
};

/// The bound formula; BoundResult::sdr_bound_db is exactly this expression.
double sdr_bound_formula_db(double l_over_w, double var_v0, double mi_nats);

/// Assembles a BoundResult from an already-computed mutual information.
/// l_over_w is floor(L_samples / w_samples), per the segmentation rule.
BoundResult sdr_upper_bound(int speakers, double length_s, double window_s,
                            double sample_rate, double mi_nats, double var_v0);

struct BoundConfig {
  GridSpec grids;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  MiForm form = MiForm::standard;
  VarReading var_reading = VarReading::unit;
  double length_s = 4.0;
  double window_ms = 20.0;
  double sample_rate = 8000.0;
  bool refinement_gate = false;  // also evaluate doubled grids and record the change
  std::string cache_dir;        // reuse persisted tables when non-empty
};

double var_v0_value(VarReading reading, int speakers);

/// One BoundResult per speaker count, same grid/trial/seed policy.
std::vector<BoundResult> bound_curve(const std::vector<int>& speaker_counts,
                                     const BoundConfig& config);

/// Plug-in mutual information (nats) of the joint histogram of paired
/// samples; each axis spans mean +- 4 standard deviations with `bins` bins.
/// Requires equal lengths >= 10 * bins^2.
double binned_mi(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, Eigen::Index bins);
double binned_mi(const Signal& x, const Signal& y, Eigen::Index bins);

/// Entropy (nats) of the same marginal binning used by binned_mi.
double binned_entropy(const Eigen::ArrayXd& x, Eigen::Index bins);

}  // namespace scss
