#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "scss/errors.hpp"

namespace scss {

/// Default cap applied to dB metrics so they stay total on degenerate inputs.
inline constexpr double kDbCap = 200.0;

/// Uniformly sampled real-valued waveform.
struct Signal {
  Eigen::ArrayXd samples;
  double sample_rate = 8000.0;

  Eigen::Index size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

double mean(const Eigen::ArrayXd& x);
/// Population variance (mean removed, divide by N).
double variance(const Eigen::ArrayXd& x);

/// Non-overlapping fixed-length windows over a signal; the trailing partial
/// window is dropped so every segment is identically distributed.
class SegmentView {
 public:
  SegmentView(Signal parent, Eigen::Index window_len_samples);

  Eigen::Index window_len() const { return window_len_; }
  Eigen::Index count() const { return count_; }
  const Signal& parent() const { return parent_; }

  auto segment(Eigen::Index i) const {
    return parent_.samples.segment(i * window_len_, window_len_);
  }
  /// Concatenation of all segments (first count*window_len samples).
  Eigen::ArrayXd concatenated() const {
    return parent_.samples.head(count_ * window_len_);
  }

 private:
  Signal parent_;
  Eigen::Index window_len_ = 0;
  Eigen::Index count_ = 0;
};

/// Removes the mean and scales to unit variance.
/// Throws DegenerateSignal when the sample variance is below 1e-12.
Signal whiten(const Signal& s);

/// Splits into floor(L / (window_ms * rate)) non-overlapping windows.
/// Throws WindowTooLarge when one window exceeds the signal length.
SegmentView segment(const Signal& s, double window_ms);

/// 10*log10(Var(reference) / Var(reference - estimate)), capped to +-cap_db.
double sdr(const Signal& reference, const Signal& estimate, double cap_db = kDbCap);

/// Scale-invariant SDR: the estimate is projected onto the reference before
/// the error is formed. Capped to +-cap_db.
double si_sdr(const Signal& reference, const Signal& estimate, double cap_db = kDbCap);

/// si_sdr(reference, estimate) - si_sdr(reference, mixture).
double si_sdr_improvement(const Signal& mixture, const Signal& reference,
                          const Signal& estimate, double cap_db = kDbCap);

// Raw-array variants used by hot loops and the SepIt engine.
double sdr(const Eigen::ArrayXd& reference, const Eigen::ArrayXd& estimate,
           double cap_db = kDbCap);
double si_sdr(const Eigen::ArrayXd& reference, const Eigen::ArrayXd& estimate,
              double cap_db = kDbCap);

}  // namespace scss
