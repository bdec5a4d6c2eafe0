#include "scss/signal.hpp"

#include <algorithm>
#include <cmath>

namespace scss {

double mean(const Eigen::ArrayXd& x) { return x.mean(); }

double variance(const Eigen::ArrayXd& x) {
  const double mu = x.mean();
  return (x - mu).square().sum() / static_cast<double>(x.size());
}

SegmentView::SegmentView(Signal parent, Eigen::Index window_len_samples)
    : parent_(std::move(parent)), window_len_(window_len_samples) {
  if (window_len_ < 1) throw WindowTooLarge("window must cover at least one sample");
  if (window_len_ > parent_.samples.size())
    throw WindowTooLarge("window of " + std::to_string(window_len_) +
                         " samples exceeds signal length " +
                         std::to_string(parent_.samples.size()));
  count_ = parent_.samples.size() / window_len_;
}

Signal whiten(const Signal& s) {
  if (s.samples.size() < 2) throw DegenerateSignal("whiten needs at least 2 samples");
  const double mu = s.samples.mean();
  const double var = (s.samples - mu).square().sum() / static_cast<double>(s.samples.size());
  if (var < 1e-12) throw DegenerateSignal("signal variance below 1e-12");
  Signal out;
  out.sample_rate = s.sample_rate;
  out.samples = (s.samples - mu) / std::sqrt(var);
  return out;
}

SegmentView segment(const Signal& s, double window_ms) {
  const double w = window_ms * 1e-3 * s.sample_rate;
  const auto window_len = static_cast<Eigen::Index>(std::llround(w));
  if (window_len < 1) throw WindowTooLarge("window shorter than one sample");
  return SegmentView(s, window_len);
}

namespace {

double capped_ratio_db(double num, double den, double cap_db) {
  if (den <= 0.0 || !std::isfinite(num / den)) return num > 0.0 ? cap_db : -cap_db;
  if (num <= 0.0) return -cap_db;
  const double db = 10.0 * std::log10(num / den);
  return std::clamp(db, -cap_db, cap_db);
}

}  // namespace

double sdr(const Eigen::ArrayXd& reference, const Eigen::ArrayXd& estimate, double cap_db) {
  if (reference.size() != estimate.size())
    throw LengthMismatch("sdr: reference and estimate lengths differ");
  const double ref_var = variance(reference);
  if (ref_var <= 0.0) throw ZeroReference("sdr: reference has zero variance");
  const double err_var = variance(reference - estimate);
  return capped_ratio_db(ref_var, err_var, cap_db);
}

double si_sdr(const Eigen::ArrayXd& reference, const Eigen::ArrayXd& estimate, double cap_db) {
  if (reference.size() != estimate.size())
    throw LengthMismatch("si_sdr: reference and estimate lengths differ");
  const double ref_energy = reference.square().sum();
  if (ref_energy <= 0.0) throw ZeroReference("si_sdr: reference is identically zero");
  const double inner = (reference * estimate).sum();
  const double alpha = inner / ref_energy;
  const double target_energy = alpha * alpha * ref_energy;
  const double err_energy = (estimate - alpha * reference).square().sum();
  return capped_ratio_db(target_energy, err_energy, cap_db);
}

double sdr(const Signal& reference, const Signal& estimate, double cap_db) {
  return sdr(reference.samples, estimate.samples, cap_db);
}

double si_sdr(const Signal& reference, const Signal& estimate, double cap_db) {
  return si_sdr(reference.samples, estimate.samples, cap_db);
}

double si_sdr_improvement(const Signal& mixture, const Signal& reference,
                          const Signal& estimate, double cap_db) {
  return si_sdr(reference, estimate, cap_db) - si_sdr(reference, mixture, cap_db);
}

}  // namespace scss
