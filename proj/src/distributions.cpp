#include "scss/distributions.hpp"

#include <algorithm>
#include <cmath>

#include "scss/rng.hpp"

namespace scss {

namespace {
constexpr double kQFloor = 1e-300;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
}  // namespace

double Pdf1D::variance() const {
  const double mu = mean();
  return (density * widths() * (centers() - mu).square()).sum();
}

double Pdf1D::interpolate(double x) const {
  const Eigen::ArrayXd c = centers();
  const Eigen::Index k = c.size();
  if (k == 0 || x < edges(0) || x > edges(k)) return 0.0;
  if (x <= c(0)) return density(0);
  if (x >= c(k - 1)) return density(k - 1);
  // uniform-grid fast path
  const double w0 = edges(1) - edges(0);
  Eigen::Index i = static_cast<Eigen::Index>((x - c(0)) / w0);
  i = std::clamp<Eigen::Index>(i, 0, k - 2);
  while (i > 0 && x < c(i)) --i;
  while (i < k - 2 && x > c(i + 1)) ++i;
  const double t = (x - c(i)) / (c(i + 1) - c(i));
  return density(i) + t * (density(i + 1) - density(i));
}

bool Pdf1D::same_grid(const Pdf1D& other, double tol) const {
  if (edges.size() != other.edges.size()) return false;
  return ((edges - other.edges).abs() <= tol).all();
}

double eval_laplace(double x, const LaplaceParams& p) {
  return std::exp(-std::abs(x - p.location) / p.scale) / (2.0 * p.scale);
}

double eval_normal(double x, const NormalParams& p) {
  const double z = (x - p.location) / p.sigma;
  return kInvSqrt2Pi / p.sigma * std::exp(-0.5 * z * z);
}

namespace {

double median_of(Eigen::ArrayXd x) {
  std::vector<double> v(x.data(), x.data() + x.size());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    return 0.5 * (v[mid - 1] + hi);
  }
  return hi;
}

}  // namespace

LaplaceParams fit_laplace(const Eigen::ArrayXd& samples, FitCenter center) {
  if (samples.size() < 2) throw DegenerateSamples("fit_laplace needs at least 2 samples");
  const double loc = center == FitCenter::median ? median_of(samples) : 0.0;
  const double b = (samples - loc).abs().mean();
  if (b <= 0.0) throw DegenerateSamples("fit_laplace: all samples equal the location");
  return LaplaceParams{b, loc};
}

NormalParams fit_normal(const Eigen::ArrayXd& samples, FitCenter center) {
  if (samples.size() < 2) throw DegenerateSamples("fit_normal needs at least 2 samples");
  const double loc = center == FitCenter::median ? median_of(samples) : 0.0;
  const double s2 = (samples - loc).square().mean();
  if (s2 <= 0.0) throw DegenerateSamples("fit_normal: all samples equal the location");
  return NormalParams{std::sqrt(s2), loc};
}

Histogram1D::Histogram1D(Eigen::Index bins, double lo, double hi)
    : lo_(lo), hi_(hi), counts_(static_cast<std::size_t>(bins), 0) {
  if (bins < 1) throw DegenerateSamples("histogram needs at least 1 bin");
  if (!(hi > lo)) throw DegenerateSamples("histogram range must be non-empty");
  inv_width_ = static_cast<double>(bins) / (hi - lo);
}

void Histogram1D::add(double x) {
  ++total_;
  if (x < lo_) {
    ++clipped_low_;
    ++counts_.front();
    return;
  }
  if (x >= hi_) {
    if (x > hi_) ++clipped_high_;
    ++counts_.back();
    return;
  }
  auto i = static_cast<std::size_t>((x - lo_) * inv_width_);
  if (i >= counts_.size()) i = counts_.size() - 1;
  ++counts_[i];
}

void Histogram1D::merge(const Histogram1D& other) {
  if (counts_.empty()) {
    *this = other;
    return;
  }
  if (other.counts_.size() != counts_.size() || other.lo_ != lo_ || other.hi_ != hi_)
    throw GridMismatch("histogram merge: incompatible grids");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  clipped_low_ += other.clipped_low_;
  clipped_high_ += other.clipped_high_;
}

Pdf1D Histogram1D::to_pdf() const {
  const auto k = static_cast<Eigen::Index>(counts_.size());
  Pdf1D pdf;
  pdf.edges = Eigen::ArrayXd::LinSpaced(k + 1, lo_, hi_);
  pdf.density.resize(k);
  const double width = (hi_ - lo_) / static_cast<double>(k);
  if (total_ == 0) throw DegenerateSamples("histogram holds no samples");
  const double norm = 1.0 / (static_cast<double>(total_) * width);
  for (Eigen::Index i = 0; i < k; ++i)
    pdf.density(i) = static_cast<double>(counts_[static_cast<std::size_t>(i)]) * norm;
  pdf.clipped_low = clipped_low_;
  pdf.clipped_high = clipped_high_;
  pdf.total_count = total_;
  return pdf;
}

Pdf1D estimate_pdf(const Eigen::ArrayXd& samples, Eigen::Index bin_count, double lo, double hi) {
  if (bin_count < 2) throw DegenerateSamples("estimate_pdf needs at least 2 bins");
  if (samples.size() == 0) throw DegenerateSamples("estimate_pdf: no samples");
  Histogram1D h(bin_count, lo, hi);
  for (Eigen::Index i = 0; i < samples.size(); ++i) h.add(samples(i));
  return h.to_pdf();
}

double kl_divergence(const Pdf1D& p, const Pdf1D& q) {
  if (!p.same_grid(q, 1e-12 * (std::abs(p.edges(0)) + std::abs(p.edges(p.edges.size() - 1)))))
    throw GridMismatch("kl_divergence: densities live on different grids");
  const Eigen::ArrayXd w = p.widths();
  KahanSum acc;
  for (Eigen::Index i = 0; i < p.density.size(); ++i) {
    const double pi = p.density(i);
    if (pi <= 0.0) continue;
    const double qi = std::max(q.density(i), kQFloor);
    acc.add(pi * w(i) * std::log(pi / qi));
  }
  return acc.value();
}

namespace {

template <typename Law>
double kl_to_analytic(const Pdf1D& p, const Law& law) {
  const Eigen::ArrayXd w = p.widths();
  const Eigen::ArrayXd c = p.centers();
  KahanSum acc;
  for (Eigen::Index i = 0; i < p.density.size(); ++i) {
    const double pi = p.density(i);
    if (pi <= 0.0) continue;
    double qi;
    if constexpr (std::is_same_v<Law, LaplaceParams>)
      qi = eval_laplace(c(i), law);
    else
      qi = eval_normal(c(i), law);
    acc.add(pi * w(i) * std::log(pi / std::max(qi, kQFloor)));
  }
  return acc.value();
}

}  // namespace

double kl_divergence(const Pdf1D& p, const LaplaceParams& q) { return kl_to_analytic(p, q); }
double kl_divergence(const Pdf1D& p, const NormalParams& q) { return kl_to_analytic(p, q); }

double entropy(const Pdf1D& p) {
  const Eigen::ArrayXd w = p.widths();
  KahanSum acc;
  for (Eigen::Index i = 0; i < p.density.size(); ++i) {
    const double pi = p.density(i);
    if (pi > 0.0) acc.add(-pi * w(i) * std::log(pi));
  }
  return acc.value();
}

}  // namespace scss
