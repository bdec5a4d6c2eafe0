#include "scss/mixture.hpp"

#include <cmath>

#include "scss/rng.hpp"

namespace scss {

namespace {

void draw_coefficients(RandomStream& rng, int speakers, Eigen::ArrayXd& out) {
  double ss = 0.0;
  for (int i = 0; i < speakers; ++i) {
    const double u = rng.uniform_open01();
    out(i) = u;
    ss += u * u;
  }
  out /= std::sqrt(ss);
}

}  // namespace

Eigen::MatrixXd sample_coefficients(int speakers, std::uint64_t trials, std::uint64_t seed) {
  if (speakers < 1) throw UnsupportedC("sample_coefficients: C must be >= 1");
  if (trials < 1) throw DegenerateSamples("sample_coefficients: M must be >= 1");
  Eigen::MatrixXd out(speakers, static_cast<Eigen::Index>(trials));
  Eigen::ArrayXd a(speakers);
  // same chunk layout as the streaming paths, so both agree bit-for-bit
  const std::uint64_t chunk = kMcChunk;
  for (std::uint64_t c = 0, done = 0; done < trials; ++c) {
    RandomStream rng(seed, c);
    const std::uint64_t n = std::min<std::uint64_t>(chunk, trials - done);
    for (std::uint64_t j = 0; j < n; ++j) {
      draw_coefficients(rng, speakers, a);
      out.col(static_cast<Eigen::Index>(done + j)) = a.matrix();
    }
    done += n;
  }
  return out;
}

Pdf1D coefficient_pdf(int speakers, std::uint64_t trials, Eigen::Index bin_count,
                      std::uint64_t seed, unsigned workers) {
  if (speakers < 1) throw UnsupportedC("coefficient_pdf: C must be >= 1");
  auto per_chunk = [&](std::uint64_t, RandomStream& rng, std::uint64_t n) {
    Histogram1D h(bin_count, 0.0, 1.0);
    Eigen::ArrayXd a(speakers);
    for (std::uint64_t j = 0; j < n; ++j) {
      draw_coefficients(rng, speakers, a);
      h.add(a(0));
    }
    return h;
  };
  auto merge = [](Histogram1D& acc, Histogram1D&& part) { acc.merge(part); };
  Histogram1D h = chunked_mc<Histogram1D>(trials, kMcChunk, workers, seed, per_chunk, merge);
  return h.to_pdf();
}

PdfConvergence coefficient_pdf_convergence(int speakers, std::uint64_t trials,
                                           Eigen::Index bin_count, std::uint64_t seed,
                                           unsigned workers) {
  PdfConvergence r;
  r.at_m = coefficient_pdf(speakers, trials, bin_count, seed, workers);
  r.at_2m = coefficient_pdf(speakers, 2 * trials, bin_count, seed, workers);
  r.max_density_change = (r.at_m.density - r.at_2m.density).abs().maxCoeff();
  return r;
}

CoefficientSample estimate_dataset_coefficients(const std::vector<Signal>& sources,
                                                const Signal& mixture) {
  const auto c = static_cast<Eigen::Index>(sources.size());
  if (c < 1) throw UnsupportedC("estimate_dataset_coefficients: no sources");
  const Eigen::Index n = mixture.samples.size();
  Eigen::MatrixXd s(n, c);
  for (Eigen::Index i = 0; i < c; ++i) {
    if (sources[static_cast<std::size_t>(i)].samples.size() != n)
      throw LengthMismatch("estimate_dataset_coefficients: source/mixture lengths differ");
    s.col(i) = sources[static_cast<std::size_t>(i)].samples.matrix();
  }
  const Eigen::MatrixXd gram = s.transpose() * s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (lo <= 0.0 || hi / lo > 1e8)
    throw IllConditioned("estimate_dataset_coefficients: source Gram matrix condition > 1e8");
  const Eigen::VectorXd beta = gram.ldlt().solve(s.transpose() * mixture.samples.matrix());
  const double norm = beta.norm();
  if (norm <= 0.0)
    throw IllConditioned("estimate_dataset_coefficients: zero projection");
  CoefficientSample out;
  out.a = (beta / norm).array();
  return out;
}

namespace {

Signal raw_source(int length, double sample_rate, RandomStream& rng, SourceModel model) {
  Signal s;
  s.sample_rate = sample_rate;
  s.samples.resize(length);
  if (model == SourceModel::iid_laplace) {
    for (int t = 0; t < length; ++t) s.samples(t) = rng.laplace(kUnitLaplaceScale);
  } else {
    double prev = 0.0;
    for (int t = 0; t < length; ++t) {
      prev = kArPole * prev + rng.laplace(kUnitLaplaceScale);
      s.samples(t) = prev;
    }
  }
  return s;
}

}  // namespace

SyntheticMixture synth_mixture(int speakers, double duration_s, double sample_rate,
                               std::uint64_t seed, SourceModel model) {
  if (speakers < 1) throw UnsupportedC("synth_mixture: C must be >= 1");
  const int length = static_cast<int>(std::llround(duration_s * sample_rate));
  if (length < 2) throw DegenerateSignal("synth_mixture: signal would be shorter than 2 samples");

  SyntheticMixture out;
  RandomStream coeff_rng(seed, 0);
  out.coefficients.a.resize(speakers);
  draw_coefficients(coeff_rng, speakers, out.coefficients.a);

  out.sources.reserve(static_cast<std::size_t>(speakers));
  Eigen::ArrayXd mix = Eigen::ArrayXd::Zero(length);
  for (int i = 0; i < speakers; ++i) {
    RandomStream rng(seed, static_cast<std::uint64_t>(i) + 1);
    Signal s = whiten(raw_source(length, sample_rate, rng, model));
    mix += out.coefficients.a(i) * s.samples;
    out.sources.push_back(std::move(s));
  }
  Signal m;
  m.sample_rate = sample_rate;
  m.samples = std::move(mix);
  out.mixture = whiten(m);
  return out;
}

}  // namespace scss
