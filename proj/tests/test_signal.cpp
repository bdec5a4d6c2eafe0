#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "scss/rng.hpp"
#include "scss/signal.hpp"

using namespace scss;

namespace {

Signal make_signal(std::initializer_list<double> values, double rate = 8000.0) {
  Signal s;
  s.sample_rate = rate;
  s.samples.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s.samples(i++) = v;
  return s;
}

Signal random_signal(Eigen::Index n, std::uint64_t seed, double rate = 8000.0) {
  RandomStream rng(seed);
  Signal s;
  s.sample_rate = rate;
  s.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.samples(i) = rng.laplace(kUnitLaplaceScale);
  return s;
}

}  // namespace

TEST_CASE("whiten leaves an already-white signal unchanged") {
  const Signal s = make_signal({1.0, -1.0, 1.0, -1.0});
  const Signal w = whiten(s);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(w.samples(i) == doctest::Approx(s.samples(i)));
  CHECK(w.sample_rate == s.sample_rate);
}

TEST_CASE("whiten output has zero mean and unit variance") {
  const Signal s = random_signal(4096, 11);
  Signal shifted = s;
  shifted.samples = 3.0 * s.samples + 5.0;
  const Signal w = whiten(shifted);
  CHECK(std::abs(mean(w.samples)) < 1e-12);
  CHECK(variance(w.samples) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("whiten is scale invariant and idempotent") {
  const Signal s = random_signal(2048, 17);
  const Signal w1 = whiten(s);
  Signal scaled = s;
  scaled.samples *= 42.0;
  const Signal w2 = whiten(scaled);
  const Signal w3 = whiten(w1);
  for (Eigen::Index i = 0; i < s.samples.size(); ++i) {
    CHECK(w2.samples(i) == doctest::Approx(w1.samples(i)).epsilon(1e-12));
    CHECK(std::abs(w3.samples(i) - w1.samples(i)) < 1e-9);
  }
}

TEST_CASE("whiten rejects constant signals") {
  CHECK_THROWS_AS(whiten(make_signal({0.0, 0.0, 0.0, 0.0})), DegenerateSignal);
  CHECK_THROWS_AS(whiten(make_signal({3.0, 3.0, 3.0})), DegenerateSignal);
}

TEST_CASE("segment counts follow floor(L/w)") {
  const Signal s = random_signal(32000, 3);
  const SegmentView v = segment(s, 20.0);
  CHECK(v.count() == 200);
  CHECK(v.window_len() == 160);

  const SegmentView whole = segment(s, 4000.0);
  CHECK(whole.count() == 1);

  const Signal tiny = random_signal(100, 4);
  CHECK_THROWS_AS(segment(tiny, 20.0), WindowTooLarge);
}

TEST_CASE("segment concatenation reproduces the samples bit-exactly") {
  const Signal s = random_signal(32000 + 57, 5);  // trailing remainder dropped
  const SegmentView v = segment(s, 20.0);
  const Eigen::ArrayXd cat = v.concatenated();
  CHECK(cat.size() == v.count() * v.window_len());
  for (Eigen::Index i = 0; i < cat.size(); ++i) CHECK(cat(i) == s.samples(i));
  for (Eigen::Index k = 0; k < v.count(); ++k) {
    const Eigen::ArrayXd seg = v.segment(k);
    CHECK(seg.size() == v.window_len());
    CHECK(seg(0) == s.samples(k * v.window_len()));
  }
}

TEST_CASE("si_sdr hand cases") {
  const Signal ref = make_signal({1.0, 0.0});
  CHECK(si_sdr(ref, make_signal({1.0, 1.0})) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(si_sdr(ref, make_signal({0.0, 1.0})) == -kDbCap);   // orthogonal
  CHECK(si_sdr(ref, make_signal({2.0, 0.0})) == kDbCap);    // perfect up to scale

  CHECK_THROWS_AS(si_sdr(ref, make_signal({1.0, 0.0, 0.0})), LengthMismatch);
  CHECK_THROWS_AS(si_sdr(make_signal({0.0, 0.0}), ref), ZeroReference);
}

TEST_CASE("si_sdr is invariant to positive scaling of the estimate") {
  const Signal ref = random_signal(512, 8);
  const Signal est = random_signal(512, 9);
  const double base = si_sdr(ref, est);
  for (double a : {1e-6, 0.5, 3.0, 1e7}) {
    Signal scaled = est;
    scaled.samples *= a;
    CHECK(std::abs(si_sdr(ref, scaled) - base) < 1e-9);
  }
}

TEST_CASE("sdr hand cases") {
  const Signal ref = random_signal(1024, 21);
  CHECK(sdr(ref, ref) == kDbCap);

  Signal flipped = ref;
  flipped.samples = -ref.samples;
  CHECK(sdr(ref, flipped) == doctest::Approx(-10.0 * std::log10(4.0)).epsilon(1e-9));
}

TEST_CASE("sdr of unit-variance noise is close to 0 dB") {
  const Eigen::Index n = 1'000'000;
  RandomStream rng(33);
  Signal ref, est;
  ref.samples.resize(n);
  est.samples.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = rng.laplace(kUnitLaplaceScale);
    ref.samples(i) = v;
    est.samples(i) = v + rng.laplace(kUnitLaplaceScale);
  }
  ref = whiten(ref);  // unit variance reference
  Signal est2;
  est2.sample_rate = est.sample_rate;
  est2.samples = est.samples;
  CHECK(sdr(ref, est2) == doctest::Approx(0.0).epsilon(0.1));
}

TEST_CASE("sdr equals si_sdr once the estimate is optimally rescaled") {
  for (std::uint64_t seed : {40u, 41u, 42u}) {
    Signal ref = random_signal(4096, seed);
    ref.samples -= ref.samples.mean();
    Signal est = random_signal(4096, seed + 100);
    est.samples -= est.samples.mean();
    // rescale so the projection coefficient equals 1
    const double alpha = (ref.samples * est.samples).sum() / ref.samples.square().sum();
    est.samples /= alpha;
    CHECK(sdr(ref, est) == doctest::Approx(si_sdr(ref, est)).epsilon(1e-6));
  }
}

TEST_CASE("si_sdr_improvement") {
  const Signal mixture = random_signal(2048, 50);
  const Signal ref = random_signal(2048, 51);
  CHECK(si_sdr_improvement(mixture, ref, mixture) == 0.0);

  const Signal est = random_signal(2048, 52);
  const double direct = si_sdr(ref, est) - si_sdr(ref, mixture);
  CHECK(si_sdr_improvement(mixture, ref, est) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(si_sdr_improvement(mixture, ref, ref) == doctest::Approx(kDbCap - si_sdr(ref, mixture)));
}
