#include "scss/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "scss/bound.hpp"
#include "scss/rng.hpp"

namespace scss {

LaplaceValidationReport validate_laplace(const std::vector<Signal>& speech,
                                         const LaplaceValidationConfig& config) {
  LaplaceValidationReport report;
  report.silent_rel_threshold = config.silent_rel_threshold;

  std::vector<double> pooled;
  for (const Signal& raw : speech) {
    Signal s;
    try {
      s = whiten(raw);
    } catch (const DegenerateSignal&) {
      continue;
    }
    SegmentView view = [&] {
      try {
        return segment(s, config.window_ms);
      } catch (const WindowTooLarge&) {
        return SegmentView(s, s.samples.size());  // one whole-signal window
      }
    }();
    ++report.signals;
    const double signal_var = variance(s.samples);
    const double gate = config.silent_rel_threshold * signal_var;
    for (Eigen::Index i = 0; i < view.count(); ++i) {
      const Eigen::ArrayXd seg = view.segment(i);
      if (variance(seg) < gate) {
        ++report.segments_silent;
        continue;
      }
      ++report.segments_used;
      pooled.insert(pooled.end(), seg.data(), seg.data() + seg.size());
    }
  }
  if (report.segments_used == 0) throw NoSegments("no non-silent segments in input");

  Eigen::Map<const Eigen::ArrayXd> samples(pooled.data(),
                                           static_cast<Eigen::Index>(pooled.size()));
  const double sigma = std::sqrt(variance(samples));
  report.empirical = estimate_pdf(samples, config.bins, -config.range_sigmas * sigma,
                                  config.range_sigmas * sigma);
  report.laplace_fit = fit_laplace(samples);
  report.normal_fit = fit_normal(samples);
  report.kl_laplace_nats = kl_divergence(report.empirical, report.laplace_fit);
  report.kl_normal_nats = kl_divergence(report.empirical, report.normal_fit);
  return report;
}

LaplaceValidationReport validate_laplace_corpus(const CorpusIndex& corpus,
                                                const LaplaceValidationConfig& config) {
  std::vector<Signal> signals;
  signals.reserve(corpus.entries.size());
  for (const auto& entry : corpus.entries) signals.push_back(read_wav(entry.path));
  if (signals.empty()) throw NoSegments("corpus holds no parseable WAV files");
  return validate_laplace(signals, config);
}

LaplaceValidationReport validate_laplace_synthetic(int signal_count, double duration_s,
                                                   double sample_rate, std::uint64_t seed,
                                                   const LaplaceValidationConfig& config) {
  std::vector<Signal> signals;
  signals.reserve(static_cast<std::size_t>(signal_count));
  const auto length = static_cast<Eigen::Index>(std::llround(duration_s * sample_rate));
  for (int i = 0; i < signal_count; ++i) {
    RandomStream rng(derive_seed(seed, 0xa51), static_cast<std::uint64_t>(i));
    Signal s;
    s.sample_rate = sample_rate;
    s.samples.resize(length);
    for (Eigen::Index t = 0; t < length; ++t) s.samples(t) = rng.laplace(kUnitLaplaceScale);
    signals.push_back(std::move(s));
  }
  return validate_laplace(signals, config);
}

std::vector<double> train_block(SepItModel& model, const std::vector<TrainSample>& data,
                                const SepItConfig& config, int steps, int batch_size) {
  if (data.empty()) throw ShapeMismatch("train_block: no training data");
  batch_size = std::max(1, std::min<int>(batch_size, static_cast<int>(data.size())));
  const int steps_per_epoch =
      (static_cast<int>(data.size()) + batch_size - 1) / batch_size;

  AdamState adam = make_adam(model);
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(steps));
  std::vector<TrainSample> batch(static_cast<std::size_t>(batch_size));
  std::size_t cursor = 0;
  for (int step = 0; step < steps; ++step) {
    for (int b = 0; b < batch_size; ++b) {
      batch[static_cast<std::size_t>(b)] = data[cursor];
      cursor = (cursor + 1) % data.size();
    }
    const int epoch = step / steps_per_epoch;
    const double lr = config.lr * std::pow(config.lr_decay, epoch);
    losses.push_back(grad_step(model, adam, batch, lr, config.db_cap));
  }
  return losses;
}

namespace {

struct EvalSet {
  std::vector<Eigen::ArrayXd> mixtures;
  std::vector<Eigen::MatrixXd> backbones;
  std::vector<Eigen::MatrixXd> refs;
};

EvalSet make_set(const SimulateConfig& cfg, int count, double duration_s, std::uint64_t tag) {
  EvalSet set;
  set.mixtures.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const SyntheticMixture mix =
        synth_mixture(cfg.model.speakers, duration_s, cfg.sample_rate,
                      derive_seed(cfg.seed, tag + static_cast<std::uint64_t>(i)),
                      cfg.source_model);
    const std::vector<Signal> backbone = oracle_backbone(mix.sources, cfg.backbone_sir_db);
    const Eigen::Index len = mix.mixture.samples.size();
    Eigen::MatrixXd prev(len, cfg.model.speakers);
    Eigen::MatrixXd refs(len, cfg.model.speakers);
    for (int s = 0; s < cfg.model.speakers; ++s) {
      prev.col(s) = backbone[static_cast<std::size_t>(s)].samples.matrix();
      refs.col(s) = mix.sources[static_cast<std::size_t>(s)].samples.matrix();
    }
    set.mixtures.push_back(mix.mixture.samples);
    set.backbones.push_back(std::move(prev));
    set.refs.push_back(std::move(refs));
  }
  return set;
}

}  // namespace

SimulateReport simulate(const SimulateConfig& cfg) {
  SimulateReport report;
  const int c = cfg.model.speakers;

  EvalSet train = make_set(cfg, cfg.train_mixtures, cfg.train_duration_s, 0x7261);
  EvalSet test = make_set(cfg, cfg.test_mixtures, cfg.test_duration_s, 0x7465);

  // one block per iteration, each trained on the frozen previous iterates
  std::vector<TrainSample> data(static_cast<std::size_t>(cfg.train_mixtures));
  for (int i = 0; i < cfg.train_mixtures; ++i) {
    auto& d = data[static_cast<std::size_t>(i)];
    d.mixture = train.mixtures[static_cast<std::size_t>(i)];
    d.prev = train.backbones[static_cast<std::size_t>(i)];
    d.refs = train.refs[static_cast<std::size_t>(i)];
  }
  const int blocks = cfg.model.share_weights ? 1 : cfg.model.max_iter;
  for (int j = 0; j < blocks; ++j) {
    SepItModel block = init_model(cfg.model, derive_seed(cfg.seed, 0x626c00 + static_cast<std::uint64_t>(j)));
    const int steps = j == 0 ? cfg.steps_first_block : cfg.steps_later_blocks;
    report.loss_curves.push_back(train_block(block, data, cfg.model, steps, cfg.batch_size));
    // advance the frozen inputs for the next block
    if (j + 1 < blocks)
      for (auto& d : data) d.prev = refine(d.prev, d.mixture, block);
    report.models.push_back(std::move(block));
  }

  // test-set evaluation
  const std::size_t iters = static_cast<std::size_t>(cfg.model.max_iter) + 1;
  report.mean_si_sdr_per_iter.assign(iters, 0.0);
  report.mean_mi_per_iter.assign(iters, 0.0);
  double sum_backbone = 0.0, sum_mixture = 0.0;
  double sum_selected = 0.0, sum_final = 0.0, sum_best = 0.0;

  for (int i = 0; i < cfg.test_mixtures; ++i) {
    const auto& m = test.mixtures[static_cast<std::size_t>(i)];
    const auto& refs = test.refs[static_cast<std::size_t>(i)];
    IterationTrace trace = run(m, test.backbones[static_cast<std::size_t>(i)],
                               report.models, cfg.model, &refs);

    // fixed-iteration estimates beyond an early stop, for the no-SC series
    Eigen::MatrixXd est = trace.estimates.back();
    std::vector<double> si(iters), mi(iters);
    for (std::size_t j = 0; j < iters; ++j) {
      if (j < trace.estimates.size()) {
        si[j] = trace.si_sdr_mean[j];
        mi[j] = trace.mi[j];
      } else {
        const SepItModel& block = cfg.model.share_weights
                                      ? report.models[0]
                                      : report.models[j - 1];
        est = refine(est, m, block);
        si[j] = mean_si_sdr_best_perm(refs, est, cfg.model.db_cap);
        double mtot = 0.0;
        for (int s = 0; s < c; ++s) mtot += binned_mi(m, est.col(s).array(), cfg.model.mi_bins);
        mi[j] = mtot / c;
      }
      report.mean_si_sdr_per_iter[j] += si[j];
      report.mean_mi_per_iter[j] += mi[j];
    }

    sum_backbone += si[0];
    double base = 0.0;
    for (int s = 0; s < c; ++s) base += si_sdr(refs.col(s).array(), m, cfg.model.db_cap);
    sum_mixture += base / c;
    sum_selected += trace.si_sdr_mean[static_cast<std::size_t>(trace.selected)];
    sum_final += si[iters - 1];
    sum_best += *std::max_element(si.begin(), si.end());
    report.traces.push_back(std::move(trace));
  }
  const double inv = 1.0 / std::max(1, cfg.test_mixtures);
  for (auto& v : report.mean_si_sdr_per_iter) v *= inv;
  for (auto& v : report.mean_mi_per_iter) v *= inv;
  report.backbone_mean_si_sdr = sum_backbone * inv;
  report.mixture_mean_si_sdr = sum_mixture * inv;
  report.mean_si_sdr_selected = sum_selected * inv;
  report.mean_si_sdr_final = sum_final * inv;
  report.mean_si_sdr_best = sum_best * inv;
  return report;
}

}  // namespace scss
