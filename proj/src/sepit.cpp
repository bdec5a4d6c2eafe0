#include "scss/sepit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "scss/bound.hpp"
#include "scss/container.hpp"
#include "scss/rng.hpp"
#include "scss/version.hpp"

namespace scss {

namespace {

constexpr double kLn10Over10 = 0.23025850929940456840;  // ln(10)/10

Eigen::Index hop_of(int kernel) { return kernel / 2; }

void check_model(const SepItModel& model) {
  if (model.kernel < 2 || model.kernel % 2 != 0)
    throw ShapeMismatch("sepit: kernel must be even and >= 2");
  if (model.latent_channels < 1 || model.speakers < 1)
    throw ShapeMismatch("sepit: empty model");
}

/// Signal padded to a whole number of hops plus one trailing hop, so the
/// frame count is exactly 2*ceil(L/K) * (K/hop)/2 = ceil(L/hop).
Eigen::ArrayXd pad_signal(const Eigen::ArrayXd& x, int kernel) {
  const Eigen::Index hop = hop_of(kernel);
  const Eigen::Index frames = (x.size() + hop - 1) / hop;
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero((frames - 1) * hop + kernel);
  out.head(x.size()) = x;
  return out;
}

/// K x L' frame matrix (im2col) of a padded signal.
Eigen::MatrixXd frame_matrix(const Eigen::ArrayXd& padded, int kernel, Eigen::Index frames) {
  const Eigen::Index hop = hop_of(kernel);
  Eigen::MatrixXd f(kernel, frames);
  for (Eigen::Index t = 0; t < frames; ++t)
    f.col(t) = padded.segment(t * hop, kernel).matrix();
  return f;
}

struct EncodeCache {
  Eigen::MatrixXd frames;  // K x L'
  Eigen::MatrixXd pre;     // N x L' pre-activation
  Eigen::MatrixXd post;    // N x L' after ReLU
};

EncodeCache encode_forward(const Eigen::ArrayXd& x, const SepItModel& model) {
  const Eigen::Index frames = latent_frames(x.size(), model.kernel);
  EncodeCache c;
  c.frames = frame_matrix(pad_signal(x, model.kernel), model.kernel, frames);
  c.pre = model.encoder_w * c.frames;
  c.pre.colwise() += model.encoder_b;
  c.post = c.pre.cwiseMax(0.0);
  return c;
}

/// Accumulates encoder gradients from d(loss)/d(post).
void encode_backward(const EncodeCache& c, const Eigen::MatrixXd& grad_post,
                     Eigen::MatrixXd& grad_w, Eigen::VectorXd& grad_b) {
  const Eigen::MatrixXd grad_pre =
      (c.pre.array() > 0.0).cast<double>() * grad_post.array();
  grad_w.noalias() += grad_pre * c.frames.transpose();
  grad_b.noalias() += grad_pre.rowwise().sum();
}

Eigen::MatrixXd conv_k3_forward(const ConvK3& conv, const Eigen::MatrixXd& x) {
  const Eigen::Index t = x.cols();
  Eigen::MatrixXd out = conv.bias * Eigen::RowVectorXd::Ones(t);
  out.noalias() += conv.w_mid * x;
  if (t > 1) {
    out.rightCols(t - 1).noalias() += conv.w_prev * x.leftCols(t - 1);
    out.leftCols(t - 1).noalias() += conv.w_next * x.rightCols(t - 1);
  }
  return out;
}

/// Returns grad wrt input; accumulates parameter grads.
Eigen::MatrixXd conv_k3_backward(const ConvK3& conv, const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& grad_out, ConvK3& grad) {
  const Eigen::Index t = x.cols();
  grad.w_mid.noalias() += grad_out * x.transpose();
  grad.bias.noalias() += grad_out.rowwise().sum();
  Eigen::MatrixXd grad_x = conv.w_mid.transpose() * grad_out;
  if (t > 1) {
    grad.w_prev.noalias() += grad_out.rightCols(t - 1) * x.leftCols(t - 1).transpose();
    grad.w_next.noalias() += grad_out.leftCols(t - 1) * x.rightCols(t - 1).transpose();
    grad_x.leftCols(t - 1).noalias() += conv.w_prev.transpose() * grad_out.rightCols(t - 1);
    grad_x.rightCols(t - 1).noalias() += conv.w_next.transpose() * grad_out.leftCols(t - 1);
  }
  return grad_x;
}

struct ResBlockCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd h_pre;  // conv1 output
  Eigen::MatrixXd h;      // relu(h_pre)
};

Eigen::MatrixXd res_block_forward(const ResBlock& block, const Eigen::MatrixXd& x,
                                  ResBlockCache& cache) {
  cache.input = x;
  cache.h_pre = conv_k3_forward(block.conv1, x);
  cache.h = cache.h_pre.cwiseMax(0.0);
  return conv_k3_forward(block.conv2, cache.h) + x;
}

Eigen::MatrixXd res_block_backward(const ResBlock& block, const ResBlockCache& cache,
                                   const Eigen::MatrixXd& grad_out, ResBlock& grad) {
  Eigen::MatrixXd grad_h = conv_k3_backward(block.conv2, cache.h, grad_out, grad.conv2);
  grad_h.array() *= (cache.h_pre.array() > 0.0).cast<double>();
  Eigen::MatrixXd grad_x = conv_k3_backward(block.conv1, cache.input, grad_h, grad.conv1);
  grad_x += grad_out;  // skip path
  return grad_x;
}

/// Overlap-add decode of one speaker's latent residual; output length L.
Eigen::ArrayXd decode_forward(const Eigen::MatrixXd& latent, const SepItModel& model,
                              Eigen::Index out_len) {
  const Eigen::Index hop = hop_of(model.kernel);
  const Eigen::Index frames = latent.cols();
  const Eigen::MatrixXd f = model.decoder_w.transpose() * latent;  // K x L'
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero((frames - 1) * hop + model.kernel);
  for (Eigen::Index t = 0; t < frames; ++t)
    out.segment(t * hop, model.kernel) += f.col(t).array();
  return out.head(out_len);
}

/// Gradients of decode: returns grad wrt latent, accumulates decoder grads.
Eigen::MatrixXd decode_backward(const Eigen::MatrixXd& latent, const SepItModel& model,
                                const Eigen::ArrayXd& grad_out, Eigen::MatrixXd& grad_w) {
  const Eigen::Index hop = hop_of(model.kernel);
  const Eigen::Index frames = latent.cols();
  Eigen::ArrayXd padded = Eigen::ArrayXd::Zero((frames - 1) * hop + model.kernel);
  padded.head(grad_out.size()) = grad_out;
  Eigen::MatrixXd grad_frames(model.kernel, frames);
  for (Eigen::Index t = 0; t < frames; ++t)
    grad_frames.col(t) = padded.segment(t * hop, model.kernel).matrix();
  grad_w.noalias() += latent * grad_frames.transpose();
  return model.decoder_w * grad_frames;
}

struct ForwardCache {
  EncodeCache enc_m;
  std::vector<EncodeCache> enc_prev;                 // per speaker
  std::vector<std::vector<ResBlockCache>> blocks;    // per speaker, per block
  std::vector<Eigen::MatrixXd> masks;                // per speaker
  Eigen::MatrixXd stacked;                           // (C N) x L' masked latents
  Eigen::MatrixXd eps_latent;                        // (C N) x L'
};

Eigen::MatrixXd refine_forward(const SepItModel& model, const Eigen::ArrayXd& mixture,
                               const Eigen::MatrixXd& prev, ForwardCache* cache) {
  check_model(model);
  const Eigen::Index len = mixture.size();
  const int c = model.speakers;
  const int n = model.latent_channels;
  if (prev.rows() != len || prev.cols() != c)
    throw ShapeMismatch("refine: estimates must be length x speakers");

  ForwardCache local;
  ForwardCache& fc = cache ? *cache : local;
  fc.enc_m = encode_forward(mixture, model);
  const Eigen::Index frames = fc.enc_m.post.cols();

  fc.enc_prev.resize(static_cast<std::size_t>(c));
  fc.blocks.assign(static_cast<std::size_t>(c), {});
  fc.masks.resize(static_cast<std::size_t>(c));
  fc.stacked.resize(static_cast<Eigen::Index>(c) * n, frames);

  for (int s = 0; s < c; ++s) {
    auto& enc = fc.enc_prev[static_cast<std::size_t>(s)];
    enc = encode_forward(prev.col(s).array(), model);
    Eigen::MatrixXd h = enc.post;
    auto& caches = fc.blocks[static_cast<std::size_t>(s)];
    caches.resize(model.mask_net.size());
    for (std::size_t b = 0; b < model.mask_net.size(); ++b)
      h = res_block_forward(model.mask_net[b], h, caches[b]);
    fc.masks[static_cast<std::size_t>(s)] = h;
    fc.stacked.middleRows(static_cast<Eigen::Index>(s) * n, n) =
        h.cwiseProduct(fc.enc_m.post);
  }

  fc.eps_latent = model.combiner_w * fc.stacked;
  fc.eps_latent.colwise() += model.combiner_b;

  Eigen::MatrixXd out(len, c);
  for (int s = 0; s < c; ++s) {
    const Eigen::MatrixXd eps_s = fc.eps_latent.middleRows(static_cast<Eigen::Index>(s) * n, n);
    out.col(s) = prev.col(s) + decode_forward(eps_s, model, len).matrix();
  }
  return out;
}

void refine_backward(const SepItModel& model, const ForwardCache& fc,
                     const Eigen::MatrixXd& grad_out, SepItGrads& grads) {
  const int c = model.speakers;
  const int n = model.latent_channels;
  const Eigen::Index frames = fc.enc_m.post.cols();

  Eigen::MatrixXd grad_eps(static_cast<Eigen::Index>(c) * n, frames);
  for (int s = 0; s < c; ++s) {
    const Eigen::MatrixXd eps_s = fc.eps_latent.middleRows(static_cast<Eigen::Index>(s) * n, n);
    grad_eps.middleRows(static_cast<Eigen::Index>(s) * n, n) =
        decode_backward(eps_s, model, grad_out.col(s).array(), grads.decoder_w);
  }

  grads.combiner_w.noalias() += grad_eps * fc.stacked.transpose();
  grads.combiner_b.noalias() += grad_eps.rowwise().sum();
  const Eigen::MatrixXd grad_stacked = model.combiner_w.transpose() * grad_eps;

  Eigen::MatrixXd grad_enc_m = Eigen::MatrixXd::Zero(n, frames);
  for (int s = 0; s < c; ++s) {
    const Eigen::MatrixXd grad_z = grad_stacked.middleRows(static_cast<Eigen::Index>(s) * n, n);
    const Eigen::MatrixXd& mask = fc.masks[static_cast<std::size_t>(s)];
    grad_enc_m += grad_z.cwiseProduct(mask);
    Eigen::MatrixXd grad_mask = grad_z.cwiseProduct(fc.enc_m.post);
    const auto& caches = fc.blocks[static_cast<std::size_t>(s)];
    for (std::size_t b = model.mask_net.size(); b-- > 0;)
      grad_mask = res_block_backward(model.mask_net[b], caches[b], grad_mask,
                                     grads.mask_net[b]);
    encode_backward(fc.enc_prev[static_cast<std::size_t>(s)], grad_mask, grads.encoder_w,
                    grads.encoder_b);
  }
  encode_backward(fc.enc_m, grad_enc_m, grads.encoder_w, grads.encoder_b);
}

/// SI-SDR value and gradient wrt the estimate; no cap in the gradient path
/// (training points live far from the cap).
double si_sdr_with_grad(const Eigen::VectorXd& ref, const Eigen::VectorXd& est,
                        Eigen::VectorXd& grad) {
  const double ref_energy = ref.squaredNorm();
  const double inner = ref.dot(est);
  const double alpha = inner / ref_energy;
  const double target = alpha * alpha * ref_energy;
  const Eigen::VectorXd err = est - alpha * ref;
  const double err_energy = err.squaredNorm();
  const double value = 10.0 * std::log10(target / err_energy);
  // d(si_sdr)/d(est) = (10/ln10) [ 2 alpha ref / target - 2 err / err_energy ]
  grad = (1.0 / kLn10Over10) * ((2.0 * alpha / target) * ref - (2.0 / err_energy) * err);
  return value;
}

std::vector<std::vector<int>> all_permutations(int c) {
  std::vector<int> idx(static_cast<std::size_t>(c));
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(idx);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return perms;
}

std::vector<int> best_permutation(const Eigen::MatrixXd& refs, const Eigen::MatrixXd& ests,
                                  double cap_db) {
  const int c = static_cast<int>(refs.cols());
  if (c > 8) throw ShapeMismatch("permutation search supports up to 8 speakers");
  Eigen::MatrixXd scores(c, c);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      scores(i, j) = si_sdr(refs.col(i).array(), ests.col(j).array(), cap_db);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_perm;
  for (const auto& perm : all_permutations(c)) {
    double total = 0.0;
    for (int i = 0; i < c; ++i) total += scores(i, perm[static_cast<std::size_t>(i)]);
    if (total > best) {
      best = total;
      best_perm = perm;
    }
  }
  return best_perm;
}

}  // namespace

std::size_t SepItModel::parameter_count() const {
  std::size_t n = static_cast<std::size_t>(encoder_w.size() + encoder_b.size() +
                                           combiner_w.size() + combiner_b.size() +
                                           decoder_w.size());
  for (const auto& block : mask_net)
    n += static_cast<std::size_t>(block.conv1.w_prev.size() + block.conv1.w_mid.size() +
                                  block.conv1.w_next.size() + block.conv1.bias.size() +
                                  block.conv2.w_prev.size() + block.conv2.w_mid.size() +
                                  block.conv2.w_next.size() + block.conv2.bias.size());
  return n;
}

std::vector<Eigen::Map<Eigen::VectorXd>> parameter_views(SepItModel& model) {
  std::vector<Eigen::Map<Eigen::VectorXd>> views;
  auto add = [&](auto& m) { views.emplace_back(m.data(), m.size()); };
  add(model.encoder_w);
  add(model.encoder_b);
  for (auto& block : model.mask_net) {
    add(block.conv1.w_prev);
    add(block.conv1.w_mid);
    add(block.conv1.w_next);
    add(block.conv1.bias);
    add(block.conv2.w_prev);
    add(block.conv2.w_mid);
    add(block.conv2.w_next);
    add(block.conv2.bias);
  }
  add(model.combiner_w);
  add(model.combiner_b);
  add(model.decoder_w);
  return views;
}

std::vector<std::string> parameter_names(const SepItModel& model) {
  std::vector<std::string> names = {"encoder_w", "encoder_b"};
  for (std::size_t b = 0; b < model.mask_net.size(); ++b) {
    const std::string p = "mask" + std::to_string(b) + ".";
    for (const char* t : {"conv1.w_prev", "conv1.w_mid", "conv1.w_next", "conv1.bias",
                          "conv2.w_prev", "conv2.w_mid", "conv2.w_next", "conv2.bias"})
      names.push_back(p + t);
  }
  names.insert(names.end(), {"combiner_w", "combiner_b", "decoder_w"});
  return names;
}

SepItModel init_model(const SepItConfig& config, std::uint64_t seed) {
  if (config.kernel < 2 || config.kernel % 2 != 0)
    throw ShapeMismatch("init_model: kernel must be even and >= 2");
  SepItModel m;
  m.speakers = config.speakers;
  m.latent_channels = config.latent_channels;
  m.kernel = config.kernel;
  const int n = config.latent_channels;
  const Eigen::Index cn = static_cast<Eigen::Index>(config.speakers) * n;

  RandomStream rng(seed, 0);
  auto uniform_matrix = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = rng.uniform(-scale, scale);
    return w;
  };

  m.encoder_w = uniform_matrix(n, config.kernel, std::sqrt(1.0 / config.kernel));
  m.encoder_b = Eigen::VectorXd::Zero(n);
  m.mask_net.resize(static_cast<std::size_t>(config.res_blocks));
  const double conv_scale = std::sqrt(1.0 / (3.0 * n));
  for (auto& block : m.mask_net) {
    for (ConvK3* conv : {&block.conv1, &block.conv2}) {
      conv->w_prev = uniform_matrix(n, n, conv_scale);
      conv->w_mid = uniform_matrix(n, n, conv_scale);
      conv->w_next = uniform_matrix(n, n, conv_scale);
      conv->bias = Eigen::VectorXd::Zero(n);
    }
  }
  m.combiner_w = Eigen::MatrixXd::Zero(cn, cn);
  m.combiner_b = Eigen::VectorXd::Zero(cn);
  m.decoder_w = uniform_matrix(n, config.kernel, std::sqrt(1.0 / n));
  return m;
}

SepItGrads zero_grads(const SepItModel& model) {
  SepItGrads g = model;
  for (auto view : parameter_views(g)) view.setZero();
  return g;
}

Eigen::Index latent_frames(Eigen::Index length, int kernel) {
  const Eigen::Index hop = hop_of(kernel);
  return (length + hop - 1) / hop;
}

Eigen::MatrixXd encode(const Eigen::ArrayXd& x, const SepItModel& model) {
  check_model(model);
  return encode_forward(x, model).post;
}

Eigen::MatrixXd encode(const Signal& x, const SepItModel& model) {
  return encode(x.samples, model);
}

Eigen::MatrixXd refine(const Eigen::MatrixXd& prev_estimates, const Eigen::ArrayXd& mixture,
                       const SepItModel& model) {
  return refine_forward(model, mixture, prev_estimates, nullptr);
}

std::vector<Signal> refine(const std::vector<Signal>& prev_estimates, const Signal& mixture,
                           const SepItModel& model) {
  const auto c = static_cast<int>(prev_estimates.size());
  Eigen::MatrixXd prev(mixture.samples.size(), c);
  for (int s = 0; s < c; ++s) {
    if (prev_estimates[static_cast<std::size_t>(s)].samples.size() != mixture.samples.size())
      throw ShapeMismatch("refine: estimate/mixture lengths differ");
    prev.col(s) = prev_estimates[static_cast<std::size_t>(s)].samples.matrix();
  }
  const Eigen::MatrixXd out = refine(prev, mixture.samples, model);
  std::vector<Signal> res(static_cast<std::size_t>(c));
  for (int s = 0; s < c; ++s) {
    res[static_cast<std::size_t>(s)].sample_rate = mixture.sample_rate;
    res[static_cast<std::size_t>(s)].samples = out.col(s).array();
  }
  return res;
}

double mean_si_sdr_best_perm(const Eigen::MatrixXd& references, const Eigen::MatrixXd& estimates,
                             double cap_db) {
  if (references.rows() != estimates.rows() || references.cols() != estimates.cols())
    throw ShapeMismatch("mean_si_sdr_best_perm: shape mismatch");
  const auto perm = best_permutation(references, estimates, cap_db);
  double total = 0.0;
  for (int i = 0; i < references.cols(); ++i)
    total += si_sdr(references.col(i).array(),
                    estimates.col(perm[static_cast<std::size_t>(i)]).array(), cap_db);
  return total / static_cast<double>(references.cols());
}

double loss(const Eigen::MatrixXd& references, const Eigen::MatrixXd& estimates, double cap_db) {
  return -mean_si_sdr_best_perm(references, estimates, cap_db);
}

double loss_and_gradients(const SepItModel& model, const Eigen::ArrayXd& mixture,
                          const Eigen::MatrixXd& prev_estimates,
                          const Eigen::MatrixXd& references, SepItGrads& grads,
                          double cap_db) {
  ForwardCache cache;
  const Eigen::MatrixXd est = refine_forward(model, mixture, prev_estimates, &cache);
  const auto perm = best_permutation(references, est, cap_db);
  const int c = model.speakers;

  Eigen::MatrixXd grad_est = Eigen::MatrixXd::Zero(est.rows(), est.cols());
  double mean_score = 0.0;
  for (int i = 0; i < c; ++i) {
    const int j = perm[static_cast<std::size_t>(i)];
    Eigen::VectorXd g;
    mean_score += si_sdr_with_grad(references.col(i), est.col(j), g);
    grad_est.col(j) = -g / static_cast<double>(c);
  }
  mean_score /= static_cast<double>(c);
  refine_backward(model, cache, grad_est, grads);
  return -mean_score;
}

AdamState make_adam(const SepItModel& model) {
  AdamState s;
  SepItModel scratch = model;
  for (auto view : parameter_views(scratch)) {
    s.m.emplace_back(Eigen::VectorXd::Zero(view.size()));
    s.v.emplace_back(Eigen::VectorXd::Zero(view.size()));
  }
  return s;
}

double grad_step(SepItModel& model, AdamState& adam, std::span<const TrainSample> batch,
                 double lr, double cap_db) {
  if (batch.empty()) throw ShapeMismatch("grad_step: empty batch");
  SepItGrads grads = zero_grads(model);
  double total = 0.0;
  for (const auto& sample : batch)
    total += loss_and_gradients(model, sample.mixture, sample.prev, sample.refs, grads, cap_db);
  const double inv = 1.0 / static_cast<double>(batch.size());
  total *= inv;

  adam.t += 1;
  const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.t));
  const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.t));
  auto params = parameter_views(model);
  auto gviews = parameter_views(grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Eigen::VectorXd g = gviews[i] * inv;
    adam.m[i] = adam.beta1 * adam.m[i] + (1.0 - adam.beta1) * g;
    adam.v[i] = adam.beta2 * adam.v[i].array().matrix() +
                (1.0 - adam.beta2) * g.cwiseProduct(g);
    const Eigen::ArrayXd m_hat = adam.m[i].array() / bc1;
    const Eigen::ArrayXd v_hat = adam.v[i].array() / bc2;
    params[i].array() -= lr * m_hat / (v_hat.sqrt() + adam.epsilon);
  }
  return total;
}

IterationTrace run(const Eigen::ArrayXd& mixture, const Eigen::MatrixXd& backbone_output,
                   std::span<const SepItModel> models, const SepItConfig& config,
                   const Eigen::MatrixXd* references) {
  if (!config.share_weights &&
      static_cast<int>(models.size()) < config.max_iter && config.max_iter > 0)
    throw ShapeMismatch("run: need one block per iteration (or share_weights)");
  if (config.share_weights && models.empty() && config.max_iter > 0)
    throw ShapeMismatch("run: share_weights needs at least one block");

  IterationTrace trace;
  auto speaker_mi = [&](const Eigen::MatrixXd& est) {
    double total = 0.0;
    for (int s = 0; s < est.cols(); ++s)
      total += binned_mi(mixture, est.col(s).array(), config.mi_bins);
    return total / static_cast<double>(est.cols());
  };
  auto record = [&](const Eigen::MatrixXd& est) {
    trace.estimates.push_back(est);
    trace.mi.push_back(speaker_mi(est));
    trace.si_sdr_mean.push_back(
        references ? mean_si_sdr_best_perm(*references, est, config.db_cap)
                   : std::numeric_limits<double>::quiet_NaN());
  };

  record(backbone_output);
  trace.stop_reason = StopReason::max_iter;
  trace.selected = 0;
  for (int j = 1; j <= config.max_iter; ++j) {
    const SepItModel& block =
        config.share_weights ? models[0] : models[static_cast<std::size_t>(j - 1)];
    const Eigen::MatrixXd next = refine(trace.estimates.back(), mixture, block);
    record(next);
    const double u = trace.mi[static_cast<std::size_t>(j)] -
                     trace.mi[static_cast<std::size_t>(j - 1)];
    if (u < 0.0) {
      // keep the previous iterate: its MI did not decrease
      trace.stop_reason = StopReason::mi_decrease;
      trace.selected = j - 1;
      return trace;
    }
    trace.selected = j;
  }
  return trace;
}

std::vector<Signal> oracle_backbone(const std::vector<Signal>& sources, double interference_db,
                                    std::uint64_t) {
  const auto c = sources.size();
  if (c == 0) throw ShapeMismatch("oracle_backbone: no sources");
  std::vector<Signal> out(c);
  for (std::size_t i = 0; i < c; ++i) {
    if (std::isinf(interference_db) && interference_db > 0) {
      out[i] = whiten(sources[i]);
      continue;
    }
    Eigen::ArrayXd leak = Eigen::ArrayXd::Zero(sources[i].samples.size());
    for (std::size_t k = 0; k < c; ++k)
      if (k != i) leak += sources[k].samples;
    const double leak_var = variance(leak);
    const double source_var = variance(sources[i].samples);
    double gain = 0.0;
    if (leak_var > 0.0)
      gain = std::pow(10.0, -interference_db / 20.0) * std::sqrt(source_var / leak_var);
    Signal mixed;
    mixed.sample_rate = sources[i].sample_rate;
    mixed.samples = sources[i].samples + gain * leak;
    out[i] = whiten(mixed);
  }
  return out;
}

void save_models(const std::filesystem::path& path, std::span<const SepItModel> models,
                 const SepItConfig& config) {
  std::vector<double> payload;
  for (const auto& m : models) {
    SepItModel copy = m;
    for (auto view : parameter_views(copy))
      payload.insert(payload.end(), view.data(), view.data() + view.size());
  }
  nlohmann::json header = {
      {"kind", "sepit_checkpoint"},
      {"version", kCodeVersion},
      {"blocks", models.size()},
      {"speakers", config.speakers},
      {"latent_channels", config.latent_channels},
      {"kernel", config.kernel},
      {"res_blocks", config.res_blocks},
      {"max_iter", config.max_iter},
      {"lr", config.lr},
      {"lr_decay", config.lr_decay},
      {"mi_bins", config.mi_bins},
      {"share_weights", config.share_weights},
  };
  write_container(path, header, payload);
}

std::vector<SepItModel> load_models(const std::filesystem::path& path, SepItConfig* config) {
  Container c = read_container(path);
  if (c.header.value("kind", "") != "sepit_checkpoint")
    throw UnsupportedFormat("not a sepit checkpoint: " + path.string());
  SepItConfig cfg;
  cfg.speakers = c.header.value("speakers", 2);
  cfg.latent_channels = c.header.value("latent_channels", 16);
  cfg.kernel = c.header.value("kernel", 4);
  cfg.res_blocks = c.header.value("res_blocks", 3);
  cfg.max_iter = c.header.value("max_iter", 5);
  cfg.lr = c.header.value("lr", 5e-4);
  cfg.lr_decay = c.header.value("lr_decay", 0.95);
  cfg.mi_bins = c.header.value("mi_bins", Eigen::Index{32});
  cfg.share_weights = c.header.value("share_weights", false);
  if (config) *config = cfg;

  const auto blocks = c.header.value("blocks", std::size_t{0});
  std::vector<SepItModel> models;
  models.reserve(blocks);
  std::size_t pos = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    SepItModel m = init_model(cfg, 0);
    for (auto view : parameter_views(m)) {
      if (pos + static_cast<std::size_t>(view.size()) > c.payload.size())
        throw CorruptHeader("checkpoint payload shorter than declared shapes");
      std::copy(c.payload.begin() + static_cast<std::ptrdiff_t>(pos),
                c.payload.begin() + static_cast<std::ptrdiff_t>(pos + view.size()),
                view.data());
      pos += static_cast<std::size_t>(view.size());
    }
    models.push_back(std::move(m));
  }
  if (pos != c.payload.size())
    throw CorruptHeader("checkpoint payload longer than declared shapes");
  return models;
}

}  // namespace scss
