#include "scss/bound.hpp"

#include <cmath>
#include <filesystem>
#include <thread>

#include "scss/container.hpp"
#include "scss/rng.hpp"
#include "scss/version.hpp"

namespace scss {

namespace {

constexpr std::uint64_t kTagMixture = 0x6d697874;       // mixture sampling
constexpr std::uint64_t kTagCoefficients = 0x636f6566;  // a0 sampling
constexpr std::uint64_t kTagReduced = 0x72656475;       // reduced-mixture sampling

void draw_unit_coefficients(RandomStream& rng, int speakers, Eigen::ArrayXd& a) {
  double ss = 0.0;
  for (int i = 0; i < speakers; ++i) {
    const double u = rng.uniform_open01();
    a(i) = u;
    ss += u * u;
  }
  a /= std::sqrt(ss);
}

Histogram1D mc_mixture_histogram(int speakers, std::uint64_t trials, Eigen::Index bins,
                                 double lo, double hi, std::uint64_t seed, unsigned workers) {
  auto per_chunk = [&](std::uint64_t, RandomStream& rng, std::uint64_t n) {
    Histogram1D h(bins, lo, hi);
    Eigen::ArrayXd a(speakers);
    for (std::uint64_t j = 0; j < n; ++j) {
      draw_unit_coefficients(rng, speakers, a);
      double m = 0.0;
      for (int i = 0; i < speakers; ++i) m += a(i) * rng.laplace(kUnitLaplaceScale);
      h.add(m);
    }
    return h;
  };
  auto merge = [](Histogram1D& acc, Histogram1D&& part) { acc.merge(part); };
  return chunked_mc<Histogram1D>(trials, kMcChunk, workers, seed, per_chunk, merge);
}

/// Deterministic parallel loop: fixed block partition, ordered merge.
template <typename BlockResult, typename BlockFn, typename MergeFn>
void blocked_parallel(Eigen::Index count, unsigned workers, BlockFn block_fn, MergeFn merge) {
  constexpr Eigen::Index kBlocks = 64;
  const Eigen::Index n_blocks = std::min<Eigen::Index>(kBlocks, std::max<Eigen::Index>(count, 1));
  std::vector<BlockResult> results(static_cast<std::size_t>(n_blocks));
  std::atomic<Eigen::Index> next{0};
  auto work = [&]() {
    for (;;) {
      const Eigen::Index b = next.fetch_add(1);
      if (b >= n_blocks) return;
      const Eigen::Index lo = count * b / n_blocks;
      const Eigen::Index hi = count * (b + 1) / n_blocks;
      results[static_cast<std::size_t>(b)] = block_fn(lo, hi);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& r : results) merge(r);
}

}  // namespace

Pdf1D mixture_pdf(int speakers, std::uint64_t trials, const GridSpec& grid,
                  std::uint64_t seed, unsigned workers) {
  if (speakers < 1) throw UnsupportedC("mixture_pdf: C must be >= 1");
  Histogram1D h = mc_mixture_histogram(speakers, trials, grid.m_bins, grid.m_min, grid.m_max,
                                       derive_seed(seed, kTagMixture), workers);
  return h.to_pdf();
}

ConditionalPdfTable conditional_pdf_table(int speakers, std::uint64_t trials,
                                          const GridSpec& grid, std::uint64_t seed,
                                          unsigned workers) {
  if (speakers < 2) throw UnsupportedC("conditional_pdf_table: C must be >= 2");

  ConditionalPdfTable table;
  table.speakers = speakers;

  // f(a0) from the coefficient Monte-Carlo
  auto per_chunk = [&](std::uint64_t, RandomStream& rng, std::uint64_t n) {
    Histogram1D h(grid.a0_bins, 0.0, 1.0);
    Eigen::ArrayXd a(speakers);
    for (std::uint64_t j = 0; j < n; ++j) {
      draw_unit_coefficients(rng, speakers, a);
      h.add(a(0));
    }
    return h;
  };
  auto merge = [](Histogram1D& acc, Histogram1D&& part) { acc.merge(part); };
  const Pdf1D a0_pdf = chunked_mc<Histogram1D>(trials, kMcChunk, workers,
                                               derive_seed(seed, kTagCoefficients),
                                               per_chunk, merge)
                           .to_pdf();
  table.a0_centers = a0_pdf.centers();
  table.a0_density = a0_pdf.density;
  table.a0_weights = a0_pdf.density * a0_pdf.widths();
  table.a0_weights /= table.a0_weights.sum();

  // unit-energy reduced mixture of C-1 speakers; exact Laplace when C-1 == 1
  Pdf1D reduced;
  if (speakers - 1 == 1) {
    Pdf1D g;
    g.edges = Eigen::ArrayXd::LinSpaced(grid.m_bins + 1, grid.m_min, grid.m_max);
    g.density.resize(grid.m_bins);
    const Eigen::ArrayXd c = g.centers();
    const LaplaceParams unit{kUnitLaplaceScale, 0.0};
    for (Eigen::Index i = 0; i < grid.m_bins; ++i) g.density(i) = eval_laplace(c(i), unit);
    g.density /= g.integral();
    reduced = std::move(g);
  } else {
    reduced = mc_mixture_histogram(speakers - 1, trials, grid.m_bins, grid.m_min, grid.m_max,
                                   derive_seed(seed, kTagReduced), workers)
                  .to_pdf();
  }

  const Eigen::ArrayXd centers = reduced.centers();
  const Eigen::Index k = grid.m_bins;
  table.slices.resize(static_cast<std::size_t>(grid.a0_bins));
  for (Eigen::Index s_idx = 0; s_idx < grid.a0_bins; ++s_idx) {
    const double a0 = table.a0_centers(s_idx);
    const double s = std::sqrt(std::max(1.0 - a0 * a0, 1e-300));
    Pdf1D slice;
    slice.edges = reduced.edges;
    slice.density.resize(k);
    for (Eigen::Index i = 0; i < k; ++i)
      slice.density(i) = reduced.interpolate(centers(i) / s) / s;
    const double total = slice.integral();
    if (total > 0.0) slice.density /= total;
    table.slices[static_cast<std::size_t>(s_idx)] = std::move(slice);
  }
  return table;
}

namespace {

struct MiBlockAcc {
  KahanSum h_std;
  KahanSum lit;
  KahanSum leak;
};

struct BoundTables {
  Pdf1D m_pdf;
  ConditionalPdfTable table;
};

BoundTables compute_tables(int speakers, std::uint64_t trials, const GridSpec& grid,
                           std::uint64_t seed, unsigned workers) {
  BoundTables t;
  t.m_pdf = mixture_pdf(speakers, trials, grid, seed, workers);
  t.table = conditional_pdf_table(speakers, trials, grid, seed, workers);
  return t;
}

MiResult mi_from_tables(const BoundTables& tables, const GridSpec& grid, unsigned workers) {
  const Pdf1D& m_pdf = tables.m_pdf;
  const ConditionalPdfTable& table = tables.table;

  MiResult result;
  result.h_m_nats = entropy(m_pdf);

  const double clip_fraction =
      static_cast<double>(m_pdf.clipped_low + m_pdf.clipped_high) /
      static_cast<double>(std::max<std::uint64_t>(m_pdf.total_count, 1));

  const Eigen::Index mk = grid.m_bins;
  const double m_step = (grid.m_max - grid.m_min) / static_cast<double>(mk);

  Eigen::ArrayXd v_centers(grid.v0_bins);
  Eigen::ArrayXd v_weights(grid.v0_bins);
  const double v_step = (grid.v0_max - grid.v0_min) / static_cast<double>(grid.v0_bins);
  const LaplaceParams unit{kUnitLaplaceScale, 0.0};
  for (Eigen::Index j = 0; j < grid.v0_bins; ++j) {
    v_centers(j) = grid.v0_min + (static_cast<double>(j) + 0.5) * v_step;
    v_weights(j) = eval_laplace(v_centers(j), unit) * v_step;
  }
  v_weights /= v_weights.sum();

  Eigen::ArrayXd log_a0_density(grid.a0_bins);
  for (Eigen::Index s = 0; s < grid.a0_bins; ++s)
    log_a0_density(s) = std::log(std::max(table.a0_density(s), 1e-300));

  MiBlockAcc total;
  auto block_fn = [&](Eigen::Index j_lo, Eigen::Index j_hi) {
    MiBlockAcc acc;
    Eigen::ArrayXd f_cond(mk);
    for (Eigen::Index j = j_lo; j < j_hi; ++j) {
      const double v0 = v_centers(j);
      const double wv = v_weights(j);
      f_cond.setZero();
      for (Eigen::Index s = 0; s < grid.a0_bins; ++s) {
        const double wa = table.a0_weights(s);
        if (wa <= 0.0) continue;
        const Eigen::ArrayXd& slice = table.slices[static_cast<std::size_t>(s)].density;
        // slice knots sit on the m-grid centers; evaluating at (m_i - a0*v0)
        // is a constant fractional shift in knot coordinates
        const double off = table.a0_centers(s) * v0 / m_step;
        KahanSum lit_term;
        for (Eigen::Index i = 0; i < mk; ++i) {
          const double p = static_cast<double>(i) - off;
          if (p < 0.0 || p > static_cast<double>(mk - 1)) continue;
          const auto i0 = static_cast<Eigen::Index>(p);
          const double frac = p - static_cast<double>(i0);
          const double sv = (i0 + 1 < mk)
                                ? slice(i0) + frac * (slice(i0 + 1) - slice(i0))
                                : slice(i0);
          if (sv > 0.0) {
            f_cond(i) += wa * sv;
            lit_term.add(sv * (std::log(sv) + log_a0_density(s)));
          }
        }
        acc.lit.add(wa * wv * lit_term.value() * m_step);
      }
      KahanSum ent;
      double mass = 0.0;
      for (Eigen::Index i = 0; i < mk; ++i) {
        const double p = f_cond(i);
        if (p > 0.0) {
          ent.add(-p * std::log(p));
          mass += p;
        }
      }
      acc.h_std.add(wv * ent.value() * m_step);
      acc.leak.add(wv * std::max(0.0, 1.0 - mass * m_step));
    }
    return acc;
  };
  blocked_parallel<MiBlockAcc>(grid.v0_bins, workers, block_fn, [&](MiBlockAcc& part) {
    total.h_std.add(part.h_std.value());
    total.lit.add(part.lit.value());
    total.leak.add(part.leak.value());
  });

  result.mass_outside_grid = clip_fraction + total.leak.value();
  if (result.mass_outside_grid > 0.005)
    throw GridUnderflow("more than 0.5% of probability mass outside the m grid (" +
                        std::to_string(result.mass_outside_grid * 100.0) + "%)");

  result.standard_nats = result.h_m_nats - total.h_std.value();
  result.literal_nats = result.h_m_nats + total.lit.value();
  return result;
}

}  // namespace

MiResult mutual_information_segment(int speakers, std::uint64_t trials, const GridSpec& grid,
                                    std::uint64_t seed, unsigned workers) {
  return mi_from_tables(compute_tables(speakers, trials, grid, seed, workers), grid, workers);
}

double sdr_bound_formula_db(double l_over_w, double var_v0, double mi_nats) {
  return 10.0 * std::log10(l_over_w * var_v0 * mi_nats);
}

BoundResult sdr_upper_bound(int speakers, double length_s, double window_s,
                            double sample_rate, double mi_nats, double var_v0) {
  if (!(window_s > 0.0) || length_s < window_s)
    throw WindowTooLarge("sdr_upper_bound requires L_s >= w_s > 0");
  if (mi_nats < 0.0) throw Error("sdr_upper_bound: negative mutual information");
  BoundResult r;
  r.speakers = speakers;
  r.mi_nats = mi_nats;
  r.var_v0 = var_v0;
  const auto l_samples = static_cast<std::int64_t>(std::llround(length_s * sample_rate));
  const auto w_samples = static_cast<std::int64_t>(std::llround(window_s * sample_rate));
  r.l_over_w = static_cast<double>(l_samples / std::max<std::int64_t>(w_samples, 1));
  r.sdr_bound_db = sdr_bound_formula_db(r.l_over_w, var_v0, mi_nats);
  r.length_s = length_s;
  r.window_ms = window_s * 1e3;
  r.sample_rate = sample_rate;
  return r;
}

double var_v0_value(VarReading reading, int speakers) {
  return reading == VarReading::unit ? 1.0 : 1.0 / static_cast<double>(speakers);
}

namespace {

nlohmann::json grid_json(const GridSpec& g) {
  return {{"m_bins", g.m_bins},   {"m_min", g.m_min},   {"m_max", g.m_max},
          {"v0_bins", g.v0_bins}, {"v0_min", g.v0_min}, {"v0_max", g.v0_max},
          {"a0_bins", g.a0_bins}};
}

std::string tables_cache_name(int speakers, std::uint64_t trials, std::uint64_t seed,
                              const GridSpec& g) {
  char buf[176];
  std::snprintf(buf, sizeof buf, "tables-c%d-m%llu-s%llu-g%lldx%lldx%lld-%s.scssbnd",
                speakers, static_cast<unsigned long long>(trials),
                static_cast<unsigned long long>(seed),
                static_cast<long long>(g.m_bins), static_cast<long long>(g.v0_bins),
                static_cast<long long>(g.a0_bins), kCodeVersion);
  return buf;
}

std::vector<double> serialize_tables(const BoundTables& t, const GridSpec& g) {
  std::vector<double> payload;
  payload.reserve(static_cast<std::size_t>(g.m_bins * (g.a0_bins + 1) + 3 * g.a0_bins + 3));
  auto push = [&](const Eigen::ArrayXd& arr) {
    payload.insert(payload.end(), arr.data(), arr.data() + arr.size());
  };
  push(t.m_pdf.density);
  payload.push_back(static_cast<double>(t.m_pdf.clipped_low));
  payload.push_back(static_cast<double>(t.m_pdf.clipped_high));
  payload.push_back(static_cast<double>(t.m_pdf.total_count));
  push(t.table.a0_centers);
  push(t.table.a0_weights);
  push(t.table.a0_density);
  for (const auto& slice : t.table.slices) push(slice.density);
  return payload;
}

BoundTables deserialize_tables(const std::vector<double>& payload, int speakers,
                               const GridSpec& g) {
  const auto need = static_cast<std::size_t>(g.m_bins * (g.a0_bins + 1) + 3 * g.a0_bins + 3);
  if (payload.size() != need) throw CacheCorrupt("cached table payload has the wrong size");
  BoundTables t;
  std::size_t pos = 0;
  auto take = [&](Eigen::Index n) {
    Eigen::ArrayXd arr(n);
    std::copy(payload.begin() + static_cast<std::ptrdiff_t>(pos),
              payload.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(n)),
              arr.data());
    pos += static_cast<std::size_t>(n);
    return arr;
  };
  t.m_pdf.edges = Eigen::ArrayXd::LinSpaced(g.m_bins + 1, g.m_min, g.m_max);
  t.m_pdf.density = take(g.m_bins);
  t.m_pdf.clipped_low = static_cast<std::uint64_t>(payload[pos++]);
  t.m_pdf.clipped_high = static_cast<std::uint64_t>(payload[pos++]);
  t.m_pdf.total_count = static_cast<std::uint64_t>(payload[pos++]);
  t.table.speakers = speakers;
  t.table.a0_centers = take(g.a0_bins);
  t.table.a0_weights = take(g.a0_bins);
  t.table.a0_density = take(g.a0_bins);
  t.table.slices.resize(static_cast<std::size_t>(g.a0_bins));
  for (auto& slice : t.table.slices) {
    slice.edges = Eigen::ArrayXd::LinSpaced(g.m_bins + 1, g.m_min, g.m_max);
    slice.density = take(g.m_bins);
  }
  return t;
}

/// Computes (or loads) the per-C tables, persisting them when a cache
/// directory is configured.
BoundTables tables_for(int speakers, std::uint64_t trials, const GridSpec& grid,
                       std::uint64_t master_seed, unsigned workers,
                       const std::string& cache_dir) {
  const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(speakers));
  if (cache_dir.empty())
    return compute_tables(speakers, trials, grid, seed, workers);

  const std::filesystem::path path =
      std::filesystem::path(cache_dir) / tables_cache_name(speakers, trials, master_seed, grid);
  if (std::filesystem::exists(path)) {
    Container c = read_container(path);
    return deserialize_tables(c.payload, speakers, grid);
  }
  BoundTables t = compute_tables(speakers, trials, grid, seed, workers);
  std::filesystem::create_directories(path.parent_path());
  nlohmann::json header = {{"kind", "bound_tables"}, {"version", kCodeVersion},
                           {"speakers", speakers},   {"trials", trials},
                           {"seed", master_seed},    {"grids", grid_json(grid)},
                           {"rng", kRngAlgorithm}};
  write_container(path, header, serialize_tables(t, grid));
  return t;
}

}  // namespace

std::vector<BoundResult> bound_curve(const std::vector<int>& speaker_counts,
                                     const BoundConfig& config) {
  std::vector<BoundResult> curve;
  curve.reserve(speaker_counts.size());
  for (int c : speaker_counts) {
    const BoundTables tables =
        tables_for(c, config.trials, config.grids, config.seed, config.workers, config.cache_dir);
    const MiResult mi = mi_from_tables(tables, config.grids, config.workers);
    BoundResult r = sdr_upper_bound(c, config.length_s, config.window_ms * 1e-3,
                                    config.sample_rate, mi.value(config.form),
                                    var_v0_value(config.var_reading, c));
    r.trials = config.trials;
    r.seed = config.seed;
    r.grids = config.grids;
    r.form = config.form;
    r.var_reading = config.var_reading;
    r.mi_standard_nats = mi.standard_nats;
    r.mi_literal_nats = mi.literal_nats;
    if (config.refinement_gate) {
      const GridSpec fine = config.grids.doubled();
      const BoundTables tables2 =
          tables_for(c, config.trials, fine, config.seed, config.workers, config.cache_dir);
      const MiResult mi2 = mi_from_tables(tables2, fine, config.workers);
      r.grid_refinement_change = std::abs(mi2.value(config.form) - mi.value(config.form)) /
                                 std::max(mi.value(config.form), 1e-300);
    }
    curve.push_back(std::move(r));
  }
  return curve;
}

namespace {

struct AxisBinning {
  double lo = 0.0;
  double inv_width = 1.0;
  Eigen::Index bins = 1;

  Eigen::Index index(double x) const {
    if (x < lo) return 0;
    auto i = static_cast<Eigen::Index>((x - lo) * inv_width);
    return std::min(i, bins - 1);
  }
};

AxisBinning make_axis(const Eigen::ArrayXd& x, Eigen::Index bins) {
  const double mu = x.mean();
  double sd = std::sqrt((x - mu).square().sum() / static_cast<double>(x.size()));
  if (!(sd > 0.0)) sd = 0.125;  // constant signal: a single occupied bin
  AxisBinning a;
  a.lo = mu - 4.0 * sd;
  a.bins = bins;
  a.inv_width = static_cast<double>(bins) / (8.0 * sd);
  return a;
}

double entropy_of_counts(const std::vector<std::uint64_t>& counts, double total) {
  KahanSum h;
  for (std::uint64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h.add(-p * std::log(p));
  }
  return h.value();
}

}  // namespace

double binned_mi(const Eigen::ArrayXd& x, const Eigen::ArrayXd& y, Eigen::Index bins) {
  if (x.size() != y.size()) throw LengthMismatch("binned_mi: lengths differ");
  if (bins < 2) throw DegenerateSamples("binned_mi: need at least 2 bins");
  if (x.size() < 10 * bins * bins)
    throw DegenerateSamples("binned_mi: need at least 10*bins^2 samples");

  const AxisBinning ax = make_axis(x, bins);
  const AxisBinning ay = make_axis(y, bins);
  std::vector<std::uint64_t> joint(static_cast<std::size_t>(bins * bins), 0);
  for (Eigen::Index t = 0; t < x.size(); ++t)
    ++joint[static_cast<std::size_t>(ax.index(x(t)) * bins + ay.index(y(t)))];

  std::vector<std::uint64_t> mx(static_cast<std::size_t>(bins), 0);
  std::vector<std::uint64_t> my(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index i = 0; i < bins; ++i)
    for (Eigen::Index j = 0; j < bins; ++j) {
      const std::uint64_t c = joint[static_cast<std::size_t>(i * bins + j)];
      mx[static_cast<std::size_t>(i)] += c;
      my[static_cast<std::size_t>(j)] += c;
    }
  const auto total = static_cast<double>(x.size());
  return entropy_of_counts(mx, total) + entropy_of_counts(my, total) -
         entropy_of_counts(joint, total);
}

double binned_mi(const Signal& x, const Signal& y, Eigen::Index bins) {
  return binned_mi(x.samples, y.samples, bins);
}

double binned_entropy(const Eigen::ArrayXd& x, Eigen::Index bins) {
  if (bins < 2) throw DegenerateSamples("binned_entropy: need at least 2 bins");
  const AxisBinning ax = make_axis(x, bins);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(bins), 0);
  for (Eigen::Index t = 0; t < x.size(); ++t)
    ++counts[static_cast<std::size_t>(ax.index(x(t)))];
  return entropy_of_counts(counts, static_cast<double>(x.size()));
}

}  // namespace scss
