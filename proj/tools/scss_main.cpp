// Command-line surface: validate-laplace, coeff-pdf, bound, mi, simulate, cache.
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "scss/bound.hpp"
#include "scss/container.hpp"
#include "scss/csv.hpp"
#include "scss/errors.hpp"
#include "scss/experiments.hpp"
#include "scss/mixture.hpp"
#include "scss/rng.hpp"
#include "scss/version.hpp"
#include "scss/wav.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;  // 0 = hardware
  std::string out_dir = ".";
  std::string format = "csv";  // csv | json
};

std::uint64_t resolve_seed(const GlobalOptions& g) {
  if (g.seed) return *g.seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "note: no --seed given; generated seed " << s
            << " (recorded in output provenance)\n";
  return s;
}

unsigned resolve_workers(const GlobalOptions& g) {
  if (g.workers > 0) return g.workers;
  if (const char* env = std::getenv("SCSS_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

fs::path resolve_out_dir(const GlobalOptions& g) {
  std::string dir = g.out_dir;
  if (dir == ".") {
    if (const char* env = std::getenv("SCSS_OUT_DIR")) dir = env;
  }
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

json provenance(const GlobalOptions& g, std::uint64_t seed, unsigned workers) {
  return json{{"version", scss::kCodeVersion},
              {"rng", scss::kRngAlgorithm},
              {"seed", seed},
              {"workers", workers},
              {"format", g.format}};
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw scss::IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

json pdf_to_json(const scss::Pdf1D& pdf) {
  return json{{"edges", std::vector<double>(pdf.edges.data(), pdf.edges.data() + pdf.edges.size())},
              {"density", std::vector<double>(pdf.density.data(), pdf.density.data() + pdf.density.size())},
              {"clipped_low", pdf.clipped_low},
              {"clipped_high", pdf.clipped_high},
              {"total_count", pdf.total_count}};
}

scss::CsvTable pdf_to_csv(const scss::Pdf1D& pdf) {
  scss::CsvTable t;
  t.columns = {"edge_lo", "edge_hi", "density"};
  for (Eigen::Index i = 0; i < pdf.bin_count(); ++i)
    t.rows.push_back({pdf.edges(i), pdf.edges(i + 1), pdf.density(i)});
  return t;
}

// ---------------------------------------------------------------------------
// validate-laplace

int cmd_validate_laplace(const GlobalOptions& g, const std::string& corpus,
                         const std::string& manifest, int synth_signals, double synth_duration,
                         double window_ms, Eigen::Index bins, double sample_rate) {
  const std::uint64_t seed = resolve_seed(g);
  const fs::path out_dir = resolve_out_dir(g);

  scss::LaplaceValidationConfig cfg;
  cfg.window_ms = window_ms;
  cfg.bins = bins;

  scss::LaplaceValidationReport report;
  json source;
  if (!corpus.empty()) {
    const scss::CorpusIndex index = scss::index_corpus(corpus, manifest.empty() ? fs::path{} : fs::path(manifest));
    report = scss::validate_laplace_corpus(index, cfg);
    source = {{"kind", "corpus"}, {"root", corpus}, {"files", index.entries.size()}};
  } else {
    report = scss::validate_laplace_synthetic(synth_signals, synth_duration, sample_rate, seed, cfg);
    source = {{"kind", "synthetic"},
              {"signals", synth_signals},
              {"duration_s", synth_duration},
              {"sample_rate", sample_rate}};
  }

  json j = {{"provenance", provenance(g, seed, 1)},
            {"source", source},
            {"window_ms", window_ms},
            {"bins", bins},
            {"silent_rel_threshold", report.silent_rel_threshold},
            {"segments_used", report.segments_used},
            {"segments_silent", report.segments_silent},
            {"laplace_scale", report.laplace_fit.scale},
            {"normal_sigma", report.normal_fit.sigma},
            {"kl_laplace_nats", report.kl_laplace_nats},
            {"kl_normal_nats", report.kl_normal_nats},
            {"laplace_fits_better", report.kl_laplace_nats < report.kl_normal_nats}};
  if (g.format == "json") j["empirical_pdf"] = pdf_to_json(report.empirical);
  write_json(out_dir / "laplace_report.json", j);

  if (g.format == "csv") {
    scss::CsvTable t;
    t.columns = {"center", "empirical", "laplace_fit", "normal_fit"};
    const Eigen::ArrayXd centers = report.empirical.centers();
    for (Eigen::Index i = 0; i < report.empirical.bin_count(); ++i)
      t.rows.push_back({centers(i), report.empirical.density(i),
                        scss::eval_laplace(centers(i), report.laplace_fit),
                        scss::eval_normal(centers(i), report.normal_fit)});
    scss::write_csv(out_dir / "laplace_pdf.csv", t);
  }

  std::cout << "segments used: " << report.segments_used
            << " (silent dropped: " << report.segments_silent << ")\n"
            << "KL(empirical, Laplace fit) = " << report.kl_laplace_nats << " nats\n"
            << "KL(empirical, normal fit)  = " << report.kl_normal_nats << " nats\n"
            << (report.kl_laplace_nats < report.kl_normal_nats
                    ? "Laplace is the better fit\n"
                    : "normal is the better fit\n");
  return 0;
}

// ---------------------------------------------------------------------------
// coeff-pdf

int cmd_coeff_pdf(const GlobalOptions& g, int speakers, std::uint64_t trials,
                  Eigen::Index bins, bool convergence) {
  const std::uint64_t seed = resolve_seed(g);
  const unsigned workers = resolve_workers(g);
  const fs::path out_dir = resolve_out_dir(g);

  const scss::Pdf1D pdf = scss::coefficient_pdf(speakers, trials, bins, seed, workers);
  json j = {{"provenance", provenance(g, seed, workers)},
            {"speakers", speakers},
            {"trials", trials},
            {"bins", bins},
            {"mean_a0", pdf.mean()},
            {"var_a0", pdf.variance()}};
  if (convergence) {
    const scss::PdfConvergence conv = scss::coefficient_pdf_convergence(speakers, trials, bins, seed, workers);
    j["max_density_change_when_doubling_trials"] = conv.max_density_change;
  }
  if (g.format == "json") j["pdf"] = pdf_to_json(pdf);
  write_json(out_dir / "coeff_pdf.json", j);
  if (g.format == "csv") scss::write_csv(out_dir / "coeff_pdf.csv", pdf_to_csv(pdf));
  std::cout << "coefficient PDF for C=" << speakers << ": mean(a0)=" << pdf.mean()
            << ", E[a0^2]=" << pdf.variance() + pdf.mean() * pdf.mean() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bound / mi

scss::GridSpec make_grids(Eigen::Index m_bins, double m_range, Eigen::Index v0_bins,
                          Eigen::Index a0_bins) {
  scss::GridSpec grid;
  grid.m_bins = m_bins;
  grid.m_min = -m_range;
  grid.m_max = m_range;
  grid.v0_bins = v0_bins;
  grid.v0_min = -m_range;
  grid.v0_max = m_range;
  grid.a0_bins = a0_bins;
  return grid;
}

json grid_to_json(const scss::GridSpec& grid) {
  return json{{"m_bins", grid.m_bins},   {"m_min", grid.m_min},   {"m_max", grid.m_max},
              {"v0_bins", grid.v0_bins}, {"v0_min", grid.v0_min}, {"v0_max", grid.v0_max},
              {"a0_bins", grid.a0_bins}};
}

int cmd_bound(const GlobalOptions& g, std::vector<int> speakers, std::uint64_t trials,
              double length_s, double window_ms, double sample_rate, const std::string& form,
              const std::string& var_reading, const std::string& units, Eigen::Index m_bins,
              double m_range, Eigen::Index v0_bins, Eigen::Index a0_bins,
              const std::string& cache_dir, bool gate) {
  const std::uint64_t seed = resolve_seed(g);
  scss::BoundConfig cfg;
  cfg.grids = make_grids(m_bins, m_range, v0_bins, a0_bins);
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.workers = resolve_workers(g);
  cfg.form = form == "literal" ? scss::MiForm::literal : scss::MiForm::standard;
  cfg.var_reading = var_reading == "per-speaker" ? scss::VarReading::per_speaker
                                                 : scss::VarReading::unit;
  cfg.length_s = length_s;
  cfg.window_ms = window_ms;
  cfg.sample_rate = sample_rate;
  cfg.refinement_gate = gate;
  cfg.cache_dir = cache_dir;

  const auto curve = scss::bound_curve(speakers, cfg);
  const fs::path out_dir = resolve_out_dir(g);

  scss::CsvTable t;
  t.columns = {"speakers", "mi_nats", "var_v0", "l_over_w", "bound_db",
               "mi_standard_nats", "mi_literal_nats", "grid_refinement_change"};
  json results = json::array();
  for (const auto& r : curve) {
    t.rows.push_back({static_cast<double>(r.speakers), r.mi_nats, r.var_v0, r.l_over_w,
                      r.sdr_bound_db, r.mi_standard_nats, r.mi_literal_nats,
                      r.grid_refinement_change});
    results.push_back({{"speakers", r.speakers},
                       {"mi_nats", r.mi_nats},
                       {"mi_bits", scss::nats_to_bits(r.mi_nats)},
                       {"var_v0", r.var_v0},
                       {"l_over_w", r.l_over_w},
                       {"bound_db", r.sdr_bound_db},
                       {"mi_standard_nats", r.mi_standard_nats},
                       {"mi_literal_nats", r.mi_literal_nats},
                       {"grid_refinement_change", r.grid_refinement_change}});
    const double mi_shown = units == "bits" ? scss::nats_to_bits(r.mi_nats) : r.mi_nats;
    std::cout << "C=" << r.speakers << "  I(m_r, v0_r) = " << mi_shown << " " << units
              << "  bound = " << r.sdr_bound_db << " dB\n";
  }
  json j = {{"provenance", provenance(g, seed, cfg.workers)},
            {"config",
             {{"trials", trials},
              {"length_s", length_s},
              {"window_ms", window_ms},
              {"sample_rate", sample_rate},
              {"mi_form", form},
              {"var_reading", var_reading},
              {"units", units},
              {"grids", grid_to_json(cfg.grids)},
              {"cache_dir", cache_dir},
              {"refinement_gate", gate}}},
            {"results", results}};
  write_json(out_dir / "bound_curve.json", j);
  if (g.format == "csv") scss::write_csv(out_dir / "bound_curve.csv", t);
  return 0;
}

int cmd_mi(const GlobalOptions& g, int speakers, std::uint64_t trials, const std::string& units,
           Eigen::Index m_bins, double m_range, Eigen::Index v0_bins, Eigen::Index a0_bins) {
  const std::uint64_t seed = resolve_seed(g);
  const unsigned workers = resolve_workers(g);
  const scss::GridSpec grid = make_grids(m_bins, m_range, v0_bins, a0_bins);
  const scss::MiResult mi = scss::mutual_information_segment(
      speakers, trials, grid, scss::derive_seed(seed, static_cast<std::uint64_t>(speakers)),
      workers);

  auto show = [&](double nats) { return units == "bits" ? scss::nats_to_bits(nats) : nats; };
  std::cout << "C=" << speakers << "  standard form: " << show(mi.standard_nats) << " " << units
            << "\n           literal form: " << show(mi.literal_nats) << " " << units
            << "\n           h(m) = " << show(mi.h_m_nats) << " " << units
            << "\n           mass outside grid = " << mi.mass_outside_grid << "\n";

  const fs::path out_dir = resolve_out_dir(g);
  write_json(out_dir / "mi.json",
             json{{"provenance", provenance(g, seed, workers)},
                  {"speakers", speakers},
                  {"trials", trials},
                  {"grids", grid_to_json(grid)},
                  {"units", units},
                  {"standard_nats", mi.standard_nats},
                  {"literal_nats", mi.literal_nats},
                  {"standard_bits", scss::nats_to_bits(mi.standard_nats)},
                  {"literal_bits", scss::nats_to_bits(mi.literal_nats)},
                  {"h_m_nats", mi.h_m_nats},
                  {"mass_outside_grid", mi.mass_outside_grid}});
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const GlobalOptions& g, int speakers, int latent, int kernel, int max_iter,
                 int train_mixtures, int test_mixtures, int steps_first, int steps_later,
                 int batch, double backbone_sir_db, double train_duration, double test_duration,
                 double sample_rate, Eigen::Index mi_bins) {
  const std::uint64_t seed = resolve_seed(g);
  scss::SimulateConfig cfg;
  cfg.model.speakers = speakers;
  cfg.model.latent_channels = latent;
  cfg.model.kernel = kernel;
  cfg.model.max_iter = max_iter;
  cfg.model.mi_bins = mi_bins;
  cfg.train_mixtures = train_mixtures;
  cfg.test_mixtures = test_mixtures;
  cfg.train_duration_s = train_duration;
  cfg.test_duration_s = test_duration;
  cfg.sample_rate = sample_rate;
  cfg.backbone_sir_db = backbone_sir_db;
  cfg.steps_first_block = steps_first;
  cfg.steps_later_blocks = steps_later;
  cfg.batch_size = batch;
  cfg.seed = seed;

  const scss::SimulateReport report = scss::simulate(cfg);
  const fs::path out_dir = resolve_out_dir(g);

  json iters = json::array();
  for (std::size_t j = 0; j < report.mean_si_sdr_per_iter.size(); ++j)
    iters.push_back({{"iteration", j},
                     {"mean_si_sdr_db", report.mean_si_sdr_per_iter[j]},
                     {"mean_si_sdri_db", report.mean_si_sdr_per_iter[j] - report.mixture_mean_si_sdr},
                     {"mean_mi_nats", report.mean_mi_per_iter[j]}});

  json traces = json::array();
  for (const auto& trace : report.traces) {
    traces.push_back({{"mi", trace.mi},
                      {"si_sdr_mean", trace.si_sdr_mean},
                      {"stop_reason", trace.stop_reason == scss::StopReason::mi_decrease
                                          ? "mi_decrease"
                                          : "max_iter"},
                      {"selected", trace.selected}});
  }

  json j = {{"provenance", provenance(g, seed, 1)},
            {"config",
             {{"speakers", speakers},
              {"latent_channels", latent},
              {"kernel", kernel},
              {"max_iter", max_iter},
              {"train_mixtures", train_mixtures},
              {"test_mixtures", test_mixtures},
              {"steps_first_block", steps_first},
              {"steps_later_blocks", steps_later},
              {"batch_size", batch},
              {"backbone_sir_db", backbone_sir_db},
              {"train_duration_s", train_duration},
              {"test_duration_s", test_duration},
              {"sample_rate", sample_rate},
              {"mi_bins", mi_bins},
              {"lr", cfg.model.lr},
              {"lr_decay", cfg.model.lr_decay},
              {"source_model", "ar-laplace"}}},
            {"per_iteration", iters},
            {"mixture_mean_si_sdr_db", report.mixture_mean_si_sdr},
            {"backbone_mean_si_sdr_db", report.backbone_mean_si_sdr},
            {"mean_si_sdr_selected_db", report.mean_si_sdr_selected},
            {"mean_si_sdr_final_db", report.mean_si_sdr_final},
            {"mean_si_sdr_best_db", report.mean_si_sdr_best},
            {"traces", traces}};
  write_json(out_dir / "simulate_report.json", j);

  if (g.format == "csv") {
    scss::CsvTable curves;
    curves.columns = {"iteration", "mean_si_sdr_db", "mean_si_sdri_db", "mean_mi_nats"};
    for (std::size_t i = 0; i < report.mean_si_sdr_per_iter.size(); ++i)
      curves.rows.push_back({static_cast<double>(i), report.mean_si_sdr_per_iter[i],
                             report.mean_si_sdr_per_iter[i] - report.mixture_mean_si_sdr,
                             report.mean_mi_per_iter[i]});
    scss::write_csv(out_dir / "simulate_curves.csv", curves);

    scss::CsvTable losses;
    losses.columns = {"block", "step", "loss"};
    for (std::size_t b = 0; b < report.loss_curves.size(); ++b)
      for (std::size_t s = 0; s < report.loss_curves[b].size(); ++s)
        losses.rows.push_back({static_cast<double>(b), static_cast<double>(s),
                               report.loss_curves[b][s]});
    scss::write_csv(out_dir / "simulate_losses.csv", losses);
  }

  scss::save_models(out_dir / "sepit_checkpoint.scssbnd", report.models, cfg.model);

  std::cout << "backbone mean SI-SDR: " << report.backbone_mean_si_sdr << " dB\n"
            << "final mean SI-SDR:    " << report.mean_si_sdr_final << " dB\n"
            << "with stopping (SC):   " << report.mean_si_sdr_selected << " dB\n"
            << "best-iteration oracle:" << report.mean_si_sdr_best << " dB\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cache

int cmd_cache(const std::string& action, const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) {
    if (action == "purge") return 0;
    throw scss::IoError("cache dir does not exist: " + dir);
  }
  int bad = 0;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".scssbnd") continue;
    if (action == "list") {
      const scss::Container c = scss::read_container(entry.path());
      std::cout << entry.path().filename().string() << "  kind=" << c.header.value("kind", "?")
                << " speakers=" << c.header.value("speakers", 0)
                << " trials=" << c.header.value("trials", std::uint64_t{0})
                << " doubles=" << c.payload.size() << "\n";
    } else if (action == "verify") {
      std::string msg;
      if (scss::verify_container(entry.path(), &msg)) {
        std::cout << entry.path().filename().string() << "  OK\n";
      } else {
        std::cout << entry.path().filename().string() << "  CORRUPT (" << msg << ")\n";
        ++bad;
      }
    } else if (action == "purge") {
      fs::remove(entry.path());
    }
  }
  if (action == "purge") std::cout << "cache purged\n";
  return bad == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-channel separation bound and SepIt desk-scale experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions g;
  app.add_option("--seed", g.seed, "master seed (generated and recorded when absent)");
  app.add_option("--workers", g.workers, "worker threads (0 = hardware, env SCSS_WORKERS)");
  app.add_option("--out-dir", g.out_dir, "output directory (env SCSS_OUT_DIR)");
  app.add_option("--format", g.format, "output format: csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  // validate-laplace
  std::string corpus, manifest;
  int synth_signals = 64;
  double synth_duration = 4.0, window_ms = 20.0, sample_rate = 8000.0;
  Eigen::Index fig_bins = 201;
  auto* vl = app.add_subcommand("validate-laplace",
                                "compare short-segment amplitude density against Laplace/normal fits");
  vl->add_option("--corpus", corpus, "directory of PCM16 WAV files");
  vl->add_option("--manifest", manifest, "JSON path->speaker override");
  vl->add_option("--signals", synth_signals, "synthetic signal count (no corpus)");
  vl->add_option("--duration", synth_duration, "synthetic signal seconds");
  vl->add_option("--window-ms", window_ms, "segment window (ms)");
  vl->add_option("--bins", fig_bins, "histogram bins");
  vl->add_option("--sample-rate", sample_rate, "synthetic sample rate");

  // coeff-pdf
  int cp_speakers = 2;
  std::uint64_t cp_trials = 1'000'000;
  Eigen::Index cp_bins = 64;
  bool cp_convergence = false;
  auto* cp = app.add_subcommand("coeff-pdf", "Monte-Carlo density of the first mixing coefficient");
  cp->add_option("--speakers", cp_speakers, "C");
  cp->add_option("--trials", cp_trials, "Monte-Carlo trials M");
  cp->add_option("--bins", cp_bins, "histogram bins");
  cp->add_flag("--convergence", cp_convergence, "report max density change when doubling M");

  // bound
  std::vector<int> bd_speakers = {2, 3, 5, 10};
  std::uint64_t bd_trials = 1'000'000;
  double bd_length = 4.0, bd_window_ms = 20.0, bd_rate = 8000.0, bd_range = 8.0;
  std::string bd_form = "standard", bd_var = "unit", bd_units = "nats", bd_cache;
  Eigen::Index bd_m_bins = 512, bd_v_bins = 256, bd_a_bins = 64;
  bool bd_gate = false;
  auto* bd = app.add_subcommand("bound", "SDR upper-bound curve over speaker counts");
  bd->add_option("--speakers", bd_speakers, "speaker counts");
  bd->add_option("--trials", bd_trials, "Monte-Carlo trials M");
  bd->add_option("--length", bd_length, "signal length L (seconds)");
  bd->add_option("--window-ms", bd_window_ms, "segment window w (ms)");
  bd->add_option("--sample-rate", bd_rate, "sample rate (Hz)");
  bd->add_option("--mi-form", bd_form, "standard | literal")
      ->check(CLI::IsMember({"standard", "literal"}));
  bd->add_option("--var-reading", bd_var, "unit | per-speaker")
      ->check(CLI::IsMember({"unit", "per-speaker"}));
  bd->add_option("--units", bd_units, "nats | bits (display only)")
      ->check(CLI::IsMember({"nats", "bits"}));
  bd->add_option("--m-bins", bd_m_bins, "mixture grid bins");
  bd->add_option("--m-range", bd_range, "mixture grid half-range");
  bd->add_option("--v0-bins", bd_v_bins, "source grid bins");
  bd->add_option("--a0-bins", bd_a_bins, "coefficient grid bins");
  bd->add_option("--cache-dir", bd_cache, "persist/reuse tables here");
  bd->add_flag("--refinement-gate", bd_gate, "also evaluate doubled grids");

  // mi
  int mi_speakers = 2;
  std::uint64_t mi_trials = 1'000'000;
  std::string mi_units = "nats";
  Eigen::Index mi_m_bins = 512, mi_v_bins = 256, mi_a_bins = 64;
  double mi_range = 8.0;
  auto* mi = app.add_subcommand("mi", "mutual information between mixture and source segments");
  mi->add_option("--speakers", mi_speakers, "C");
  mi->add_option("--trials", mi_trials, "Monte-Carlo trials M");
  mi->add_option("--units", mi_units, "nats | bits")->check(CLI::IsMember({"nats", "bits"}));
  mi->add_option("--m-bins", mi_m_bins, "mixture grid bins");
  mi->add_option("--m-range", mi_range, "mixture grid half-range");
  mi->add_option("--v0-bins", mi_v_bins, "source grid bins");
  mi->add_option("--a0-bins", mi_a_bins, "coefficient grid bins");

  // simulate
  int sm_speakers = 2, sm_latent = 16, sm_kernel = 4, sm_iter = 5;
  int sm_train = 12, sm_test = 50, sm_steps1 = 1200, sm_steps2 = 250, sm_batch = 2;
  double sm_sir = 10.0, sm_train_dur = 1.0, sm_test_dur = 1.5, sm_rate = 8000.0;
  Eigen::Index sm_mi_bins = 32;
  auto* sm = app.add_subcommand("simulate", "train SepIt blocks on synthetic mixtures and evaluate");
  sm->add_option("--speakers", sm_speakers, "C");
  sm->add_option("--latent", sm_latent, "latent channels N");
  sm->add_option("--kernel", sm_kernel, "encoder kernel K");
  sm->add_option("--max-iter", sm_iter, "refinement iterations");
  sm->add_option("--train-mixtures", sm_train, "training mixtures");
  sm->add_option("--test-mixtures", sm_test, "test mixtures");
  sm->add_option("--steps-first", sm_steps1, "Adam steps for block 1");
  sm->add_option("--steps-later", sm_steps2, "Adam steps for later blocks");
  sm->add_option("--batch", sm_batch, "batch size");
  sm->add_option("--backbone-sir", sm_sir, "oracle backbone SIR (dB)");
  sm->add_option("--train-duration", sm_train_dur, "training mixture seconds");
  sm->add_option("--test-duration", sm_test_dur, "test mixture seconds");
  sm->add_option("--sample-rate", sm_rate, "sample rate (Hz)");
  sm->add_option("--mi-bins", sm_mi_bins, "stopping-criterion histogram bins");

  // cache
  std::string cache_action = "list", cache_dir_opt = "cache";
  auto* ch = app.add_subcommand("cache", "list / verify / purge cached tables");
  ch->add_option("action", cache_action, "list | verify | purge")
      ->check(CLI::IsMember({"list", "verify", "purge"}));
  ch->add_option("--cache-dir", cache_dir_opt, "cache directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (vl->parsed())
      return cmd_validate_laplace(g, corpus, manifest, synth_signals, synth_duration, window_ms,
                                  fig_bins, sample_rate);
    if (cp->parsed()) return cmd_coeff_pdf(g, cp_speakers, cp_trials, cp_bins, cp_convergence);
    if (bd->parsed())
      return cmd_bound(g, bd_speakers, bd_trials, bd_length, bd_window_ms, bd_rate, bd_form,
                       bd_var, bd_units, bd_m_bins, bd_range, bd_v_bins, bd_a_bins, bd_cache,
                       bd_gate);
    if (mi->parsed())
      return cmd_mi(g, mi_speakers, mi_trials, mi_units, mi_m_bins, mi_range, mi_v_bins,
                    mi_a_bins);
    if (sm->parsed())
      return cmd_simulate(g, sm_speakers, sm_latent, sm_kernel, sm_iter, sm_train, sm_test,
                          sm_steps1, sm_steps2, sm_batch, sm_sir, sm_train_dur, sm_test_dur,
                          sm_rate, sm_mi_bins);
    if (ch->parsed()) return cmd_cache(cache_action, cache_dir_opt);
  } catch (const scss::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 3;
  } catch (const scss::CacheCorrupt& e) {
    std::cerr << "cache error: " << e.what() << "\n";
    return 3;
  } catch (const scss::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
