// rope: command-line front end.
//
//   rope simulate {rossler|synthetic|antiphase}  generate signals with ground truth
//   rope estimate                                phase of every sample (batch or stdin stream)
//   rope compare                                 ROPE / PCA-T / PCA-H against annotated delimiters
//   rope validate                                pseudo-periodicity tolerances of an annotation
//   rope tether                                  tethered phases of two signals and their difference

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "rope/rope.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rope::cli {
namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::vector<std::string> argv;
};

// Estimator flags shared by estimate, compare and tether.
struct RopeFlags {
  double tau_max = 0.0;
  std::string search = "full";
  Index delta = 0;
  Index delta_minus = 0;
  Index delta_plus = 0;
  double warmup_margin = 1.1;

  void add_to(CLI::App& app, const std::string& prefix) {
    app.add_option("--tau-max", tau_max, "Upper bound on any pseudo-period, seconds")->required();
    app.add_option("--" + prefix + "search", search, "Search variant")
        ->check(CLI::IsMember({"full", "windowed", "time-penalized"}))
        ->capture_default_str();
    app.add_option("--" + prefix + "delta", delta, "Windowed search half-width (samples), both sides");
    app.add_option("--" + prefix + "delta-minus", delta_minus, "Windowed search look-behind (samples)");
    app.add_option("--" + prefix + "delta-plus", delta_plus, "Windowed search look-ahead (samples)");
    app.add_option("--warmup-margin", warmup_margin, "Warm-up length as a multiple of 2 tau_max / T_s")
        ->capture_default_str();
  }

  EstimatorConfig config() const {
    EstimatorConfig c;
    c.tau_max = tau_max;
    c.warmup_margin = warmup_margin;
    if (search == "full") {
      c.search.kind = SearchKind::Full;
    } else if (search == "windowed") {
      c.search.kind = SearchKind::Windowed;
      c.search.delta_minus = delta_minus > 0 ? delta_minus : delta;
      c.search.delta_plus = delta_plus > 0 ? delta_plus : delta;
      if (c.search.delta_minus < 1 || c.search.delta_plus < 1)
        throw Error(ErrorKind::Config, "windowed search needs --delta (or --delta-minus and --delta-plus) >= 1");
    } else {
      c.search.kind = SearchKind::TimePenalized;
    }
    return c;
  }
};

std::string_view search_name(SearchKind k) {
  switch (k) {
    case SearchKind::Full: return "full";
    case SearchKind::Windowed: return "windowed";
    case SearchKind::TimePenalized: return "time-penalized";
  }
  return "?";
}

json estimator_json(const EstimatorConfig& c) {
  json j{{"sampling_time", c.sampling_time},
         {"dimension", c.dimension},
         {"tau_max", c.tau_max},
         {"mode", c.mode == Mode::Tethered ? "tethered" : "untethered"},
         {"search", {{"kind", search_name(c.search.kind)}}},
         {"warmup_margin", c.warmup_margin},
         {"warmup_length", c.warmup_length()},
         {"min_loop_length", c.min_loop_length()},
         {"backfill", c.backfill}};
  if (c.search.kind == SearchKind::Windowed) {
    j["search"]["delta_minus"] = c.search.delta_minus;
    j["search"]["delta_plus"] = c.search.delta_plus;
  }
  return j;
}

json diagnostics_json(const Estimator& e) {
  json j{{"loops_closed", e.delimiters().empty() ? 0 : e.delimiters().size() - 1},
         {"suppressed_wraps", e.diagnostics().suppressed_wraps},
         {"excluded_rows", e.diagnostics().excluded_rows},
         {"degenerate_scaling", e.diagnostics().degenerate_scaling},
         {"offset", e.offset().value()}};
  if (e.diagnostics().baseline_index) j["baseline_index"] = *e.diagnostics().baseline_index;
  return j;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return in;
}

std::ofstream open_output(const fs::path& path, Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  manifest.add_output(path.string());
  return out;
}

CsvSeries load_series(const std::string& path, Manifest& manifest, const std::string& role) {
  auto in = open_input(path);
  CsvSeries s = read_time_series_csv(in, path);
  manifest.add_input(role, path);
  return s;
}

Delimiters load_delimiters(const std::string& path, Manifest& manifest) {
  auto in = open_input(path);
  Delimiters d = read_delimiters(in, path);
  manifest.add_input("delimiters", path);
  return d;
}

fs::path output_dir(const Globals& g) {
  fs::path dir(g.out);
  fs::create_directories(dir);
  return dir;
}

// Tether from --baseline / --frames / --baseline-frames; config error when incomplete.
struct TetherFlags {
  std::string baseline;
  std::string frames;
  std::string baseline_frames;

  void add_to(CLI::App& app) {
    app.add_option("--baseline", baseline, "Baseline loop as a time series CSV");
    app.add_option("--frames", frames, "Frame of reference of the estimand (d + 1 rows)");
    app.add_option("--baseline-frames", baseline_frames, "Frame of the baseline (defaults to --frames)");
  }

  Tether load(Index dimension, Manifest& manifest) const {
    if (baseline.empty() || frames.empty())
      throw Error(ErrorKind::Config, "tethered mode requires --baseline and --frames");
    const CsvSeries base = load_series(baseline, manifest, "baseline");
    auto fin = open_input(frames);
    FrameOfReference frame_e = read_frame(fin, frames);
    manifest.add_input("frames", frames);
    std::optional<FrameOfReference> frame_b;
    if (!baseline_frames.empty()) {
      auto bin = open_input(baseline_frames);
      frame_b = read_frame(bin, baseline_frames);
      manifest.add_input("baseline_frames", baseline_frames);
    }
    if (base.series.dimension() != dimension)
      throw Error(ErrorKind::Config, "baseline dimension " + std::to_string(base.series.dimension()) +
                                         " does not match the signal dimension " + std::to_string(dimension));
    return Tether{base.series.samples(), frame_e, frame_b ? *frame_b : frame_e, base.series.sampling_time()};
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
  std::string kind;
  int preset = 1;
  std::optional<double> a, b, c;
  double duration = 60.0;
  double ts = 0.01;
  double transient = RosslerParams{}.transient;
  std::vector<double> x0;
  int crossings_per_loop = 2;
  std::string tpl = "circle";
  Index period = 200;
  Index periods = 10;
  double jitter = 0.0;
  double noise = 0.0;
  double shift = 0.5;
};

void write_series(const fs::path& path, const TimeSeries& s, Manifest& m) {
  auto out = open_output(path, m);
  write_time_series_csv(out, s);
}

void write_delims(const fs::path& path, const Delimiters& d, Manifest& m) {
  auto out = open_output(path, m);
  write_delimiters(out, d);
}

int run_simulate(const SimulateFlags& f, const Globals& g) {
  Manifest manifest("simulate", g.argv, g.seed);
  const fs::path dir = output_dir(g);
  json& cfg = manifest.config();
  cfg["kind"] = f.kind;

  if (f.kind == "rossler") {
    RosslerParams p = rossler_preset(f.preset);
    if (f.a) p.a = *f.a;
    if (f.b) p.b = *f.b;
    if (f.c) p.c = *f.c;
    p.duration = f.duration;
    p.sampling_time = f.ts;
    p.transient = f.transient;
    if (!f.x0.empty()) {
      if (f.x0.size() != 3) throw Error(ErrorKind::Config, "--x0 needs 3 values");
      p.initial_state = Eigen::Vector3d(f.x0[0], f.x0[1], f.x0[2]);
    }
    const TimeSeries series = rossler_integrate(p);
    const Delimiters delims = rossler_oracle_delimiters(series, f.crossings_per_loop);
    cfg["rossler"] = {{"preset", f.preset}, {"a", p.a}, {"b", p.b}, {"c", p.c},
                      {"initial_state", {p.initial_state.x(), p.initial_state.y(), p.initial_state.z()}},
                      {"sampling_time", p.sampling_time}, {"duration", p.duration}, {"transient", p.transient},
                      {"crossings_per_loop", f.crossings_per_loop}};
    Index longest = 0;
    for (std::size_t i = 0; i + 1 < delims.size(); ++i) longest = std::max(longest, delims.period_length(i));
    manifest.extra("oracle") = {{"delimiters", delims.size()},
                                {"longest_period_s", static_cast<double>(longest) * p.sampling_time}};
    write_series(dir / "series.csv", series, manifest);
    write_delims(dir / "delimiters.txt", delims, manifest);
  } else {
    SyntheticSpec spec;
    spec.template_loop = template_loop(parse_template(f.tpl), f.period);
    spec.period_jitter = f.jitter;
    spec.amplitude_noise = f.noise;
    spec.n_periods = f.periods;
    spec.time_shift = f.shift;
    spec.sampling_time = f.ts;
    cfg["synthetic"] = {{"template", f.tpl}, {"period", f.period}, {"periods", f.periods},
                        {"jitter", f.jitter}, {"noise", f.noise}, {"sampling_time", f.ts}};
    if (f.kind == "synthetic") {
      const SyntheticSignal sig = synth_pseudo_periodic(spec, g.seed);
      write_series(dir / "series.csv", sig.series, manifest);
      write_delims(dir / "delimiters.txt", sig.delimiters, manifest);
    } else {
      cfg["synthetic"]["time_shift"] = f.shift;
      const AntiPhasePair pair = anti_phase_pair(spec, g.seed);
      write_series(dir / "a.csv", pair.first, manifest);
      write_series(dir / "b.csv", pair.second, manifest);
      write_delims(dir / "a_delimiters.txt", pair.first_delimiters, manifest);
      write_delims(dir / "b_delimiters.txt", pair.second_delimiters, manifest);
      write_series(dir / "baseline.csv", TimeSeries(f.ts, pair.baseline), manifest);
      auto frame_out = open_output(dir / "frame.txt", manifest);
      write_frame(frame_out, pair.frame);
    }
  }
  manifest.write(dir / "manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// estimate

struct EstimateFlags {
  std::string input;
  RopeFlags rope;
  std::string mode = "untethered";
  TetherFlags tether;
  bool streaming = false;
};

EstimatorConfig make_config(const EstimateFlags& f, Index dimension, double ts, Manifest& manifest) {
  EstimatorConfig cfg = f.rope.config();
  cfg.sampling_time = ts;
  cfg.dimension = dimension;
  if (f.mode == "tethered") {
    cfg.mode = Mode::Tethered;
    cfg.tether = f.tether.load(dimension, manifest);
  }
  cfg.validate();
  return cfg;
}

int run_estimate(const EstimateFlags& f, const Globals& g) {
  Manifest manifest("estimate", g.argv, g.seed);
  const bool to_stdout = g.out == "-";
  std::ofstream file_out;
  fs::path dir;
  if (!to_stdout) dir = output_dir(g);
  const auto sink = [&]() -> std::ostream& {
    if (to_stdout) return std::cout;
    if (!file_out.is_open()) file_out = open_output(dir / "phases.csv", manifest);
    return file_out;
  };

  const auto finish = [&](const EstimatorConfig& cfg, const json& diag) {
    manifest.config() = estimator_json(cfg);
    manifest.extra("diagnostics") = diag;
    if (to_stdout) {
      std::cout.flush();
      manifest.write(std::cerr);
    } else {
      manifest.write(dir / "manifest.json");
    }
  };

  if (f.input != "-" && !f.streaming) {
    const CsvSeries in = load_series(f.input, manifest, "input");
    const EstimatorConfig cfg = make_config(f, in.series.dimension(), in.series.sampling_time(), manifest);
    const auto outputs = estimate(in.series, cfg);
    std::ostream& out = sink();
    write_phase_header(out);
    for (const auto& o : outputs) write_phase_row(out, o);
    EstimatorConfig echo = cfg;
    echo.backfill = true;
    // Batch diagnostics come from a replay-free summary of the outputs.
    Index loops = 0;
    for (const auto& o : outputs) loops = std::max(loops, o.loop_index);
    finish(echo, json{{"velocity", "central"}, {"highest_loop_index", loops}});
    return 0;
  }

  // Streaming: causal velocities, no back-fill, one row out per row in.
  std::ifstream file_in;
  if (f.input != "-") file_in = open_input(f.input);
  std::istream& in = f.input == "-" ? std::cin : file_in;
  Sha256 digest;
  CsvSampleReader reader(in, f.input == "-" ? "<stdin>" : f.input, [&digest](std::string_view line) {
    digest.update(line);
    digest.update("\n");
  });

  std::vector<std::pair<double, Vector>> pending;
  std::optional<Estimator> estimator;
  std::ostream& out = sink();
  write_phase_header(out);
  const auto feed = [&](const Vector& p) {
    write_phase_row(out, estimator->step(std::span<const double>(p.data(), static_cast<std::size_t>(p.size()))));
    if (to_stdout) out.flush();
  };
  while (auto row = reader.next()) {
    if (!estimator) {
      pending.push_back(std::move(*row));
      if (!reader.sampling_time()) continue;
      estimator.emplace(make_config(f, reader.dimension(), *reader.sampling_time(), manifest));
      for (const auto& [t, p] : pending) feed(p);
      pending.clear();
      continue;
    }
    feed(row->second);
  }
  if (f.input == "-") manifest.add_stream_input("input", digest.hex());
  else manifest.add_input("input", f.input);
  if (!estimator)
    throw Error(ErrorKind::InsufficientWarmup, "input ended after " + std::to_string(pending.size()) +
                                                   " sample(s); cannot infer the sampling time");
  json diag = diagnostics_json(*estimator);
  diag["velocity"] = "causal";
  finish(estimator->config(), diag);
  if (estimator->status() != Status::Active)
    throw Error(ErrorKind::InsufficientWarmup, "input ended after " + std::to_string(estimator->samples_seen()) +
                                                   " samples, warm-up needs " +
                                                   std::to_string(estimator->warmup_length()));
  return 0;
}

// ---------------------------------------------------------------------------
// compare

struct CompareFlags {
  std::string input;
  std::string delimiters;
  std::string methods = "rope,pca-t,pca-h";
  RopeFlags rope;
  double t_update = 0.1;
  std::optional<double> t_memory;
  double hilbert_edge = 0.05;
};

int run_compare(const CompareFlags& f, const Globals& g) {
  std::vector<Method> methods;
  {
    std::stringstream ss(f.methods);
    std::string name;
    while (std::getline(ss, name, ',')) {
      const auto m = parse_method(detail::trim(name));
      if (!m) {
        std::cerr << "error: unknown method '" << name << "' (valid methods: rope, pca-t, pca-h)\n";
        return kExitUsage;
      }
      if (std::find(methods.begin(), methods.end(), *m) == methods.end()) methods.push_back(*m);
    }
    if (methods.empty()) {
      std::cerr << "error: no methods given (valid methods: rope, pca-t, pca-h)\n";
      return kExitUsage;
    }
  }

  Manifest manifest("compare", g.argv, g.seed);
  const CsvSeries in = load_series(f.input, manifest, "input");
  const Delimiters delims = load_delimiters(f.delimiters, manifest);

  CompareConfig cfg;
  cfg.rope = f.rope.config();
  cfg.rope.sampling_time = in.series.sampling_time();
  cfg.rope.dimension = in.series.dimension();
  cfg.rope.backfill = true;  // compare runs the batch estimator
  cfg.rope.validate();
  cfg.pca_t.t_update = f.t_update;
  cfg.pca_t.t_memory = f.t_memory ? *f.t_memory : 2.0 * f.rope.tau_max;
  cfg.pca_t.validate();
  cfg.hilbert_edge_fraction = f.hilbert_edge;

  const CompareReport report = compare_report(in.series, delims, methods, cfg);
  const fs::path dir = output_dir(g);

  json summary{{"samples", in.series.size()}, {"start", report.start}, {"methods", json::array()}};
  std::ostringstream table;
  table << std::left << std::setw(8) << "method" << std::right << std::setw(14) << "mean" << std::setw(14)
        << "variance" << std::setw(10) << "n_valid" << "\n";
  for (const auto& r : report.results) {
    const std::string name(method_name(r.method));
    {
      auto out = open_output(dir / ("phases_" + name + ".csv"), manifest);
      write_phase_series(out, r.phases);
    }
    json entry{{"method", name}};
    table << std::left << std::setw(8) << name << std::right;
    if (r.stats) {
      entry["mean"] = r.stats->mean;
      entry["variance"] = r.stats->variance;
      entry["n_valid"] = r.stats->n_valid;
      table << std::setw(14) << format_angle(r.stats->mean) << std::setw(14) << format_angle(r.stats->variance)
            << std::setw(10) << r.stats->n_valid << "\n";
    } else {
      entry["error"] = r.error;
      table << "  failed: " << r.error << "\n";
    }
    summary["methods"].push_back(entry);
  }
  {
    auto out = open_output(dir / "benchmark.csv", manifest);
    write_phase_series(out, report.benchmark);
  }
  {
    auto out = open_output(dir / "summary.json", manifest);
    out << summary.dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "summary.txt", manifest);
    out << table.str();
  }
  std::cout << table.str();

  manifest.config() = {{"rope", estimator_json(cfg.rope)},
                       {"pca_t", {{"t_update", cfg.pca_t.t_update}, {"t_memory", cfg.pca_t.t_memory}}},
                       {"pca_h", {{"edge_fraction", cfg.hilbert_edge_fraction}}},
                       {"methods", f.methods}};
  manifest.write(dir / "manifest.json");
  return report.all_failed() ? kExitRuntime : 0;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateFlags {
  std::string input;
  std::string delimiters;
  std::optional<double> max_eps_t;
  std::optional<double> max_eps_s;
};

int run_validate(const ValidateFlags& f, const Globals& g) {
  Manifest manifest("validate", g.argv, g.seed);
  const CsvSeries in = load_series(f.input, manifest, "input");
  const Delimiters delims = load_delimiters(f.delimiters, manifest);
  const PseudoPeriodicityReport rep = verify_pseudo_periodicity(in.series, delims);

  json doc{{"eps_t", rep.eps_t_per_pair}, {"eps_s", rep.eps_s_per_pair}, {"eps_t_max", rep.eps_t_max},
           {"eps_s_max", rep.eps_s_max}, {"tau_max", rep.tau_max}, {"violations", json::array()}};
  std::ostringstream text;
  text << "pair  k_i      k_i+1    k_i+2    eps_t        eps_s\n";
  for (std::size_t i = 0; i < rep.eps_t_per_pair.size(); ++i) {
    text << std::left << std::setw(6) << i << std::setw(9) << delims[i] << std::setw(9) << delims[i + 1]
         << std::setw(9) << delims[i + 2] << std::setw(13) << format_angle(rep.eps_t_per_pair[i])
         << format_angle(rep.eps_s_per_pair[i]) << "\n";
    std::vector<std::string> broken;
    if (f.max_eps_t && rep.eps_t_per_pair[i] > *f.max_eps_t) broken.emplace_back("eps_t");
    if (f.max_eps_s && rep.eps_s_per_pair[i] > *f.max_eps_s) broken.emplace_back("eps_s");
    if (!broken.empty())
      doc["violations"].push_back({{"pair", i},
                                   {"delimiters", {delims[i], delims[i + 1], delims[i + 2]}},
                                   {"eps_t", rep.eps_t_per_pair[i]},
                                   {"eps_s", rep.eps_s_per_pair[i]},
                                   {"exceeds", broken}});
  }
  text << "eps_t_max " << format_angle(rep.eps_t_max) << "  eps_s_max " << format_angle(rep.eps_s_max)
       << "  tau_max " << format_angle(rep.tau_max) << " s\n";

  std::string verdict = "unchecked";
  if (f.max_eps_t || f.max_eps_s) verdict = doc["violations"].empty() ? "pass" : "fail";
  doc["verdict"] = verdict;
  if (f.max_eps_t) doc["max_eps_t"] = *f.max_eps_t;
  if (f.max_eps_s) doc["max_eps_s"] = *f.max_eps_s;
  text << "verdict " << verdict << "\n";
  for (const auto& v : doc["violations"])
    text << "  pair " << v["pair"].get<std::size_t>() << " (delimiters " << v["delimiters"][0] << ", "
         << v["delimiters"][1] << ", " << v["delimiters"][2] << ") exceeds " << v["exceeds"].dump() << "\n";

  manifest.config() = {{"max_eps_t", f.max_eps_t ? json(*f.max_eps_t) : json()},
                       {"max_eps_s", f.max_eps_s ? json(*f.max_eps_s) : json()}};
  std::cout << text.str();
  if (g.out == "-") {
    std::cout << doc.dump(2) << '\n';
    manifest.write(std::cerr);
    return 0;
  }
  const fs::path dir = output_dir(g);
  {
    auto out = open_output(dir / "validation.json", manifest);
    out << doc.dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "validation.txt", manifest);
    out << text.str();
  }
  manifest.write(dir / "manifest.json");
  return 0;
}

// ---------------------------------------------------------------------------
// tether

struct TetherCmdFlags {
  std::string input_a;
  std::string input_b;
  RopeFlags rope;
  TetherFlags tether;
};

int run_tether(const TetherCmdFlags& f, const Globals& g) {
  Manifest manifest("tether", g.argv, g.seed);
  const CsvSeries a = load_series(f.input_a, manifest, "input_a");
  const CsvSeries b = load_series(f.input_b, manifest, "input_b");
  if (a.series.dimension() != b.series.dimension())
    throw Error(ErrorKind::InvalidInput, "inputs differ in dimension");
  if (std::abs(a.series.sampling_time() - b.series.sampling_time()) >
      kSpacingTolerance * a.series.sampling_time())
    throw Error(ErrorKind::InvalidInput, "inputs differ in sampling time");

  EstimatorConfig cfg = f.rope.config();
  cfg.mode = Mode::Tethered;
  cfg.sampling_time = a.series.sampling_time();
  cfg.dimension = a.series.dimension();
  cfg.tether = f.tether.load(cfg.dimension, manifest);
  cfg.validate();

  auto job_a = std::async(std::launch::async, [&] { return estimate(a.series, cfg); });
  auto job_b = std::async(std::launch::async, [&] { return estimate(b.series, cfg); });
  const auto out_a = job_a.get();
  const auto out_b = job_b.get();

  const fs::path dir = output_dir(g);
  auto out = open_output(dir / "tether.csv", manifest);
  out << "k,theta_a,theta_b,relative\n";
  const std::size_t n = std::min(out_a.size(), out_b.size());
  double sum = 0.0;
  Index defined = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& pa = out_a[k].phase;
    const auto& pb = out_b[k].phase;
    out << k << ',' << (pa ? format_angle(pa->value()) : "") << ',' << (pb ? format_angle(pb->value()) : "") << ',';
    if (pa && pb) {
      const double rel = circular_error(*pa, *pb);
      out << format_angle(rel);
      sum += rel;
      ++defined;
    }
    out << '\n';
  }
  out.close();
  manifest.config() = estimator_json(cfg);
  manifest.extra("summary") = {{"samples", n},
                               {"defined", defined},
                               {"mean_relative", defined ? json(sum / static_cast<double>(defined)) : json()}};
  manifest.write(dir / "manifest.json");
  return 0;
}

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::Config ? kExitUsage : kExitRuntime;
}

}  // namespace
}  // namespace rope::cli

int main(int argc, char** argv) {
  using namespace rope::cli;
  std::ios::sync_with_stdio(false);

  CLI::App app{"Real-time phase estimation for pseudo-periodic signals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rope::kVersion));
  app.set_config("--config", "", "Key-value config file (TOML/INI); subcommand keys go in a [section]");

  Globals globals;
  for (int i = 0; i < argc; ++i) globals.argv.emplace_back(argv[i]);
  app.add_option("--seed", globals.seed, "Random seed for generators")->capture_default_str();
  app.add_option("--out", globals.out, "Output directory ('-' for stdout where supported)")->capture_default_str();

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a signal with ground-truth delimiters");
  simulate->add_option("kind", sim.kind, "rossler, synthetic or antiphase")
      ->required()
      ->check(CLI::IsMember({"rossler", "synthetic", "antiphase"}));
  simulate->add_option("--preset", sim.preset, "Rossler parameter set 1-5")->check(CLI::Range(1, 5));
  simulate->add_option("--a", sim.a, "Override Rossler a");
  simulate->add_option("--b", sim.b, "Override Rossler b");
  simulate->add_option("--c", sim.c, "Override Rossler c");
  simulate->add_option("--duration", sim.duration, "Rossler duration, seconds")->capture_default_str();
  simulate->add_option("--ts", sim.ts, "Sampling time, seconds")->capture_default_str();
  simulate->add_option("--transient", sim.transient, "Rossler transient discarded, seconds")->capture_default_str();
  simulate->add_option("--x0", sim.x0, "Rossler initial state (3 values)")->expected(3);
  simulate->add_option("--crossings-per-loop", sim.crossings_per_loop,
                       "Poincare crossings per annotated loop (2 for the period-2 presets)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--template", sim.tpl,
                       "cosine, circle, infinity, trefoil, lissajous, spiral or plateau")
      ->capture_default_str();
  simulate->add_option("--period", sim.period, "Template loop length, samples")->capture_default_str();
  simulate->add_option("--periods", sim.periods, "Number of periods")->capture_default_str();
  simulate->add_option("--jitter", sim.jitter, "Relative period jitter")->capture_default_str();
  simulate->add_option("--noise", sim.noise, "Gaussian noise, relative to the loop half-range")->capture_default_str();
  simulate->add_option("--shift", sim.shift, "Antiphase delay, fraction of a period")->capture_default_str();

  EstimateFlags est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate the phase of every sample");
  estimate_cmd->add_option("--input", est.input, "Time series CSV ('-' reads stdin as a stream)")->required();
  est.rope.add_to(*estimate_cmd, "");
  estimate_cmd->add_option("--mode", est.mode, "untethered or tethered")
      ->check(CLI::IsMember({"untethered", "tethered"}))
      ->capture_default_str();
  est.tether.add_to(*estimate_cmd);
  estimate_cmd->add_flag("--streaming", est.streaming, "Process a file as a stream (causal velocity, no back-fill)");

  CompareFlags cmp;
  auto* compare = app.add_subcommand("compare", "Score estimators against annotated delimiters");
  compare->add_option("--input", cmp.input, "Time series CSV")->required();
  compare->add_option("--delimiters", cmp.delimiters, "Delimiter annotation file")->required();
  compare->add_option("--methods", cmp.methods, "Comma-separated: rope, pca-t, pca-h")->capture_default_str();
  cmp.rope.add_to(*compare, "rope-");
  compare->add_option("--t-update", cmp.t_update, "PCA-T refresh period, seconds")->capture_default_str();
  compare->add_option("--t-memory", cmp.t_memory, "PCA-T window, seconds (default 2 tau_max)");
  compare->add_option("--hilbert-edge", cmp.hilbert_edge, "PCA-H fraction excluded at each end")
      ->capture_default_str();

  ValidateFlags val;
  auto* validate = app.add_subcommand("validate", "Check pseudo-periodicity tolerances of an annotation");
  validate->add_option("--input", val.input, "Time series CSV")->required();
  validate->add_option("--delimiters", val.delimiters, "Delimiter annotation file")->required();
  validate->add_option("--max-eps-t", val.max_eps_t, "Threshold on the period-length tolerance");
  validate->add_option("--max-eps-s", val.max_eps_s, "Threshold on the shape tolerance");

  TetherCmdFlags teth;
  auto* tether = app.add_subcommand("tether", "Tethered phases of two signals and their circular difference");
  tether->add_option("--input-a", teth.input_a, "First time series CSV")->required();
  tether->add_option("--input-b", teth.input_b, "Second time series CSV")->required();
  teth.rope.add_to(*tether, "");
  teth.tether.add_to(*tether);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, globals);
    if (*estimate_cmd) return run_estimate(est, globals);
    if (*compare) return run_compare(cmp, globals);
    if (*validate) return run_validate(val, globals);
    if (*tether) return run_tether(teth, globals);
  } catch (const rope::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
