#include "covcpd/cli.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"

#include "covcpd/errors.hpp"
#include "covcpd/nulldist.hpp"
#include "covcpd/simlab.hpp"

namespace covcpd::cli {

namespace {

constexpr const char* kVersion = "1.0.0";
const std::vector<std::string> kCommands{"detect", "segment", "simulate", "null-quantile"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_scalar(std::string_view token, const std::string& what) {
  token = trim(token);
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ArgumentError("cannot parse '" + std::string(token) + "' in " + what);
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  std::string_view rest(text);
  while (!trim(rest).empty()) {
    const auto comma = rest.find(',');
    out.push_back(parse_scalar<T>(rest.substr(0, comma), what));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ArgumentError(what + " is empty");
  return out;
}

BasisSpec parse_band(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ArgumentError("--band expects START:LEN, got '" + text + "'");
  const int start = parse_scalar<int>(std::string_view(text).substr(0, colon), "--band");
  const int length = parse_scalar<int>(std::string_view(text).substr(colon + 1), "--band");
  return BasisSpec::band(start, length);
}

// Values bound to the command-line options before they are resolved.
struct RawOptions {
  std::string config;
  std::string input;
  std::string layout = "grid";
  bool header = false;
  std::string band = "2:8";
  int p = 0;
  double alpha = 0.05;
  int bandwidth = 0;
  std::string kernel = "bartlett";
  bool iid = false;
  int mc_reps = 5000;
  int grid_r = 1000;
  bool bridge_correction = true;
  double trunc_floor = 1e-6;
  double trunc_mass = 0.9999;
  std::uint64_t seed = kDefaultSeed;
  int threads = 0;
  bool rescale = false;
  bool demean = false;
  int min_segment = 30;
  int max_depth = 8;
  std::string out;
  bool emit_plot_data = false;

  std::string study = "power";
  int setting = 1;
  bool null_model = false;
  std::string noise_vars = "0,3,6,9";
  std::string n_per_group = "150,300";
  int reps = 500;
  int emit_panels = 0;
  std::string panel_layout = "coefficients";
  int panel_grid = 1000;

  std::string rho;
  std::string rho_file;
  std::string alphas = "0.05";
  std::string null_cache;
};

void add_common(CLI::App& sub, RawOptions& raw) {
  sub.add_option("--config", raw.config, "key=value file; command-line flags take precedence");
  sub.add_option("--alpha", raw.alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
  sub.add_option("--mc-reps", raw.mc_reps, "Monte Carlo replicates of the null law")->check(CLI::PositiveNumber);
  sub.add_option("--grid-r", raw.grid_r, "Grid points per simulated Brownian bridge")->check(CLI::PositiveNumber);
  sub.add_option("--bridge-correction", raw.bridge_correction,
                 "Account for bridge excursions between grid points (true/false)");
  sub.add_option("--seed", raw.seed, "Base seed of all random streams")->envname("COVCPD_SEED");
  sub.add_option("--threads", raw.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  sub.add_option("--out", raw.out, "Directory for output files");
  sub.add_flag("--emit-plot-data", raw.emit_plot_data, "Write tidy CSV files for plotting into --out");
}

void add_input(CLI::App& sub, RawOptions& raw) {
  sub.add_option("--input", raw.input, "CSV or JSON file with one curve per row")->required()->check(CLI::ExistingFile);
  sub.add_option("--layout", raw.layout, "grid: sampled curves; coefficients: basis coefficients")
      ->check(CLI::IsMember({"grid", "coefficients"}));
  sub.add_flag("--header", raw.header, "CSV: the first row holds the sampling points");
  sub.add_option("--band", raw.band, "Fourier band START:LEN (functions START..START+LEN-1)");
  sub.add_option("--p", raw.p, "Use the first P Fourier functions instead of --band")->check(CLI::PositiveNumber);
}

void add_detector(CLI::App& sub, RawOptions& raw) {
  sub.add_option("--bandwidth", raw.bandwidth, "Lag-window bandwidth, 0 = ceil(N^(1/3))")
      ->check(CLI::NonNegativeNumber);
  sub.add_option("--kernel", raw.kernel, "Lag-window kernel")
      ->check(CLI::IsMember({"bartlett", "parzen", "truncated", "truncated-flat"}));
  sub.add_flag("--iid", raw.iid, "Lag-0 covariance only");
  sub.add_option("--trunc-floor", raw.trunc_floor, "Drop eigenvalues below this fraction of the largest");
  sub.add_option("--trunc-mass", raw.trunc_mass, "Stop once this share of the spectrum is kept");
  sub.add_flag("--rescale", raw.rescale, "Scale every curve to unit L2 norm");
  sub.add_flag("--demean", raw.demean, "Subtract the sample mean curve");
  sub.add_option("--min-segment", raw.min_segment, "Shortest segment that is tested");
  sub.add_option("--max-depth", raw.max_depth, "Binary segmentation depth cap");
}

RunConfig resolve(const std::string& command, const RawOptions& raw, const std::optional<std::filesystem::path>& cfg) {
  RunConfig config;
  config.command = command;
  config.config_file = cfg;
  config.input = raw.input;
  config.ingest.layout = layout_from_string(raw.layout);
  config.ingest.header = raw.header;
  config.ingest.basis = raw.p > 0 ? BasisSpec::fourier(raw.p) : parse_band(raw.band);
  validate(config.ingest.basis);

  DetectorConfig& d = config.detector;
  d.alpha = raw.alpha;
  d.longrun.kernel = kernel_from_string(raw.kernel);
  if (raw.bandwidth > 0) d.longrun.bandwidth = raw.bandwidth;
  d.longrun.iid = raw.iid;
  d.truncation.relative_floor = raw.trunc_floor;
  d.truncation.mass_target = raw.trunc_mass;
  d.null_mc.replicates = raw.mc_reps;
  d.null_mc.grid = raw.grid_r;
  d.null_mc.seed = raw.seed;
  d.null_mc.threads = raw.threads;
  d.null_mc.bridge_correction = raw.bridge_correction;
  d.demean = raw.demean;
  d.rescale = raw.rescale;
  d.min_segment = raw.min_segment;
  d.max_depth = raw.max_depth;

  config.seed = raw.seed;
  config.threads = raw.threads;
  if (!raw.out.empty()) config.out_dir = raw.out;
  config.emit_plot_data = raw.emit_plot_data;
  if (config.emit_plot_data && !config.out_dir) throw ArgumentError("--emit-plot-data needs --out");

  config.study = raw.study;
  config.setting = raw.setting;
  config.null_model = raw.null_model;
  config.noise_vars = parse_list<double>(raw.noise_vars, "--noise-var");
  config.n_per_group = parse_list<int>(raw.n_per_group, "--n-per-group");
  config.reps = raw.reps;
  config.emit_panels = raw.emit_panels;
  config.panel_layout = layout_from_string(raw.panel_layout);
  config.panel_grid = raw.panel_grid;
  if (config.emit_panels > 0 && !config.out_dir) throw ArgumentError("--emit-panels needs --out");

  if (!raw.rho.empty()) config.rho = parse_list<double>(raw.rho, "--rho");
  if (!raw.rho_file.empty()) config.rho_file = raw.rho_file;
  config.alphas = parse_list<double>(raw.alphas, "--alphas");
  if (!raw.null_cache.empty()) config.null_cache = raw.null_cache;
  return config;
}

std::ofstream open_output(const RunConfig& config, const std::string& name) {
  const auto path = *config.out_dir / name;
  std::ofstream file(path);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  return file;
}

// Prints the document and mirrors it into --out when given.
void emit(const nlohmann::json& doc, const RunConfig& config, const std::string& name, std::ostream& out) {
  out << doc.dump(2) << '\n';
  if (config.out_dir) open_output(config, name) << doc.dump(2) << '\n';
}

nlohmann::json optional_path(const std::optional<std::filesystem::path>& p) {
  return p ? nlohmann::json(p->string()) : nlohmann::json(nullptr);
}

std::string panel_name(int setting, double noise_var, int n_per_group, int replicate, Layout layout) {
  std::ostringstream name;
  name << "setting" << setting << "_noise" << noise_var << "_n" << n_per_group << "_rep" << replicate
       << (layout == Layout::coefficients ? ".json" : ".csv");
  return name.str();
}

}  // namespace

nlohmann::json to_json(const RunConfig& config) {
  const DetectorConfig& d = config.detector;
  nlohmann::json j = {
      {"tool", "covcpd"},
      {"version", kVersion},
      {"command", config.command},
      {"config_file", optional_path(config.config_file)},
      {"seed", config.seed},
      {"threads", config.threads},
      {"out", optional_path(config.out_dir)},
      {"emit_plot_data", config.emit_plot_data},
      {"detector",
       {{"alpha", d.alpha},
        {"kernel", to_string(d.longrun.kernel)},
        {"bandwidth", d.longrun.bandwidth ? nlohmann::json(*d.longrun.bandwidth) : nlohmann::json("auto")},
        {"iid", d.longrun.iid},
        {"truncation", {{"relative_floor", d.truncation.relative_floor}, {"mass_target", d.truncation.mass_target}}},
        {"mc_reps", d.null_mc.replicates},
        {"grid_r", d.null_mc.grid},
        {"bridge_correction", d.null_mc.bridge_correction},
        {"null_seed", d.null_mc.seed},
        {"demean", d.demean},
        {"rescale", d.rescale},
        {"min_segment", d.min_segment},
        {"max_depth", d.max_depth}}},
  };
  if (config.command == "detect" || config.command == "segment") {
    j["input"] = config.input.string();
    j["layout"] = to_string(config.ingest.layout);
    j["header"] = config.ingest.header;
    j["basis"] = to_json(config.ingest.basis);
  }
  if (config.command == "simulate") {
    j["simulate"] = {{"study", config.study},
                     {"setting", config.setting},
                     {"null_model", config.null_model},
                     {"noise_vars", config.noise_vars},
                     {"n_per_group", config.n_per_group},
                     {"reps", config.reps},
                     {"emit_panels", config.emit_panels},
                     {"panel_layout", to_string(config.panel_layout)},
                     {"panel_grid", config.panel_grid}};
  }
  if (config.command == "null-quantile") {
    j["null_quantile"] = {{"rho", config.rho},
                          {"rho_file", optional_path(config.rho_file)},
                          {"alphas", config.alphas},
                          {"null_cache", optional_path(config.null_cache)}};
  }
  return j;
}

std::vector<std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file " + path.string());
  std::vector<std::string> args;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(trim(text.substr(0, eq)));
    while (key.starts_with('-')) key.erase(0, 1);
    if (key.empty()) throw ArgumentError(path.string() + ":" + std::to_string(line_no) + ": empty key");
    args.push_back("--" + key + "=" + std::string(trim(text.substr(eq + 1))));
  }
  return args;
}

int run_detect(const RunConfig& config, std::ostream& out) {
  const IngestResult data = ingest(config.input, config.ingest);
  CusumCurve curve;
  const TestResult result = detect_and_test(data.panel, config.detector, &curve);
  const nlohmann::json doc = {
      {"provenance", to_json(config)},
      {"data", {{"n", data.panel.n()}, {"p", data.panel.p()}, {"grid_size", data.grid_size}}},
      {"result", to_json(result)}};
  emit(doc, config, "result.json", out);
  if (config.emit_plot_data) {
    auto file = open_output(config, "tn_curve.csv");
    write_tn_curve_csv(file, curve);
  }
  return kExitOk;
}

int run_segment(const RunConfig& config, std::ostream& out) {
  const IngestResult data = ingest(config.input, config.ingest);
  const SegmentTree tree = binary_segment(data.panel, config.detector);
  const nlohmann::json doc = {
      {"provenance", to_json(config)},
      {"data", {{"n", data.panel.n()}, {"p", data.panel.p()}, {"grid_size", data.grid_size}}},
      {"result", to_json(tree)}};
  emit(doc, config, "segments.json", out);
  if (config.emit_plot_data) {
    auto file = open_output(config, "segments.csv");
    file << "begin,end,depth,stop,change_point,t_max,crit,p\n";
    for (const auto& node : tree.nodes) {
      file << node.begin << ',' << node.end << ',' << node.depth << ',' << to_string(node.stop) << ','
           << (node.change_point ? std::to_string(*node.change_point) : "") << ',';
      if (node.test) {
        file << nlohmann::json(node.test->t_max).dump() << ',' << nlohmann::json(node.test->crit).dump() << ','
             << nlohmann::json(node.test->p).dump();
      } else {
        file << ",,";
      }
      file << '\n';
    }
  }
  return kExitOk;
}

int run_simulate(const RunConfig& config, std::ostream& out) {
  if (config.reps < 1) throw ArgumentError("--reps must be positive");
  SimSetting base = builtin_setting(config.setting);
  if (config.null_model) base = null_variant(base);

  nlohmann::json doc = {{"provenance", to_json(config)}};
  if (config.study == "localization") {
    const auto summaries = localization_study(base, config.n_per_group, config.reps, config.seed, config.threads);
    doc["result"] = {{"study", "localization"}, {"seed", config.seed}, {"summaries", to_json(summaries)}};
    emit(doc, config, "report.json", out);
    if (config.out_dir) {
      auto file = open_output(config, "report.csv");
      write_localization_csv(file, summaries);
    }
  } else {
    StudyOptions options;
    options.reps = config.reps;
    options.seed = config.seed;
    options.threads = config.threads;
    options.run_test = config.study == "power";
    options.detector = config.detector;
    const ExperimentReport report = power_study(base, config.noise_vars, config.n_per_group, options);
    doc["result"] = to_json(report);
    emit(doc, config, "report.json", out);
    if (config.out_dir) {
      auto file = open_output(config, "report.csv");
      write_report_csv(file, report);
    }
  }

  if (config.emit_panels > 0) {
    const auto dir = *config.out_dir / "panels";
    std::filesystem::create_directories(dir);
    const std::vector<double> grid = uniform_grid(static_cast<std::size_t>(config.panel_grid));
    const int count = std::min(config.emit_panels, config.reps);
    for (double noise_var : config.noise_vars) {
      for (int n : config.n_per_group) {
        SimSetting cell = base;
        cell.noise_var = noise_var;
        cell.n_per_group = n;
        for (int r = 0; r < count; ++r) {
          const CurvePanel panel = generate_panel(cell, panel_seed(config.seed, n, r));
          std::ofstream file(dir / panel_name(config.setting, noise_var, n, r, config.panel_layout));
          if (config.panel_layout == Layout::coefficients) {
            file << panel_to_json(panel).dump() << '\n';
          } else {
            write_panel_grid_csv(file, panel, grid, true);
          }
        }
      }
    }
  }
  return kExitOk;
}

int run_null_quantile(const RunConfig& config, std::ostream& out) {
  std::vector<double> rho = config.rho;
  if (config.rho_file) {
    const auto from_file = read_number_list(*config.rho_file);
    rho.insert(rho.end(), from_file.begin(), from_file.end());
  }
  if (rho.empty()) throw ArgumentError("null-quantile needs --rho or --rho-file");
  for (double r : rho) {
    if (!(r >= 0.0)) throw DataError(1, 1, "eigenvalues must be nonnegative");
  }
  std::sort(rho.begin(), rho.end(), std::greater<>());

  const NullMcSpec& spec = config.detector.null_mc;
  std::optional<NullDistribution> dist;
  bool cache_hit = false;
  if (config.null_cache) {
    dist = read_null_cache(*config.null_cache, rho, spec);
    cache_hit = dist.has_value();
  }
  if (!dist) {
    dist = simulate_null(rho, spec);
    if (config.null_cache) write_null_cache(*config.null_cache, *dist);
  }

  nlohmann::json quantiles = nlohmann::json::array();
  for (double alpha : config.alphas) {
    quantiles.push_back({{"alpha", alpha}, {"crit", critical_value(*dist, alpha)}});
  }
  const nlohmann::json doc = {{"provenance", to_json(config)},
                              {"result",
                               {{"rho", rho},
                                {"mc_reps", dist->samples.size()},
                                {"grid_r", dist->grid_r},
                                {"seed", dist->seed},
                                {"cache_hit", cache_hit},
                                {"critical_values", quantiles}}}};
  emit(doc, config, "quantiles.json", out);
  if (config.emit_plot_data) {
    auto file = open_output(config, "null_samples.csv");
    file << "sample\n";
    for (double s : dist->samples) file << nlohmann::json(s).dump() << '\n';
  }
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RawOptions raw;
  CLI::App app{"Change-point detection for the covariance of functional time series", "covcpd"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.footer(
      "Settings are resolved as: built-in defaults < key=value lines of --config FILE < command-line flags.\n"
      "COVCPD_SEED supplies --seed when the flag is absent. Exit codes: 0 success, 1 usage error, 2 data error.");

  auto* detect = app.add_subcommand("detect", "Test for a single change in covariance and locate it");
  auto* segment = app.add_subcommand("segment", "Binary segmentation for several changes");
  auto* simulate = app.add_subcommand("simulate", "Simulation studies on the built-in two-group settings");
  auto* null_quantile = app.add_subcommand("null-quantile", "Critical values of the limiting null law");
  std::vector<CLI::App*> subs{detect, segment, simulate, null_quantile};

  for (auto* sub : subs) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    add_common(*sub, raw);
  }
  for (auto* sub : {detect, segment}) {
    add_input(*sub, raw);
    add_detector(*sub, raw);
  }
  add_detector(*simulate, raw);
  simulate->add_option("--study", raw.study, "power, candidate (location only) or localization")
      ->check(CLI::IsMember({"power", "candidate", "localization"}));
  simulate->add_option("--setting", raw.setting, "Built-in setting 1, 2 or 3")->check(CLI::Range(1, 3));
  simulate->add_flag("--null-model", raw.null_model, "Give both groups the first group's covariance");
  simulate->add_option("--noise-var", raw.noise_vars, "Comma-separated noise variances");
  simulate->add_option("--n-per-group", raw.n_per_group, "Comma-separated curves per group");
  simulate->add_option("--reps", raw.reps, "Replicates per configuration")->check(CLI::PositiveNumber);
  simulate->add_option("--emit-panels", raw.emit_panels, "Write the first K panels of each configuration")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--panel-layout", raw.panel_layout, "coefficients (JSON) or grid (CSV)")
      ->check(CLI::IsMember({"grid", "coefficients"}));
  simulate->add_option("--panel-grid", raw.panel_grid, "Sampling points of grid-layout panels")
      ->check(CLI::PositiveNumber);
  null_quantile->add_option("--rho", raw.rho, "Comma-separated eigenvalues");
  null_quantile->add_option("--rho-file", raw.rho_file, "File with eigenvalues")->check(CLI::ExistingFile);
  null_quantile->add_option("--alphas", raw.alphas, "Comma-separated significance levels");
  null_quantile->add_option("--null-cache", raw.null_cache, "Binary cache of simulated null samples");

  // --config is expanded before parsing so that explicit flags, which come
  // later on the command line, win under the take-last policy.
  std::vector<std::string> argv;
  std::optional<std::filesystem::path> config_file;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_file = args[++i];
    } else if (args[i].starts_with("--config=")) {
      config_file = args[i].substr(9);
    } else {
      argv.push_back(args[i]);
    }
  }

  try {
    const auto sub_it = std::find_first_of(argv.begin(), argv.end(), kCommands.begin(), kCommands.end());
    if (config_file && sub_it != argv.end()) {
      CLI::App* target = app.get_subcommand(*sub_it);
      std::vector<std::string> extra;
      for (const auto& arg : read_config_file(*config_file)) {
        const std::string name = arg.substr(0, arg.find('='));
        if (target->get_option_no_throw(name) != nullptr) {
          extra.push_back(arg);
          continue;
        }
        const bool known_elsewhere =
            std::any_of(subs.begin(), subs.end(), [&](CLI::App* s) { return s->get_option_no_throw(name) != nullptr; });
        if (!known_elsewhere) throw ArgumentError("unknown key '" + name.substr(2) + "' in " + config_file->string());
      }
      argv.insert(sub_it + 1, extra.begin(), extra.end());
    }

    std::vector<const char*> cargs{args.empty() ? "covcpd" : args.front().c_str()};
    for (const auto& a : argv) cargs.push_back(a.c_str());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::CallForVersion&) {
      out << kVersion << '\n';
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << "error: " << e.what() << '\n';
      err << "run 'covcpd --help' for usage\n";
      return kExitUsage;
    }

    CLI::App* chosen = nullptr;
    for (auto* sub : subs) {
      if (sub->parsed()) chosen = sub;
    }
    const RunConfig config = resolve(chosen->get_name(), raw, config_file);
    if (config.out_dir) std::filesystem::create_directories(*config.out_dir);

    if (chosen == detect) return run_detect(config, out);
    if (chosen == segment) return run_segment(config, out);
    if (chosen == simulate) return run_simulate(config, out);
    return run_null_quantile(config, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace covcpd::cli
