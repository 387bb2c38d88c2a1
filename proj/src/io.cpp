#include "covcpd/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "covcpd/errors.hpp"

namespace covcpd {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, std::size_t row, std::size_t col) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw FormatError("cannot parse '" + std::string(token) + "' as a number at row " + std::to_string(row) +
                      ", column " + std::to_string(col));
  }
  return value;
}

std::vector<double> split_row(const std::string& line, std::size_t row) {
  std::vector<double> values;
  std::size_t col = 1;
  std::string_view rest(line);
  while (true) {
    const auto comma = rest.find(',');
    values.push_back(parse_number(rest.substr(0, comma), row, col));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
    ++col;
  }
  return values;
}

// Rows of equal width with finite entries. Row numbers in errors are 1-based
// data rows (a header row is not counted).
RowMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw FormatError("input contains no curves");
  const std::size_t width = rows.front().size();
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      throw FormatError("row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                        " values, expected " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (!std::isfinite(rows[r][c])) {
        throw DataError(r + 1, c + 1,
                        "non-finite value at row " + std::to_string(r + 1) + ", column " + std::to_string(c + 1));
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

IngestResult build_panel(const std::vector<std::vector<double>>& rows, std::vector<double> grid,
                         const IngestOptions& options) {
  const RowMatrix data = to_matrix(rows);
  IngestResult result;
  result.panel.basis = options.basis;
  if (options.layout == Layout::coefficients) {
    if (data.cols() != options.basis.length) {
      throw FormatError("coefficient rows have " + std::to_string(data.cols()) + " values, basis has " +
                        std::to_string(options.basis.length));
    }
    result.panel.coeffs = data;
  } else {
    if (grid.empty()) grid = uniform_grid(static_cast<std::size_t>(data.cols()));
    if (grid.size() != static_cast<std::size_t>(data.cols())) {
      throw FormatError("grid has " + std::to_string(grid.size()) + " points but curves have " +
                        std::to_string(data.cols()) + " samples");
    }
    result.grid_size = grid.size();
    const CurveProjector projector(options.basis, std::move(grid));
    result.panel.coeffs.resize(data.rows(), options.basis.length);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const auto row = data.row(i);
      result.panel.coeffs.row(i) =
          projector.project(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))).transpose();
    }
  }
  validate(result.panel);
  return result;
}

std::vector<double> json_numbers(const nlohmann::json& arr, std::size_t row) {
  if (!arr.is_array()) throw FormatError("row " + std::to_string(row) + " is not an array");
  std::vector<double> out;
  out.reserve(arr.size());
  std::size_t col = 1;
  for (const auto& v : arr) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_null()) {
      // JSON has no NaN literal; many writers emit null in its place.
      out.push_back(std::nan(""));
    } else {
      throw FormatError("non-numeric entry at row " + std::to_string(row) + ", column " + std::to_string(col));
    }
    ++col;
  }
  return out;
}

double round_trip(double v) { return v; }

}  // namespace

Layout layout_from_string(const std::string& name) {
  if (name == "grid") return Layout::grid;
  if (name == "coefficients") return Layout::coefficients;
  throw ArgumentError("unknown layout '" + name + "' (expected grid or coefficients)");
}

std::string to_string(Layout layout) { return layout == Layout::grid ? "grid" : "coefficients"; }

IngestResult ingest_csv(std::istream& in, const IngestOptions& options) {
  std::vector<std::vector<double>> rows;
  std::vector<double> grid;
  std::string line;
  bool header_pending = options.header;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header_pending) {
      header_pending = false;
      if (options.layout == Layout::grid) {
        grid = split_row(line, 0);
      }
      continue;
    }
    rows.push_back(split_row(line, rows.size() + 1));
  }
  return build_panel(rows, std::move(grid), options);
}

IngestResult ingest_json(const nlohmann::json& doc, const IngestOptions& options) {
  if (!doc.is_object() || !doc.contains("curves")) throw FormatError("JSON input needs a \"curves\" array");
  IngestOptions effective = options;
  if (doc.contains("basis")) {
    effective.basis = BasisSpec::band(doc.at("basis").at("start").get<int>(), doc.at("basis").at("length").get<int>());
  }
  std::vector<double> grid;
  if (effective.layout == Layout::grid && doc.contains("grid")) grid = json_numbers(doc.at("grid"), 0);
  std::vector<std::vector<double>> rows;
  const auto& curves = doc.at("curves");
  if (!curves.is_array()) throw FormatError("\"curves\" must be an array of arrays");
  rows.reserve(curves.size());
  for (const auto& c : curves) rows.push_back(json_numbers(c, rows.size() + 1));
  return build_panel(rows, std::move(grid), effective);
}

IngestResult ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open input file " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return ingest_json(doc, options);
  }
  return ingest_csv(in, options);
}

std::vector<double> read_number_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  std::vector<double> values;
  if (trim(text).starts_with("[")) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("invalid JSON in " + path.string() + ": " + e.what());
    }
    values = json_numbers(doc, 1);
  } else {
    std::size_t index = 1;
    std::string token;
    for (char ch : text + "\n") {
      if (ch == ',' || ch == ' ' || ch == '\n' || ch == '\t' || ch == '\r') {
        if (!token.empty()) values.push_back(parse_number(token, 1, index++));
        token.clear();
      } else {
        token.push_back(ch);
      }
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw DataError(1, i + 1, "non-finite value at position " + std::to_string(i + 1));
  }
  return values;
}

nlohmann::json to_json(const BasisSpec& basis) { return {{"start", basis.start}, {"length", basis.length}}; }

nlohmann::json to_json(const EigenSpectrum& spectrum) {
  return {{"rho", spectrum.kept()},
          {"d_kept", spectrum.d_kept},
          {"dimension", spectrum.rho.size()},
          {"truncation", {{"relative_floor", spectrum.rule.relative_floor}, {"mass_target", spectrum.rule.mass_target}}}};
}

nlohmann::json to_json(const TestResult& result) {
  return {{"n", result.n},
          {"t_max", round_trip(result.t_max)},
          {"k_hat", result.k_hat},
          {"theta_hat", result.theta_hat},
          {"crit", result.crit},
          {"p", result.p},
          {"reject", result.reject},
          {"bandwidth", result.bandwidth},
          {"null_seed", result.null_seed},
          {"spectrum", to_json(result.spectrum)}};
}

nlohmann::json to_json(const SegmentTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& node : tree.nodes) {
    nlohmann::json j = {{"begin", node.begin},
                        {"end", node.end},
                        {"depth", node.depth},
                        {"stop", to_string(node.stop)},
                        {"left", node.left},
                        {"right", node.right}};
    j["change_point"] = node.change_point ? nlohmann::json(*node.change_point) : nlohmann::json(nullptr);
    j["test"] = node.test ? to_json(*node.test) : nlohmann::json(nullptr);
    nodes.push_back(std::move(j));
  }
  return {{"change_points", tree.change_points}, {"multiplicity_correction", "none"}, {"nodes", nodes}};
}

nlohmann::json to_json(const ExperimentReport& report) {
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& c : report.configs) {
    nlohmann::json j = {{"setting", c.setting_id},
                        {"noise_var", c.noise_var},
                        {"n_per_group", c.n_per_group},
                        {"total_n", c.total_n},
                        {"reps", c.reps},
                        {"theta_quantiles", {{"q05", c.q05}, {"q50", c.q50}, {"q95", c.q95}}},
                        {"runtime_seconds", c.runtime_seconds}};
    j["rejection_rate"] = c.rejection_rate ? nlohmann::json(*c.rejection_rate) : nlohmann::json(nullptr);
    configs.push_back(std::move(j));
  }
  return {{"study", report.study}, {"seed", report.seed}, {"alpha", report.alpha}, {"configs", configs}};
}

nlohmann::json to_json(std::span<const LocalizationSummary> summaries) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : summaries) {
    out.push_back({{"n_per_group", s.n_per_group},
                   {"total_n", s.total_n},
                   {"reps", s.errors.size()},
                   {"median", s.median},
                   {"q25", s.q25},
                   {"q75", s.q75},
                   {"iqr", s.iqr},
                   {"mean_abs_scaled", s.mean_abs_scaled}});
  }
  return out;
}

nlohmann::json panel_to_json(const CurvePanel& panel) {
  nlohmann::json curves = nlohmann::json::array();
  for (Eigen::Index i = 0; i < panel.n(); ++i) {
    std::vector<double> row(panel.coeffs.row(i).begin(), panel.coeffs.row(i).end());
    curves.push_back(std::move(row));
  }
  return {{"layout", "coefficients"}, {"basis", to_json(panel.basis)}, {"curves", std::move(curves)}};
}

namespace {

std::string fmt17(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

template <class T>
std::string opt(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, bool>) {
    return *v ? "1" : "0";
  } else {
    return fmt17(*v);
  }
}

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "setting,noise_var,n_per_group,total_n,replicate,panel_seed,null_seed,k_hat,theta_hat,t_max,crit,p,reject\n";
  for (const auto& c : report.configs) {
    for (const auto& r : c.records) {
      out << c.setting_id << ',' << fmt17(c.noise_var) << ',' << c.n_per_group << ',' << c.total_n << ','
          << r.replicate << ',' << r.panel_seed << ',' << (r.null_seed ? std::to_string(*r.null_seed) : "") << ','
          << r.k_hat << ',' << fmt17(r.theta_hat) << ',' << fmt17(r.t_max) << ',' << opt(r.crit) << ','
          << opt(r.p) << ',' << opt(r.reject) << '\n';
    }
  }
}

void write_localization_csv(std::ostream& out, std::span<const LocalizationSummary> summaries) {
  out << "n_per_group,total_n,replicate,error,scaled_error\n";
  for (const auto& s : summaries) {
    for (std::size_t r = 0; r < s.errors.size(); ++r) {
      out << s.n_per_group << ',' << s.total_n << ',' << r << ',' << s.errors[r] << ','
          << fmt17(static_cast<double>(s.errors[r]) / static_cast<double>(s.total_n)) << '\n';
    }
  }
}

void write_tn_curve_csv(std::ostream& out, const CusumCurve& curve) {
  out << "theta,T_N\n";
  for (std::size_t k = 1; k <= curve.values.size(); ++k) {
    out << fmt17(static_cast<double>(k) / static_cast<double>(curve.n)) << ',' << fmt17(curve.values[k - 1]) << '\n';
  }
}

void write_panel_grid_csv(std::ostream& out, const CurvePanel& panel, std::span<const double> grid, bool header) {
  const Eigen::MatrixXd design = design_matrix(panel.basis, grid);
  auto write_row = [&](const auto& row) {
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      if (j > 0) out << ',';
      out << fmt17(row(j));
    }
    out << '\n';
  };
  if (header) {
    Eigen::RowVectorXd t(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t j = 0; j < grid.size(); ++j) t(static_cast<Eigen::Index>(j)) = grid[j];
    write_row(t);
  }
  for (Eigen::Index i = 0; i < panel.n(); ++i) {
    const Eigen::RowVectorXd values = (design * panel.coeffs.row(i).transpose()).transpose();
    write_row(values);
  }
}

}  // namespace covcpd
