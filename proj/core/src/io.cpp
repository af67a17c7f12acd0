#include "moc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "moc/error.hpp"

namespace moc {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::MatrixXd;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(std::string_view tok, int line) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    throw ParseError(line, "line " + std::to_string(line) + ": cannot parse '" + std::string(tok) +
                               "' as a number");
  }
  if (!std::isfinite(v)) {
    throw ParseError(line, "line " + std::to_string(line) + ": non-finite value");
  }
  return v;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return out;
}

struct NumericRow {
  int line;
  std::vector<double> values;
};

// Blank lines are skipped; every other line must be a full numeric row.
std::vector<NumericRow> read_numeric_rows(std::istream& in, int first_line) {
  std::vector<NumericRow> rows;
  std::string line;
  int lineno = first_line - 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    NumericRow row{lineno, {}};
    for (std::string_view tok : split(line)) row.values.push_back(parse_double(tok, lineno));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixXd to_matrix(const std::vector<NumericRow>& rows, const std::string& what) {
  if (rows.empty()) throw ParseError(0, what + ": no data rows");
  const std::size_t cols = rows.front().values.size();
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].values.size() != cols) {
      throw ParseError(rows[r].line, what + ": line " + std::to_string(rows[r].line) + " has " +
                                         std::to_string(rows[r].values.size()) + " values, expected " +
                                         std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r].values[c];
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

MatrixXd read_matrix_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  return to_matrix(read_numeric_rows(in, 1), path.string());
}

void write_matrix_csv(std::ostream& out, const MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

void write_matrix_csv(const fs::path& path, const MatrixXd& m) {
  std::ofstream out = open_out(path);
  write_matrix_csv(out, m);
}

ViewEmbeddingSequence read_embeddings_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) throw ParseError(1, path.string() + ": missing header");
  const auto cols = split(header);
  if (cols.size() < 2 || cols[0] != "azimuth_deg") {
    throw ParseError(1, "line 1: header must be azimuth_deg,e_0,...,e_{D-1}");
  }
  for (std::size_t i = 1; i < cols.size(); ++i) {
    if (cols[i] != "e_" + std::to_string(i - 1)) {
      throw ParseError(1, "line 1: expected column e_" + std::to_string(i - 1) + ", got '" +
                              std::string(cols[i]) + "'");
    }
  }
  const std::vector<NumericRow> rows = read_numeric_rows(in, 2);
  for (const NumericRow& r : rows) {
    if (r.values.size() != cols.size()) {
      throw ParseError(r.line, "line " + std::to_string(r.line) + ": expected " +
                                   std::to_string(cols.size()) + " values");
    }
    if (!(r.values[0] >= 0.0 && r.values[0] < 360.0)) {
      throw ParseError(r.line, "line " + std::to_string(r.line) + ": azimuth outside [0, 360)");
    }
  }
  const auto refs = std::count_if(rows.begin(), rows.end(),
                                  [](const NumericRow& r) { return r.values[0] == 0.0; });
  if (refs != 1) {
    throw Error(ErrorKind::MissingReference,
                path.string() + ": expected exactly one azimuth-0 reference row, found " +
                    std::to_string(refs));
  }

  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rows[a].values[0] < rows[b].values[0]; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (rows[order[i]].values[0] == rows[order[i - 1]].values[0]) {
      const int line = rows[order[i]].line;
      throw ParseError(line, "line " + std::to_string(line) + ": duplicate azimuth");
    }
  }
  if (order.size() < 2) {
    throw Error(ErrorKind::InvalidInput, path.string() + ": need at least one non-reference view");
  }

  const Index dim = static_cast<Index>(cols.size() - 1);
  MatrixXd raw(static_cast<Index>(rows.size()), dim);
  std::vector<double> azimuths;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NumericRow& r = rows[order[i]];
    for (Index c = 0; c < dim; ++c) raw(static_cast<Index>(i), c) = r.values[static_cast<std::size_t>(c) + 1];
    if (i > 0) azimuths.push_back(r.values[0]);
  }
  return ViewEmbeddingSequence(std::move(raw), std::move(azimuths));
}

void write_embeddings_csv(const fs::path& path, const ViewEmbeddingSequence& vs) {
  std::ofstream out = open_out(path);
  out << "azimuth_deg";
  for (Index c = 0; c < vs.embedding_dim(); ++c) out << ",e_" << c;
  out << '\n';
  for (Index r = 0; r < vs.raw().rows(); ++r) {
    out << format_double(r == 0 ? 0.0 : vs.azimuths()[static_cast<std::size_t>(r - 1)]);
    for (Index c = 0; c < vs.embedding_dim(); ++c) out << ',' << format_double(vs.raw()(r, c));
    out << '\n';
  }
}

std::string view_file_name(double azimuth) { return "view_" + format_double(azimuth) + ".csv"; }

FeatureMapStack read_feature_stack(const fs::path& dir) {
  const fs::path sidecar = dir / "stack.json";
  std::ifstream in = open_in(sidecar);
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, sidecar.string() + ": " + e.what());
  }
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> azimuths;
  try {
    height = meta.at("height").get<int>();
    width = meta.at("width").get<int>();
    channels = meta.at("channels").get<int>();
    azimuths = meta.at("azimuths").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ShapeError, sidecar.string() + ": " + e.what());
  }
  if (channels != kLatentChannels || height < 1 || width < 1 || azimuths.empty()) {
    throw Error(ErrorKind::ShapeError, sidecar.string() +
                                           ": need channels == 4, positive height/width and at least one azimuth");
  }
  std::vector<FeatureMap> maps;
  for (double az : azimuths) {
    const fs::path file = dir / view_file_name(az);
    if (!fs::exists(file)) {
      throw Error(ErrorKind::ShapeError, "sidecar lists azimuth " + format_double(az) + " but " +
                                             file.string() + " is missing");
    }
    const MatrixXd m = read_matrix_csv(file);
    if (m.rows() != Index{channels} * height || m.cols() != width) {
      throw Error(ErrorKind::ShapeError, file.string() + " is " + std::to_string(m.rows()) + "x" +
                                             std::to_string(m.cols()) + ", sidecar implies " +
                                             std::to_string(channels * height) + "x" +
                                             std::to_string(width));
    }
    maps.emplace_back(m, channels);
  }
  return FeatureMapStack(std::move(maps), std::move(azimuths));
}

void write_feature_stack(const fs::path& dir, const FeatureMapStack& stack) {
  fs::create_directories(dir);
  nlohmann::json meta = {{"height", stack.height()},
                         {"width", stack.width()},
                         {"channels", stack.views().front().channels()},
                         {"azimuths", stack.azimuths()}};
  {
    std::ofstream out = open_out(dir / "stack.json");
    out << meta.dump(2) << '\n';
  }
  for (std::size_t i = 0; i < stack.size(); ++i) {
    write_matrix_csv(dir / view_file_name(stack.azimuths()[i]), stack.views()[i].stacked());
  }
}

namespace {

class ConfigReader {
 public:
  template <typename T>
  void read(const nlohmann::json& obj, const char* key, const std::string& path, T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
      const auto& v = obj.at(key);
      if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_unsigned()) bad_.push_back(path + key);
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) bad_.push_back(path + key);
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) bad_.push_back(path + key);
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) bad_.push_back(path + key);
      }
    } catch (const nlohmann::json::exception&) {
      bad_.push_back(path + key);
    }
  }

  void unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                    const std::string& path) {
    for (const auto& [k, _] : obj.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
        bad_.push_back(path + k);
      }
    }
  }

  void flag(const std::string& key) { bad_.push_back(key); }
  const std::vector<std::string>& bad() const { return bad_; }

 private:
  std::vector<std::string> bad_;
};

std::string join(const std::vector<std::string>& keys) {
  std::string s;
  for (const auto& k : keys) s += (s.empty() ? "" : ", ") + k;
  return s;
}

}  // namespace

HarnessConfig parse_harness_config(const std::string& json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");

  ConfigReader rd;
  HarnessConfig cfg;
  rd.unknown_keys(root, {"scene", "optimizer", "schedule", "seed", "margin", "eps"}, "");
  rd.read(root, "seed", "", cfg.seed);
  rd.read(root, "margin", "", cfg.margin);
  rd.read(root, "eps", "", cfg.eps);

  auto block = [&](const char* name) -> const nlohmann::json* {
    if (!root.contains(name)) return nullptr;
    if (!root[name].is_object()) {
      rd.flag(name);
      return nullptr;
    }
    return &root[name];
  };

  if (const auto* s = block("scene")) {
    rd.unknown_keys(*s, {"views", "azimuths", "d_clip", "height", "width", "patch", "tex_dim", "janus_init"},
                    "scene.");
    rd.read(*s, "views", "scene.", cfg.scene.views);
    rd.read(*s, "azimuths", "scene.", cfg.scene.azimuths);
    rd.read(*s, "d_clip", "scene.", cfg.scene.d_clip);
    rd.read(*s, "height", "scene.", cfg.scene.height);
    rd.read(*s, "width", "scene.", cfg.scene.width);
    rd.read(*s, "patch", "scene.", cfg.scene.patch);
    rd.read(*s, "tex_dim", "scene.", cfg.scene.tex_dim);
    rd.read(*s, "janus_init", "scene.", cfg.scene.janus_init);
  }
  if (const auto* s = block("schedule")) {
    rd.unknown_keys(*s, {"total_steps", "warmup_steps", "svo_initial", "svo_final", "spd_base",
                         "spd_peak", "spd_ramp_start"},
                    "schedule.");
    int total = cfg.schedule.total_steps;
    rd.read(*s, "total_steps", "schedule.", total);
    cfg.schedule = ScheduleConfig::defaults(total);
    cfg.optimizer.iterations = total;
    rd.read(*s, "warmup_steps", "schedule.", cfg.schedule.warmup_steps);
    rd.read(*s, "svo_initial", "schedule.", cfg.schedule.svo_initial);
    rd.read(*s, "svo_final", "schedule.", cfg.schedule.svo_final);
    rd.read(*s, "spd_base", "schedule.", cfg.schedule.spd_base);
    rd.read(*s, "spd_peak", "schedule.", cfg.schedule.spd_peak);
    rd.read(*s, "spd_ramp_start", "schedule.", cfg.schedule.spd_ramp_start);
  }
  if (const auto* s = block("optimizer")) {
    rd.unknown_keys(*s, {"step_size", "iterations"}, "optimizer.");
    rd.read(*s, "step_size", "optimizer.", cfg.optimizer.step_size);
    rd.read(*s, "iterations", "optimizer.", cfg.optimizer.iterations);
  }
  if (!rd.bad().empty()) {
    throw Error(ErrorKind::ConfigError, "invalid config keys: " + join(rd.bad()));
  }
  cfg.validate();
  return cfg;
}

HarnessConfig read_harness_config(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_harness_config(ss.str());
}

void write_trace_csv(std::ostream& out, const OptimizationTrace& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace.records) {
    out << r.iter << ',' << format_double(r.total) << ',' << format_double(r.r_svo) << ','
        << format_double(r.r_spd) << ',' << format_double(r.lambda_svo) << ','
        << format_double(r.lambda_spd) << ',' << format_double(r.min_gap) << ','
        << format_double(r.lem_dist) << '\n';
  }
}

void write_trace_csv(const fs::path& path, const OptimizationTrace& trace) {
  std::ofstream out = open_out(path);
  write_trace_csv(out, trace);
}

std::vector<TraceRecord> read_trace_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header) || trim(header) != kTraceHeader) {
    throw ParseError(1, path.string() + ": unexpected trace header");
  }
  std::vector<TraceRecord> out;
  for (const NumericRow& r : read_numeric_rows(in, 2)) {
    if (r.values.size() != 8) {
      throw ParseError(r.line, "line " + std::to_string(r.line) + ": expected 8 columns");
    }
    const auto& v = r.values;
    out.push_back({static_cast<int>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return out;
}

}  // namespace moc
