#include "io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wbary/error.hpp"

namespace wbary::cli {

using nlohmann::json;

CliError::CliError(std::string kind, std::string message, std::string file, std::string field,
                   int exit_code)
    : std::runtime_error(std::move(message)),
      kind_(std::move(kind)),
      file_(std::move(file)),
      field_(std::move(field)),
      exit_code_(exit_code) {}

std::string CliError::line() const {
  std::string msg = what();
  std::replace(msg.begin(), msg.end(), '\n', ' ');
  return "error: kind=" + kind_ + " file=" + file_ + " field=" + field_ + " message=" + msg;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("io", "cannot open file for reading", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError("io", "cannot open file for writing", path.string());
  out << text;
  if (!out) throw CliError("io", "write failed", path.string());
}

namespace {

struct Reader {
  const std::string& file;

  [[noreturn]] void fail(const std::string& field, const std::string& message) const {
    throw CliError("schema", message, file, field);
  }

  const json& member(const json& obj, const std::string& key) const {
    auto it = obj.find(key);
    if (it == obj.end()) fail(key, "missing field");
    return *it;
  }

  double number(const json& v, const std::string& field) const {
    if (!v.is_number()) fail(field, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field, "expected a finite number");
    return x;
  }

  std::size_t count(const json& v, const std::string& field) const {
    if (!v.is_number_integer() || v.get<long long>() < 1) fail(field, "expected a positive integer");
    return v.get<std::size_t>();
  }

  std::vector<double> numbers(const json& v, const std::string& field) const {
    if (!v.is_array()) fail(field, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
    }
    return out;
  }
};

Measure parse_discrete(const json& doc, const Reader& r) {
  const std::size_t dim = r.count(r.member(doc, "dim"), "dim");
  const json& pts = r.member(doc, "points");
  if (!pts.is_array()) r.fail("points", "expected an array of points");
  std::vector<double> flat;
  flat.reserve(pts.size() * dim);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::string field = "points[" + std::to_string(i) + "]";
    if (pts[i].is_number() && dim == 1) {
      flat.push_back(r.number(pts[i], field));
      continue;
    }
    const auto p = r.numbers(pts[i], field);
    if (p.size() != dim) r.fail(field, "point has " + std::to_string(p.size()) + " coordinates, dim is " + std::to_string(dim));
    flat.insert(flat.end(), p.begin(), p.end());
  }
  auto weights = r.numbers(r.member(doc, "weights"), "weights");
  if (weights.size() != pts.size()) r.fail("weights", "length differs from points");
  if (weights.empty()) r.fail("points", "measure has no atoms");
  return DiscreteMeasure(dim, std::move(flat), std::move(weights));
}

Measure parse_grid(const json& doc, const Reader& r) {
  auto lower = r.numbers(r.member(doc, "min"), "min");
  auto upper = r.numbers(r.member(doc, "max"), "max");
  const json& shape_json = r.member(doc, "shape");
  if (!shape_json.is_array()) r.fail("shape", "expected an array of positive integers");
  std::vector<std::size_t> shape;
  for (std::size_t i = 0; i < shape_json.size(); ++i) {
    shape.push_back(r.count(shape_json[i], "shape[" + std::to_string(i) + "]"));
  }
  if (lower.empty()) r.fail("min", "empty box");
  if (lower.size() != upper.size()) r.fail("max", "length differs from min");
  if (shape.size() != lower.size()) r.fail("shape", "length differs from min");
  for (std::size_t a = 0; a < lower.size(); ++a) {
    if (!(lower[a] < upper[a])) r.fail("max[" + std::to_string(a) + "]", "must exceed min");
  }
  auto values = r.numbers(r.member(doc, "values"), "values");
  std::size_t cells = 1;
  for (std::size_t s : shape) cells *= s;
  if (values.size() != cells) {
    r.fail("values", "expected " + std::to_string(cells) + " values, found " + std::to_string(values.size()));
  }
  return GridDensity(BoxDomain(std::move(lower), std::move(upper)), std::move(shape), std::move(values));
}

json number_array(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

}  // namespace

Measure parse_measure(const std::string& text, const std::string& file) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CliError("parse", e.what(), file);
  }
  const Reader r{file};
  if (!doc.is_object()) r.fail("-", "expected a JSON object");
  const json& type = r.member(doc, "type");
  if (!type.is_string()) r.fail("type", "expected a string");
  try {
    if (type == "discrete") return parse_discrete(doc, r);
    if (type == "grid") return parse_grid(doc, r);
  } catch (const wbary::InvalidArgument& e) {
    throw CliError("schema", e.what(), file);
  }
  r.fail("type", "expected \"discrete\" or \"grid\"");
}

Measure read_measure(const std::filesystem::path& path) {
  return parse_measure(read_text(path), path.string());
}

std::string measure_json(const Measure& measure) {
  json doc;
  if (const auto* d = std::get_if<DiscreteMeasure>(&measure)) {
    doc["type"] = "discrete";
    doc["dim"] = d->dim();
    json pts = json::array();
    for (std::size_t i = 0; i < d->size(); ++i) {
      const auto p = d->point(i);
      pts.push_back(number_array(std::vector<double>(p.begin(), p.end())));
    }
    doc["points"] = std::move(pts);
    doc["weights"] = number_array(d->weights());
  } else {
    const auto& g = std::get<GridDensity>(measure);
    doc["type"] = "grid";
    doc["min"] = number_array(g.domain().lower());
    doc["max"] = number_array(g.domain().upper());
    doc["shape"] = g.shape();
    doc["values"] = number_array(g.values());
  }
  return doc.dump(2) + "\n";
}

std::vector<NamedMeasure> read_measure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw CliError("io", "not a directory", dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw CliError("io", "directory holds no .json measures", dir.string());
  std::vector<NamedMeasure> out;
  for (const auto& f : files) out.push_back({f, read_measure(f)});
  return out;
}

std::string solution_json(const BarycenterSolution& solution) {
  json doc = json::parse(measure_json(solution.density));
  doc["converged"] = solution.converged;
  doc["iterations"] = solution.iterations;
  doc["objective"] = solution.objective_trace.empty() ? 0.0 : solution.objective_trace.back();
  return doc.dump(2) + "\n";
}

std::string trace_csv(const BarycenterSolution& solution) {
  std::string out = "iteration,objective\n";
  for (std::size_t t = 0; t < solution.objective_trace.size(); ++t) {
    out += std::to_string(t) + ',' + format_double(solution.objective_trace[t]) + '\n';
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string report_csv(const ExperimentReport& report) {
  std::string out = "experiment,n,p,gamma,replicate,metric,value\n";
  auto row = [&](const ReportRow& r) {
    out += r.experiment + ',' + std::to_string(r.n) + ',' + std::to_string(r.p) + ',' +
           format_double(r.gamma) + ',' + std::to_string(r.replicate) + ',' + r.metric + ',' +
           format_double(r.value) + '\n';
  };
  for (const auto& r : report.rows) row(r);
  for (const auto& c : report.checks) {
    row({report.experiment, 0, 0, 0.0, -1, "check_" + c.name, c.passed ? 1.0 : 0.0});
  }
  return out;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  json doc;
  doc["argv"] = m.argv;
  doc["config_hash"] = m.config_hash;
  doc["seed"] = m.seed;
  doc["version"] = m.version;
  doc["wall_time_seconds"] = m.wall_time_seconds;
  doc["outputs"] = m.outputs;
  return doc.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text, const std::string& file) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CliError("parse", e.what(), file);
  }
  const Reader r{file};
  if (!doc.is_object()) r.fail("-", "expected a JSON object");
  RunManifest m;
  const json& argv = r.member(doc, "argv");
  if (!argv.is_array() || argv.empty()) r.fail("argv", "expected a non-empty array of strings");
  for (std::size_t i = 0; i < argv.size(); ++i) {
    if (!argv[i].is_string()) r.fail("argv[" + std::to_string(i) + "]", "expected a string");
    m.argv.push_back(argv[i].get<std::string>());
  }
  if (auto it = doc.find("config_hash"); it != doc.end() && it->is_string()) m.config_hash = *it;
  if (auto it = doc.find("seed"); it != doc.end() && it->is_number_unsigned()) m.seed = *it;
  if (auto it = doc.find("version"); it != doc.end() && it->is_string()) m.version = *it;
  if (auto it = doc.find("wall_time_seconds"); it != doc.end() && it->is_number()) {
    m.wall_time_seconds = *it;
  }
  if (auto it = doc.find("outputs"); it != doc.end() && it->is_array()) {
    for (const auto& o : *it) {
      if (o.is_string()) m.outputs.push_back(o);
    }
  }
  return m;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
  return std::filesystem::path(output.string() + ".manifest.json");
}

}  // namespace wbary::cli
