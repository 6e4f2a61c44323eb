#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbary/experiments.hpp"
#include "wbary/measures.hpp"

namespace wbary::cli {

/// Failure reported on the diagnostic stream as one line:
///   error: kind=<kind> file=<path> field=<path> message=<text>
class CliError : public std::runtime_error {
 public:
  CliError(std::string kind, std::string message, std::string file = "-",
           std::string field = "-", int exit_code = 1);

  const std::string& kind() const { return kind_; }
  const std::string& file() const { return file_; }
  const std::string& field() const { return field_; }
  int exit_code() const { return exit_code_; }
  std::string line() const;

 private:
  std::string kind_;
  std::string file_;
  std::string field_;
  int exit_code_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Measure JSON:
///   {"type": "discrete", "dim": d, "points": [[x...], ...], "weights": [...]}
///   {"type": "grid", "min": [...], "max": [...], "shape": [...], "values": [...]}
/// Grid values are row-major with the last axis fastest. `file` is only used
/// in error messages.
Measure parse_measure(const std::string& text, const std::string& file);
Measure read_measure(const std::filesystem::path& path);
std::string measure_json(const Measure& measure);

struct NamedMeasure {
  std::filesystem::path file;
  Measure measure;
};

/// Every *.json file of a directory in lexicographic order.
std::vector<NamedMeasure> read_measure_dir(const std::filesystem::path& dir);

/// Grid schema plus "converged", "iterations" and "objective".
std::string solution_json(const BarycenterSolution& solution);
/// iteration,objective
std::string trace_csv(const BarycenterSolution& solution);

/// %.17g, which round-trips every double.
std::string format_double(double v);

/// CSV with header experiment,n,p,gamma,replicate,metric,value. Checks are
/// appended as aggregate rows named check_<name> with value 1 or 0.
std::string report_csv(const ExperimentReport& report);

std::string fnv1a_hex(const std::string& data);

struct RunManifest {
  std::vector<std::string> argv;  // without the program name
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version;
  double wall_time_seconds = 0.0;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text, const std::string& file);

/// <output>.manifest.json
std::filesystem::path manifest_path(const std::filesystem::path& output);

}  // namespace wbary::cli
