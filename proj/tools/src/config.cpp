#include "config.hpp"

#include <cmath>

#include "io.hpp"

namespace wbary::cli {

using nlohmann::json;

Config Config::load(const std::filesystem::path& path) {
  return parse(read_text(path), path.string());
}

Config Config::parse(const std::string& text, const std::string& file) {
  Config c;
  c.file_ = file;
  try {
    c.doc_ = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CliError("parse", e.what(), file);
  }
  if (!c.doc_.is_object()) throw CliError("schema", "config must be a JSON object", file);
  for (const auto& [key, value] : c.doc_.items()) {
    if (value.is_object()) c.fail(key, "nested objects are not allowed; use flat dotted keys");
  }
  return c;
}

void Config::fail(const std::string& key, const std::string& message) const {
  throw CliError("schema", message, file_, key);
}

double Config::number(const std::string& key, double fallback) const {
  auto it = doc_.find(key);
  if (it == doc_.end()) return fallback;
  if (!it->is_number() || !std::isfinite(it->get<double>())) fail(key, "expected a finite number");
  return it->get<double>();
}

std::size_t Config::count(const std::string& key, std::size_t fallback) const {
  auto it = doc_.find(key);
  if (it == doc_.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    fail(key, "expected a positive integer");
  }
  return it->get<std::size_t>();
}

std::uint64_t Config::seed(const std::string& key, std::uint64_t fallback) const {
  auto it = doc_.find(key);
  if (it == doc_.end()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    fail(key, "expected a nonnegative integer");
  }
  return it->get<std::uint64_t>();
}

std::string Config::text(const std::string& key, const std::string& fallback) const {
  auto it = doc_.find(key);
  if (it == doc_.end()) return fallback;
  if (!it->is_string()) fail(key, "expected a string");
  return it->get<std::string>();
}

std::vector<double> Config::numbers(const std::string& key, std::vector<double> fallback) const {
  auto it = doc_.find(key);
  if (it == doc_.end()) return fallback;
  if (it->is_number()) return {number(key, 0.0)};
  if (!it->is_array() || it->empty()) fail(key, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(key + "[" + std::to_string(i) + "]", "expected a finite number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<std::size_t> Config::counts(const std::string& key,
                                        std::vector<std::size_t> fallback) const {
  auto it = doc_.find(key);
  if (it == doc_.end()) return fallback;
  if (it->is_number()) return {count(key, 1)};
  if (!it->is_array() || it->empty()) fail(key, "expected a non-empty array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      fail(key + "[" + std::to_string(i) + "]", "expected a positive integer");
    }
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

std::string Config::hash() const { return fnv1a_hex(canonical()); }

}  // namespace wbary::cli
