#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace wbary::cli {

/// Flat JSON configuration ({"solver.tol": 1e-7, "penalty.kind": "entropy"}).
/// Command-line flags are written over the file values with set(), so the
/// hash covers the effective configuration.
class Config {
 public:
  Config() = default;
  static Config load(const std::filesystem::path& path);
  static Config parse(const std::string& text, const std::string& file);

  const std::string& file() const { return file_; }
  bool has(const std::string& key) const { return doc_.contains(key); }
  void set(const std::string& key, nlohmann::json value) { doc_[key] = std::move(value); }

  double number(const std::string& key, double fallback) const;
  std::size_t count(const std::string& key, std::size_t fallback) const;
  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) const;

  /// Keys sorted, compact form.
  std::string canonical() const { return doc_.dump(); }
  std::string hash() const;

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  nlohmann::json doc_ = nlohmann::json::object();
  std::string file_ = "-";
};

}  // namespace wbary::cli
