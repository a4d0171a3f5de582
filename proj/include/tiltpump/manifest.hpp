#pragma once

#include "tiltpump/config.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace tiltpump {

/// FNV-1a 64-bit checksum of a file (recorded per artifact for
/// reproducibility comparisons).
inline std::string fnv1a_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ull;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Regression record: a measured value against its expectation. source
/// marks where the expectation comes from: "literature" (published
/// number), "analytic" (exact algebra), or "numerical-oracle" (value from
/// an independent computation).
struct Check {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string source;
  bool pass = false;
};

class RunManifest {
 public:
  RunManifest(std::string experiment, const ExperimentConfig& cfg) : experiment_(std::move(experiment)), cfg_(cfg) {
    start_ = std::chrono::steady_clock::now();
  }

  bool check(const std::string& name, double measured, double expected, double tol, const std::string& source) {
    Check c{name, measured, expected, tol, source, std::abs(measured - expected) <= tol};
    checks_.push_back(c);
    return c.pass;
  }

  /// Boolean condition with a descriptive name (tolerance-free).
  bool check_flag(const std::string& name, bool pass, const std::string& source) {
    checks_.push_back({name, pass ? 1.0 : 0.0, 1.0, 0.0, source, pass});
    return pass;
  }

  void note(const std::string& key, const nlohmann::json& value) { notes_[key] = value; }
  void artifact(const std::filesystem::path& path) { artifacts_.push_back(path); }
  void warning(const std::string& message) { warnings_.push_back(message); }

  bool all_passed() const {
    for (const auto& c : checks_) {
      if (!c.pass) return false;
    }
    return true;
  }
  bool has_warnings() const { return !warnings_.empty(); }
  const std::vector<Check>& checks() const { return checks_; }

  void write(const std::filesystem::path& path) const {
    nlohmann::json doc;
    doc["schema"] = "tiltpump-manifest/1";
    doc["version"] = kVersion;
    doc["experiment"] = experiment_;
    doc["params"] = params_to_json(cfg_.params);
    doc["controls"] = cfg_.controls;
    doc["strict"] = cfg_.strict;
    doc["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    doc["checks"] = nlohmann::json::array();
    for (const auto& c : checks_)
      doc["checks"].push_back({{"name", c.name},
                               {"measured", c.measured},
                               {"expected", c.expected},
                               {"tolerance", c.tolerance},
                               {"source", c.source},
                               {"pass", c.pass}});
    doc["warnings"] = warnings_;
    doc["notes"] = notes_;
    doc["artifacts"] = nlohmann::json::array();
    for (const auto& a : artifacts_)
      doc["artifacts"].push_back({{"path", a.string()}, {"fnv1a", fnv1a_hex(a)}});
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
  }

 private:
  std::string experiment_;
  ExperimentConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::vector<Check> checks_;
  std::vector<std::string> warnings_;
  std::vector<std::filesystem::path> artifacts_;
  nlohmann::json notes_ = nlohmann::json::object();
};

}  // namespace tiltpump
