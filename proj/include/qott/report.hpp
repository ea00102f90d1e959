#pragma once

// Machine-readable run reports: every CLI command emits one envelope with
// the command echo, seed, parameters, and a list of named checks, each
// carrying its value, bound, tolerance and pass flag.

#include <chrono>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qott {

inline constexpr const char* report_schema_version = "1.0";

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  std::string comparison;  // "<=", ">=", "=="
  double tolerance = 0.0;
  bool pass = false;
};

inline Check check_le(const std::string& name, double value, double bound,
                      double tolerance = 0.0) {
  return Check{name, value, bound, "<=", tolerance, value <= bound + tolerance};
}

inline Check check_ge(const std::string& name, double value, double bound,
                      double tolerance = 0.0) {
  return Check{name, value, bound, ">=", tolerance, value >= bound - tolerance};
}

inline Check check_eq(const std::string& name, double value, double bound,
                      double tolerance) {
  return Check{name, value, bound, "==", tolerance,
               std::abs(value - bound) <= tolerance};
}

struct ReportEnvelope {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json parameters = nlohmann::json::object();
  std::vector<Check> checks;
  double wall_time_seconds = 0.0;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = report_schema_version;
    j["command"] = command;
    j["seed"] = seed;
    j["parameters"] = parameters;
    j["wall_time_seconds"] = wall_time_seconds;
    j["all_pass"] = all_pass();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json jc;
      jc["name"] = c.name;
      jc["value"] = c.value;
      jc["bound"] = c.bound;
      jc["comparison"] = c.comparison;
      jc["tolerance"] = c.tolerance;
      jc["pass"] = c.pass;
      j["checks"].push_back(std::move(jc));
    }
    return j;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "name,value,bound,comparison,tolerance,pass\n";
    for (const auto& c : checks)
      out << c.name << ',' << c.value << ',' << c.bound << ','
          << c.comparison << ',' << c.tolerance << ','
          << (c.pass ? "true" : "false") << '\n';
    return out.str();
  }

  void write(const std::string& path, const std::string& format) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open report file: " + path);
    if (format == "csv")
      out << to_csv();
    else
      out << to_json().dump(2) << '\n';
  }
};

/// Scope timer filling the envelope's wall time.
class ReportTimer {
 public:
  explicit ReportTimer(ReportEnvelope& env)
      : env_(env), start_(std::chrono::steady_clock::now()) {}
  ~ReportTimer() {
    env_.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      start_)
            .count();
  }

 private:
  ReportEnvelope& env_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace qott
