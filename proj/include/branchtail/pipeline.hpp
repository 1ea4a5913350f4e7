#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "branchtail/config.hpp"
#include "branchtail/errors.hpp"

namespace branchtail {

/// Output directory; created on first write.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Deterministic CSV number format (17 significant digits).
std::string format_number(double v);

/// 0 ok, 2 validation, 3 non-convergence, 4 unsupported regime.
int exit_code_for(ErrorKind kind) noexcept;
Json diagnostic(const Error& e);

const std::vector<std::string>& command_names();

// Each stage writes its artifacts and returns its JSON report.
Json run_classify(const ExperimentSpec& s, const Artifacts& out);
Json run_stability(const ExperimentSpec& s, const Artifacts& out);
Json run_conditions(const ExperimentSpec& s, const Artifacts& out);
Json run_predict(const ExperimentSpec& s, const Artifacts& out);
Json run_solve(const ExperimentSpec& s, const Artifacts& out);
Json run_simulate(const ExperimentSpec& s, const Artifacts& out);
Json run_verify(const ExperimentSpec& s, const Artifacts& out);
Json run_walkmax(const ExperimentSpec& s, const Artifacts& out);

/// Writes config.resolved.json, then runs `command`.
Json run_command(const std::string& command, const ExperimentSpec& s, const Artifacts& out);

}  // namespace branchtail
