#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace advclaim::cli {

enum ExitCode : int { kOk = 0, kPartialFailure = 1, kConfigError = 2, kIoError = 3 };

struct RunOptions {
  std::filesystem::path out;
  bool allow_mismatch = false;
  std::optional<std::string> model;  // restricts attack/eval/explain/gan-attack to one model
  std::optional<std::size_t> top_k;  // explain
};

// Output layout below RunOptions::out.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path snapshot() const { return root / "snapshot" / "dataset.json"; }
  std::filesystem::path snapshot_summary() const { return root / "snapshot" / "summary.json"; }
  std::filesystem::path model(const std::string& name) const { return root / "models" / (name + ".json"); }
  std::filesystem::path attacks() const { return root / "attacks"; }
  std::filesystem::path ganrl(const std::string& target) const { return root / "ganrl" / target; }
  std::filesystem::path reports() const { return root / "reports"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
  std::filesystem::path lock() const { return root / ".advclaim.lock"; }
};

// Each returns an ExitCode. Library errors propagate as exceptions; run_cli
// maps them to exit codes.
int cmd_prepare(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);
int cmd_train(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);
int cmd_attack(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);
int cmd_gan_attack(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);
int cmd_eval(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);
int cmd_explain(const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);

int run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opt, std::ostream& log);

// Full command line handling: parsing, config loading, locking, --verify and
// exception-to-exit-code mapping.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace advclaim::cli
