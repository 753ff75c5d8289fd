#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "mdlab/config.hpp"

namespace mdlab {

enum ExitCode : int { kExitOk = 0, kExitTaskFailure = 1, kExitConfig = 2, kExitRefused = 3 };

// Everything a run produces, held in memory until the end.
struct RunArtifacts {
  std::vector<std::pair<std::string, std::string>> files;  // name -> content (data files)
  std::vector<std::string> truncations;
  std::vector<std::string> refusals;
  std::vector<std::string> warnings;
  std::string verdict = "ok";
  std::string summary;  // one human-readable line
  int exit_code = kExitOk;

  void add_file(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
  const std::string* file(const std::string& name) const;
};

// Runs a parsed config without touching the filesystem.
// ConfigError/DomainError/UnsupportedError propagate; CapacityError is
// turned into a refusal with exit code 3.
RunArtifacts execute(const ExperimentConfig& config);

// Deterministic manifest (no timestamps).
std::string manifest_json(const ExperimentConfig& config, const RunArtifacts& a);

// Parses, validates, executes and writes outputs plus manifest.json and
// timing.json into the output directory. Nothing is written when the
// config is rejected. Returns the exit code.
int run_config_file(const std::filesystem::path& config_path, const std::filesystem::path& output_override,
                    std::ostream& out, std::ostream& err);

// Writes the files of a finished run into dir.
void write_artifacts(const std::filesystem::path& dir, const RunArtifacts& a, const std::string& manifest,
                     double wall_seconds);

std::string library_version();

}  // namespace mdlab
