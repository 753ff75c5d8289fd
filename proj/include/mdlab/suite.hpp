#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace mdlab {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

using DataFiles = std::map<std::string, std::string>;

inline constexpr std::uint64_t kAcceptanceSeed = 20240611;

// Criteria 1..8 on the pinned configurations. Data files are deterministic in the seed.
std::vector<CriterionResult> run_acceptance_criteria(std::uint64_t seed, DataFiles& files,
                                                     const std::function<void(const CriterionResult&)>& on_result = {});

// All nine criteria; criterion 9 reruns 1..8 and compares the data files byte by byte.
std::vector<CriterionResult> run_acceptance(std::uint64_t seed, DataFiles& files,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

// Counterexample-chain MDP scan, labeled as expected non-convergence.
DataFiles run_demo(std::uint64_t seed, std::ostream& out);

std::string format_criterion(const CriterionResult& r);

// CLI entry: "acceptance" or "demo". Unknown name -> 2; failing criterion -> 1.
int run_suite(const std::string& name, const std::filesystem::path& output_dir, std::ostream& out, std::ostream& err);

void write_data_files(const std::filesystem::path& dir, const DataFiles& files);

}  // namespace mdlab
