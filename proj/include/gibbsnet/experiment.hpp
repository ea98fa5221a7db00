#pragma once

// Config-driven experiment runner. Writes into an output directory:
//   trace.csv     chain,k,side,vertex,coord0..coord{d-1},proposals
//   report.csv    study,key,value
//   manifest.json echoed config, seed, library version, status

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "gibbsnet/config.hpp"

namespace gibbsnet {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct ExperimentOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  bool quiet = false;
};

struct ReportRow {
  std::string study;
  std::string key;
  double value;
};

struct ExperimentResult {
  int exit_status = 0;
  std::string error;  // empty on success
  std::vector<ReportRow> report;
};

// Shortest round-trip decimal form with at most 17 significant digits.
std::string format_double(double v);

// Runs every enabled part of cfg. Sampler errors stop the run; artifacts
// written so far are kept and the manifest records the error.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                const ExperimentOptions& options = {});

// Rate report rows for cfg's network (no sampling).
std::vector<ReportRow> rate_rows(const ExperimentConfig& cfg);

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

}  // namespace gibbsnet
