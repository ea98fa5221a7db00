#pragma once

// Experiment configuration: a single JSON document describing the network,
// the sampler run, the studies to perform, and the outputs to write.
//
//   {
//     "network": {
//       "d": 1, "eta": 1.0, "n": 1, "m": 1,
//       "edges": [{"i": 0, "j": 0, "sigma": 1.0}],
//       "f": [{"kind": "quadratic", "center": [0.0], "precision": 2.0}],
//       "g": [{"kind": "zero"}]
//     },
//     "run": {"enabled": true, "seed": 0, "K": 50, "n_chains": 10000,
//             "mode": "sequential", "max_proposals": 1000000,
//             "init": {"kind": "fixed", "x0": [[0.0]]}},
//     "study": {"rate_report": true, "empirical_kl": true, "delta": 0.01,
//               "small_eta": {"etas": [0.1, 0.05, 0.01]}},
//     "output": {"trace": true, "trace_chains": 10000}
//   }
//
// "precision" is a scalar (p I), a length-d array (diagonal) or a d x d array.
// "offset" defaults to 0. Gaussian initial laws use
//   {"kind": "gaussian", "mean": [...d], "cov": [[...d] ...d]}
// and are applied independently at every X vertex.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gibbsnet/error.hpp"
#include "gibbsnet/graph.hpp"

namespace gibbsnet {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ")"
                       : what),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

struct PotentialConfig {
  enum class Kind { Quadratic, Zero };
  enum class PrecisionForm { Scalar, Diagonal, Full };

  Kind kind = Kind::Zero;
  std::vector<double> center;
  PrecisionForm form = PrecisionForm::Scalar;
  std::vector<double> precision;  // 1, d or d*d (row-major) values
  double offset = 0.0;

  bool operator==(const PotentialConfig&) const = default;
};

struct EdgeConfig {
  int i = 0;
  int j = 0;
  double sigma = 1.0;
  bool operator==(const EdgeConfig&) const = default;
};

struct NetworkConfig {
  int d = 1;
  double eta = 1.0;
  int n = 1;
  int m = 1;
  std::vector<EdgeConfig> edges;
  std::vector<PotentialConfig> f;
  std::vector<PotentialConfig> g;
  bool operator==(const NetworkConfig&) const = default;
};

struct InitConfig {
  enum class Kind { Fixed, Gaussian };
  Kind kind = Kind::Fixed;
  std::vector<double> x0;    // n*d row-major; empty means the origin
  std::vector<double> mean;  // d
  std::vector<double> cov;   // d*d row-major
  bool operator==(const InitConfig&) const = default;
};

enum class RunMode { Sequential, DistributedSim };

struct RunConfig {
  bool enabled = true;
  std::uint64_t seed = 0;
  std::uint64_t K = 50;
  std::uint64_t n_chains = 10'000;
  RunMode mode = RunMode::Sequential;
  long max_proposals = 1'000'000;
  InitConfig init;
  bool operator==(const RunConfig&) const = default;
};

struct StudyConfig {
  bool rate_report = true;
  bool empirical_kl = true;
  double delta = 0.01;
  std::vector<double> small_eta;  // empty disables the study
  bool operator==(const StudyConfig&) const = default;
};

struct OutputConfig {
  bool trace = true;
  std::optional<std::uint64_t> trace_chains;  // default: every chain
  bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
  NetworkConfig network;
  RunConfig run;
  StudyConfig study;
  OutputConfig output;
  bool operator==(const ExperimentConfig&) const = default;
};

// Parses and validates; every default is filled in. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical JSON text with every field explicit; parse_config of the result
// reproduces the same ExperimentConfig.
std::string to_json(const ExperimentConfig& cfg, int indent = 2);

Potential build_potential(const PotentialConfig& p, int d);
BipartiteNetwork build_network(const NetworkConfig& net);

}  // namespace gibbsnet
