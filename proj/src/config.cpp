#include "gibbsnet/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gibbsnet {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  const std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ConfigError(path + ": unknown key \"" + key + "\"");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path + "." + key + ": wrong type");
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path + ": missing \"" + key + "\"");
  return get_or<T>(obj, key, path, T{});
}

std::uint64_t get_count(const json& obj, const char* key, const std::string& path,
                        std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ConfigError(path + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ConfigError(path + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// Row-major flattening of a rows x cols nested array.
std::vector<double> matrix(const json& v, std::size_t rows, std::size_t cols,
                           const std::string& path) {
  if (!v.is_array() || v.size() != rows) {
    throw ConfigError(path + ": expected " + std::to_string(rows) + " rows");
  }
  std::vector<double> out;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::vector<double> row = numbers(v[r], path + "[" + std::to_string(r) + "]");
    if (row.size() != cols) {
      throw ConfigError(path + "[" + std::to_string(r) + "]: expected " + std::to_string(cols) +
                        " columns");
    }
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

json nested(const std::vector<double>& flat, std::size_t cols) {
  json out = json::array();
  for (std::size_t r = 0; r * cols < flat.size(); ++r) {
    out.push_back(std::vector<double>(flat.begin() + static_cast<long>(r * cols),
                                      flat.begin() + static_cast<long>((r + 1) * cols)));
  }
  return out;
}

PotentialConfig parse_potential(const json& v, int d, const std::string& path) {
  check_keys(v, path, {"kind", "center", "precision", "offset"});
  PotentialConfig p;
  const auto kind = require<std::string>(v, "kind", path);
  const auto ud = static_cast<std::size_t>(d);
  if (kind == "zero") {
    if (v.contains("center") || v.contains("precision") || v.contains("offset")) {
      throw ConfigError(path + ": a zero potential takes no parameters");
    }
    p.kind = PotentialConfig::Kind::Zero;
    return p;
  }
  if (kind != "quadratic") {
    throw ConfigError(path + ".kind: expected \"quadratic\" or \"zero\", got \"" + kind + "\"");
  }
  p.kind = PotentialConfig::Kind::Quadratic;
  if (!v.contains("center")) throw ConfigError(path + ": missing \"center\"");
  p.center = numbers(v.at("center"), path + ".center");
  if (p.center.size() != ud) throw ConfigError(path + ".center: expected length d");
  if (!v.contains("precision")) throw ConfigError(path + ": missing \"precision\"");
  const json& prec = v.at("precision");
  if (prec.is_number()) {
    p.form = PotentialConfig::PrecisionForm::Scalar;
    p.precision = {prec.get<double>()};
  } else if (prec.is_array() && !prec.empty() && prec.front().is_array()) {
    p.form = PotentialConfig::PrecisionForm::Full;
    p.precision = matrix(prec, ud, ud, path + ".precision");
  } else {
    p.form = PotentialConfig::PrecisionForm::Diagonal;
    p.precision = numbers(prec, path + ".precision");
    if (p.precision.size() != ud) throw ConfigError(path + ".precision: expected length d");
  }
  p.offset = get_or<double>(v, "offset", path, 0.0);
  return p;
}

json potential_json(const PotentialConfig& p, int d) {
  if (p.kind == PotentialConfig::Kind::Zero) return {{"kind", "zero"}};
  json out = {{"kind", "quadratic"}, {"center", p.center}, {"offset", p.offset}};
  switch (p.form) {
    case PotentialConfig::PrecisionForm::Scalar:
      out["precision"] = p.precision.front();
      break;
    case PotentialConfig::PrecisionForm::Diagonal:
      out["precision"] = p.precision;
      break;
    case PotentialConfig::PrecisionForm::Full:
      out["precision"] = nested(p.precision, static_cast<std::size_t>(d));
      break;
  }
  return out;
}

std::vector<PotentialConfig> parse_potentials(const json& net, const char* side, int count,
                                              int d) {
  const std::string path = std::string("network.") + side;
  if (!net.contains(side)) throw ConfigError("network: missing \"" + std::string(side) + "\"");
  const json& arr = net.at(side);
  if (!arr.is_array()) throw ConfigError(path + ": expected an array");
  if (static_cast<int>(arr.size()) < count) {
    throw ConfigError(path + ": missing potential for vertex " + std::to_string(arr.size()) +
                      " (expected " + std::to_string(count) + " entries)");
  }
  if (static_cast<int>(arr.size()) > count) {
    throw ConfigError(path + ": " + std::to_string(arr.size()) + " entries for " +
                      std::to_string(count) + " vertices");
  }
  std::vector<PotentialConfig> out;
  for (int k = 0; k < count; ++k) {
    out.push_back(parse_potential(arr[static_cast<std::size_t>(k)], d,
                                  path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

NetworkConfig parse_network(const json& v) {
  check_keys(v, "network", {"d", "eta", "n", "m", "edges", "f", "g"});
  NetworkConfig net;
  net.d = require<int>(v, "d", "network");
  net.eta = require<double>(v, "eta", "network");
  net.n = require<int>(v, "n", "network");
  net.m = require<int>(v, "m", "network");
  if (net.d < 1 || net.n < 1 || net.m < 1) throw ConfigError("network: d, n and m must be >= 1");
  if (!(net.eta > 0.0)) throw ConfigError("network.eta: must be positive");
  if (!v.contains("edges") || !v.at("edges").is_array()) {
    throw ConfigError("network: missing \"edges\" array");
  }
  for (std::size_t k = 0; k < v.at("edges").size(); ++k) {
    const std::string path = "network.edges[" + std::to_string(k) + "]";
    const json& e = v.at("edges")[k];
    check_keys(e, path, {"i", "j", "sigma"});
    net.edges.push_back({require<int>(e, "i", path), require<int>(e, "j", path),
                         require<double>(e, "sigma", path)});
  }
  net.f = parse_potentials(v, "f", net.n, net.d);
  net.g = parse_potentials(v, "g", net.m, net.d);
  return net;
}

InitConfig parse_init(const json& v, const NetworkConfig& net) {
  check_keys(v, "run.init", {"kind", "x0", "mean", "cov"});
  InitConfig init;
  const auto kind = require<std::string>(v, "kind", "run.init");
  const auto ud = static_cast<std::size_t>(net.d);
  if (kind == "fixed") {
    init.kind = InitConfig::Kind::Fixed;
    if (v.contains("x0")) init.x0 = matrix(v.at("x0"), static_cast<std::size_t>(net.n), ud, "run.init.x0");
  } else if (kind == "gaussian") {
    init.kind = InitConfig::Kind::Gaussian;
    if (!v.contains("mean") || !v.contains("cov")) {
      throw ConfigError("run.init: a gaussian initial law needs \"mean\" and \"cov\"");
    }
    init.mean = numbers(v.at("mean"), "run.init.mean");
    if (init.mean.size() != ud) throw ConfigError("run.init.mean: expected length d");
    init.cov = matrix(v.at("cov"), ud, ud, "run.init.cov");
  } else {
    throw ConfigError("run.init.kind: expected \"fixed\" or \"gaussian\", got \"" + kind + "\"");
  }
  return init;
}

RunConfig parse_run(const json& v, const NetworkConfig& net) {
  check_keys(v, "run", {"enabled", "seed", "K", "n_chains", "mode", "max_proposals", "init"});
  RunConfig run;
  run.enabled = get_or<bool>(v, "enabled", "run", run.enabled);
  run.seed = get_count(v, "seed", "run", run.seed);
  run.K = get_count(v, "K", "run", run.K);
  run.n_chains = get_count(v, "n_chains", "run", run.n_chains);
  if (run.K < 1 || run.n_chains < 1) throw ConfigError("run: K and n_chains must be >= 1");
  const auto mode = get_or<std::string>(v, "mode", "run", "sequential");
  if (mode == "sequential") {
    run.mode = RunMode::Sequential;
  } else if (mode == "distributed-sim") {
    run.mode = RunMode::DistributedSim;
  } else {
    throw ConfigError("run.mode: expected \"sequential\" or \"distributed-sim\", got \"" + mode +
                      "\"");
  }
  run.max_proposals = get_or<long>(v, "max_proposals", "run", run.max_proposals);
  if (run.max_proposals < 1) throw ConfigError("run.max_proposals: must be >= 1");
  if (v.contains("init")) run.init = parse_init(v.at("init"), net);
  return run;
}

StudyConfig parse_study(const json& v) {
  check_keys(v, "study", {"rate_report", "empirical_kl", "delta", "small_eta"});
  StudyConfig s;
  s.rate_report = get_or<bool>(v, "rate_report", "study", s.rate_report);
  s.empirical_kl = get_or<bool>(v, "empirical_kl", "study", s.empirical_kl);
  s.delta = get_or<double>(v, "delta", "study", s.delta);
  if (!(s.delta > 0.0 && s.delta < 1.0)) throw ConfigError("study.delta: must lie in (0, 1)");
  if (v.contains("small_eta")) {
    const json& se = v.at("small_eta");
    check_keys(se, "study.small_eta", {"etas"});
    if (!se.contains("etas")) throw ConfigError("study.small_eta: missing \"etas\"");
    s.small_eta = numbers(se.at("etas"), "study.small_eta.etas");
    for (const double eta : s.small_eta) {
      if (!(eta > 0.0)) throw ConfigError("study.small_eta.etas: values must be positive");
    }
  }
  return s;
}

OutputConfig parse_output(const json& v) {
  check_keys(v, "output", {"trace", "trace_chains"});
  OutputConfig o;
  o.trace = get_or<bool>(v, "trace", "output", o.trace);
  if (v.contains("trace_chains")) o.trace_chains = get_count(v, "trace_chains", "output", 0);
  return o;
}

std::pair<int, int> line_and_column(const std::string& text, std::size_t byte) {
  int line = 1;
  int column = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

Potential build_potential(const PotentialConfig& p, int d) {
  if (p.kind == PotentialConfig::Kind::Zero) return Potential::zero(d);
  const Vector center = Eigen::Map<const Vector>(p.center.data(), d);
  switch (p.form) {
    case PotentialConfig::PrecisionForm::Scalar:
      return Potential::isotropic_quadratic(center, p.precision.front(), p.offset);
    case PotentialConfig::PrecisionForm::Diagonal:
      return Potential::quadratic(center,
                                  Eigen::Map<const Vector>(p.precision.data(), d).asDiagonal(),
                                  p.offset);
    case PotentialConfig::PrecisionForm::Full:
      return Potential::quadratic(
          center,
          Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
              p.precision.data(), d, d),
          p.offset);
  }
  throw ConfigError("unknown potential kind");
}

BipartiteNetwork build_network(const NetworkConfig& cfg) {
  std::vector<Potential> f;
  std::vector<Potential> g;
  for (std::size_t k = 0; k < cfg.f.size(); ++k) {
    try {
      f.push_back(build_potential(cfg.f[k], cfg.d));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("network.f[" + std::to_string(k) + "]: " + e.what());
    }
  }
  for (std::size_t k = 0; k < cfg.g.size(); ++k) {
    try {
      g.push_back(build_potential(cfg.g[k], cfg.d));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError("network.g[" + std::to_string(k) + "]: " + e.what());
    }
  }
  std::vector<Edge> edges;
  for (const EdgeConfig& e : cfg.edges) edges.push_back({e.i, e.j, e.sigma});
  try {
    return BipartiteNetwork(cfg.d, cfg.eta, std::move(f), std::move(g), std::move(edges));
  } catch (const Error& e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_and_column(text, e.byte);
    throw ConfigError(std::string("config parse error: ") + e.what(), line, column);
  }
  check_keys(doc, "config", {"network", "run", "study", "output"});
  if (!doc.contains("network")) throw ConfigError("config: missing \"network\"");

  ExperimentConfig cfg;
  cfg.network = parse_network(doc.at("network"));
  if (doc.contains("run")) cfg.run = parse_run(doc.at("run"), cfg.network);
  if (doc.contains("study")) cfg.study = parse_study(doc.at("study"));
  if (doc.contains("output")) cfg.output = parse_output(doc.at("output"));

  const BipartiteNetwork net = build_network(cfg.network);
  const ValidationReport report = validate(net);
  if (!report.ok()) {
    std::string all;
    for (const std::string& msg : report.messages()) all += "\n  " + msg;
    throw ConfigError("network failed validation:" + all);
  }
  if (cfg.run.init.kind == InitConfig::Kind::Gaussian) {
    const Eigen::Map<const Matrix> cov(cfg.run.init.cov.data(), cfg.network.d, cfg.network.d);
    if (!cov.isApprox(cov.transpose()) || Eigen::LLT<Matrix>(cov).info() != Eigen::Success) {
      throw ConfigError("run.init.cov: must be symmetric positive definite");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string to_json(const ExperimentConfig& cfg, int indent) {
  const auto& net = cfg.network;
  const auto d = static_cast<std::size_t>(net.d);
  json edges = json::array();
  for (const EdgeConfig& e : net.edges) edges.push_back({{"i", e.i}, {"j", e.j}, {"sigma", e.sigma}});
  json f = json::array();
  json g = json::array();
  for (const auto& p : net.f) f.push_back(potential_json(p, net.d));
  for (const auto& p : net.g) g.push_back(potential_json(p, net.d));

  json init;
  if (cfg.run.init.kind == InitConfig::Kind::Fixed) {
    init = {{"kind", "fixed"}};
    if (!cfg.run.init.x0.empty()) init["x0"] = nested(cfg.run.init.x0, d);
  } else {
    init = {{"kind", "gaussian"}, {"mean", cfg.run.init.mean}, {"cov", nested(cfg.run.init.cov, d)}};
  }

  json output = {{"trace", cfg.output.trace}};
  if (cfg.output.trace_chains) output["trace_chains"] = *cfg.output.trace_chains;

  const json doc = {
      {"network",
       {{"d", net.d}, {"eta", net.eta}, {"n", net.n}, {"m", net.m}, {"edges", edges}, {"f", f},
        {"g", g}}},
      {"run",
       {{"enabled", cfg.run.enabled},
        {"seed", cfg.run.seed},
        {"K", cfg.run.K},
        {"n_chains", cfg.run.n_chains},
        {"mode", cfg.run.mode == RunMode::Sequential ? "sequential" : "distributed-sim"},
        {"max_proposals", cfg.run.max_proposals},
        {"init", init}}},
      {"study",
       {{"rate_report", cfg.study.rate_report},
        {"empirical_kl", cfg.study.empirical_kl},
        {"delta", cfg.study.delta},
        {"small_eta", {{"etas", cfg.study.small_eta}}}}},
      {"output", output}};
  return doc.dump(indent);
}

}  // namespace gibbsnet
