#include "gibbsnet/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "gibbsnet/gaussian_oracle.hpp"
#include "gibbsnet/gibbs.hpp"
#include "gibbsnet/kernels.hpp"
#include "gibbsnet/metrics.hpp"
#include "gibbsnet/rates.hpp"

namespace gibbsnet {

namespace {

constexpr std::uint64_t kChainBlock = 256;
// Per-sweep X storage for the empirical KL study is skipped above this many doubles.
constexpr std::uint64_t kMaxStoredValues = 50'000'000;

bool all_quadratic(const BipartiteNetwork& net) {
  const auto quadratic = [](const Potential& p) { return p.quadratic_form().has_value(); };
  return std::all_of(net.f().begin(), net.f().end(), quadratic) &&
         std::all_of(net.g().begin(), net.g().end(), quadratic);
}

InitSpec init_spec(const ExperimentConfig& cfg) {
  const int n = cfg.network.n;
  const int d = cfg.network.d;
  const InitConfig& init = cfg.run.init;
  if (init.kind == InitConfig::Kind::Gaussian) {
    return GaussianInit{Eigen::Map<const Vector>(init.mean.data(), d),
                        Eigen::Map<const Matrix>(init.cov.data(), d, d)};
  }
  if (init.x0.empty()) return FixedInit{SampleMatrix::Zero(n, d)};
  return FixedInit{Eigen::Map<const SampleMatrix>(init.x0.data(), n, d)};
}

// Law of the stacked X^0.
std::pair<Vector, Matrix> initial_moments(const ExperimentConfig& cfg) {
  const int n = cfg.network.n;
  const int d = cfg.network.d;
  Vector mean = Vector::Zero(n * d);
  Matrix cov = Matrix::Zero(n * d, n * d);
  const InitConfig& init = cfg.run.init;
  if (init.kind == InitConfig::Kind::Gaussian) {
    for (int i = 0; i < n; ++i) {
      mean.segment(i * d, d) = Eigen::Map<const Vector>(init.mean.data(), d);
      cov.block(i * d, i * d, d, d) = Eigen::Map<const Matrix>(init.cov.data(), d, d);
    }
  } else if (!init.x0.empty()) {
    mean = Eigen::Map<const Vector>(init.x0.data(), n * d);
  }
  return {mean, cov};
}

void append_row(std::string& out, std::uint64_t chain, std::uint64_t k, char side, int vertex,
                const SampleMatrix& rows, std::size_t proposals) {
  out += std::to_string(chain);
  out += ',';
  out += std::to_string(k);
  out += ',';
  out += side;
  out += ',';
  out += std::to_string(vertex);
  for (Eigen::Index c = 0; c < rows.cols(); ++c) {
    out += ',';
    out += format_double(rows(vertex, c));
  }
  out += ',';
  out += std::to_string(proposals);
  out += '\n';
}

struct RunOutcome {
  std::uint64_t chains_done = 0;
  std::string error;
  // xs[k] holds X^k of every chain, one row per chain (stacked n*d columns).
  std::vector<Matrix> xs;
  Matrix final_x;  // X^K, one row per chain
  double proposals = 0.0;
  double updates = 0.0;
};

RunOutcome run_chains(const ExperimentConfig& cfg, const BipartiteNetwork& net,
                      std::ostream* trace, const ExperimentOptions& options) {
  const std::uint64_t chains = cfg.run.n_chains;
  const std::uint64_t K = cfg.run.K;
  const int nd = net.n() * net.d();
  const std::uint64_t traced = std::min(chains, cfg.output.trace_chains.value_or(chains));
  const bool store = cfg.study.empirical_kl && all_quadratic(net) &&
                     chains * (K + 1) * static_cast<std::uint64_t>(nd) <= kMaxStoredValues;

  RunOutcome out;
  if (store) out.xs.assign(K + 1, Matrix(static_cast<Eigen::Index>(chains), nd));
  out.final_x.resize(static_cast<Eigen::Index>(chains), nd);

  const InitSpec mu0 = init_spec(cfg);
  SweepOptions sweep_options;
  sweep_options.rgo.max_proposals = static_cast<std::size_t>(cfg.run.max_proposals);

  unsigned threads = options.threads == 0 ? std::thread::hardware_concurrency() : options.threads;
  threads = std::max(1u, threads);

  std::vector<std::string> buffers(kChainBlock);
  std::vector<double> block_proposals(kChainBlock);
  std::vector<double> block_updates(kChainBlock);
  std::mutex error_mutex;
  std::uint64_t failed_chain = chains;

  for (std::uint64_t first = 0; first < chains && out.error.empty(); first += kChainBlock) {
    const std::uint64_t last = std::min(chains, first + kChainBlock);
    std::atomic<std::uint64_t> next{first};

    const auto worker = [&] {
      for (std::uint64_t c = next++; c < last; c = next++) {
        const std::size_t slot = c - first;
        std::string& buf = buffers[slot];
        buf.clear();
        block_proposals[slot] = 0.0;
        block_updates[slot] = 0.0;
        const auto record = [&](const GibbsState& s, const SweepStats& st) {
          for (int j = 0; j < net.m(); ++j) {
            block_proposals[slot] += static_cast<double>(st.proposals_y[static_cast<std::size_t>(j)]);
            if (c < traced) append_row(buf, c, s.k, 'Y', j, s.Y, st.proposals_y[static_cast<std::size_t>(j)]);
          }
          for (int i = 0; i < net.n(); ++i) {
            block_proposals[slot] += static_cast<double>(st.proposals_x[static_cast<std::size_t>(i)]);
            if (c < traced) append_row(buf, c, s.k, 'X', i, s.X, st.proposals_x[static_cast<std::size_t>(i)]);
          }
          block_updates[slot] += net.n() + net.m();
          const auto flat = Eigen::Map<const Vector>(s.X.data(), nd).transpose();
          if (store) out.xs[s.k].row(static_cast<Eigen::Index>(c)) = flat;
          if (s.k == K) out.final_x.row(static_cast<Eigen::Index>(c)) = flat;
        };
        try {
          GibbsState state = init(net, mu0, cfg.run.seed, c);
          if (store) {
            out.xs[0].row(static_cast<Eigen::Index>(c)) =
                Eigen::Map<const Vector>(state.X.data(), nd).transpose();
          }
          if (cfg.run.mode == RunMode::Sequential) {
            run(net, std::move(state), K, record, sweep_options);
          } else {
            run_distributed_sim(net, std::move(state), K, {}, record, sweep_options);
          }
        } catch (const Error& e) {
          const std::lock_guard lock(error_mutex);
          if (c < failed_chain) {
            failed_chain = c;
            out.error = "chain " + std::to_string(c) + ": " + e.what();
          }
        }
      }
    };

    {
      std::vector<std::jthread> pool;
      for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
      worker();
    }

    const std::uint64_t good = std::min(last, failed_chain);
    for (std::uint64_t c = first; c < good; ++c) {
      if (trace) *trace << buffers[c - first];
      out.proposals += block_proposals[c - first];
      out.updates += block_updates[c - first];
    }
    out.chains_done = good;
  }
  if (!options.quiet) std::cerr << "sampled " << out.chains_done << " / " << chains << " chains\n";
  return out;
}

void run_rows(const ExperimentConfig& cfg, const BipartiteNetwork& net, const RunOutcome& run,
              std::vector<ReportRow>& rows) {
  rows.push_back({"run", "chains", static_cast<double>(run.chains_done)});
  rows.push_back({"run", "K", static_cast<double>(cfg.run.K)});
  if (run.updates > 0) rows.push_back({"run", "proposals_per_update", run.proposals / run.updates});
  if (run.chains_done < 2) return;

  const Matrix final_x = run.final_x.topRows(static_cast<Eigen::Index>(run.chains_done));
  const double count = static_cast<double>(final_x.rows());
  const int nd = static_cast<int>(final_x.cols());
  std::optional<GaussianDist> exact;
  if (all_quadratic(net)) {
    const auto [mean0, cov0] = initial_moments(cfg);
    const MarginalDeviation dev = propagate_deviation(
        net, initial_deviation(net, mean0, cov0), static_cast<int>(cfg.run.K));
    exact = GaussianDist(dev.target.mean() + dev.mean_offset, dev.target.cov() + dev.cov_offset);
  }
  for (int v = 0; v < nd; ++v) {
    const Eigen::ArrayXd col = final_x.col(v).array();
    const double mean = col.mean();
    const Eigen::ArrayXd centered = col - mean;
    const double var = centered.square().sum() / (count - 1.0);
    const double m4 = centered.square().square().mean();
    const std::string idx = "[" + std::to_string(v) + "]";
    rows.push_back({"run", "final_x_mean" + idx, mean});
    rows.push_back({"run", "final_x_mean_se" + idx, std::sqrt(var / count)});
    rows.push_back({"run", "final_x_var" + idx, var});
    rows.push_back({"run", "final_x_var_se" + idx, std::sqrt(std::max(0.0, m4 - var * var) / count)});
    if (exact) {
      rows.push_back({"run", "exact_x_mean" + idx, exact->mean()(v)});
      rows.push_back({"run", "exact_x_var" + idx, exact->cov()(v, v)});
    }
  }
}

void empirical_kl_rows(const ExperimentConfig& cfg, const BipartiteNetwork& net,
                       const RunOutcome& run, double contraction, std::vector<ReportRow>& rows) {
  const int nd = net.n() * net.d();
  if (run.xs.empty() || run.chains_done < static_cast<std::uint64_t>(nd + 2)) return;
  const auto [mean0, cov0] = initial_moments(cfg);
  MarginalDeviation dev = initial_deviation(net, mean0, cov0);
  const double kl0 = kl_from_deviation(dev);
  double anchor = kl0;
  std::uint64_t anchor_k = 0;
  for (std::uint64_t k = 1; k < run.xs.size(); ++k) {
    dev = propagate_deviation(net, dev, 1);
    const double exact = kl_from_deviation(dev);
    if (!std::isfinite(anchor)) {
      anchor = exact;
      anchor_k = k;
    }
    const Matrix samples = run.xs[k].topRows(static_cast<Eigen::Index>(run.chains_done));
    const std::string key = "k=" + std::to_string(k);
    rows.push_back({"empirical_kl", key + "/empirical", empirical_kl_vs_gaussian(samples, dev.target)});
    rows.push_back({"empirical_kl", key + "/exact", exact});
    if (std::isfinite(anchor)) {
      rows.push_back({"empirical_kl", key + "/bound",
                      anchor * std::pow(contraction, static_cast<double>(k - anchor_k))});
    }
  }
}

// Normal law proportional to exp(-f - g) for quadratic f and g.
GaussianDist composite_gaussian(const Potential& f, const Potential& g) {
  const auto qf = f.quadratic_form();
  const auto qg = g.quadratic_form();
  const Matrix P = qf->precision + qg->precision;
  const Eigen::LLT<Matrix> chol(P);
  if (chol.info() != Eigen::Success) throw Error("composite law exp(-f - g) is improper");
  const Vector mean = chol.solve(qf->precision * qf->center + qg->precision * qg->center);
  return GaussianDist(mean, chol.solve(Matrix::Identity(P.rows(), P.cols())));
}

void small_eta_rows(const ExperimentConfig& cfg, const BipartiteNetwork& net,
                    std::vector<ReportRow>& rows) {
  if (cfg.study.small_eta.empty()) return;
  if (net.n() != 1 || net.m() != 1 || net.d() != 1 || !all_quadratic(net)) {
    rows.push_back({"small_eta", "skipped_not_two_node_1d_quadratic", 1.0});
    return;
  }
  const GaussianDist nu = composite_gaussian(net.f(0), net.g(0));
  const auto [f, g] = shift_to_common_minimizer(net.f(0), net.g(0), nu.mean());
  const double sigma = net.edges().front().sigma;
  for (const double eta : cfg.study.small_eta) {
    const BipartiteNetwork shifted(1, eta, {f}, {g}, {{0, 0, sigma}});
    const GaussianDist marginal = exact_x_marginal(shifted);
    char buf[32];
    const std::string key = "eta=" + std::string(buf, std::to_chars(buf, buf + sizeof buf, eta).ptr);
    rows.push_back({"small_eta", key + "/exact_tv", tv_1d(marginal, nu)});
    rows.push_back({"small_eta", key + "/exact_kl", kl(marginal, nu)});
    const double sd = std::sqrt(std::max(marginal.cov()(0, 0), nu.cov()(0, 0)));
    const double center = nu.mean()(0);
    const Quadrature1D q = marginal_density_1d(f, g, eta / sigma,
                                               linear_grid(center - 12.0 * sd, center + 12.0 * sd, 4001));
    rows.push_back({"small_eta", key + "/quadrature_tv", tv_on_grid(q, nu)});
    const RateReport report = rate_report(shifted);
    if (report.small_eta_bounds) {
      rows.push_back({"small_eta", key + "/bound_tv", report.small_eta_bounds->tv_bound});
      rows.push_back({"small_eta", key + "/bound_kl", report.small_eta_bounds->kl_bound});
    }
  }
}

void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg,
                    const std::string& error, const std::vector<std::string>& artifacts) {
  nlohmann::json manifest = {
      {"library", "gibbsnet"},
      {"version", kLibraryVersion},
      {"kernels", std::string(kernels::isa_name(kernels::active_isa()))},
      {"seed", cfg.run.seed},
      {"status", error.empty() ? "ok" : "error"},
      {"error", error.empty() ? nlohmann::json() : nlohmann::json(error)},
      {"artifacts", artifacts},
      {"config", nlohmann::json::parse(to_json(cfg))}};
  std::ofstream out(path);
  out << manifest.dump(2) << '\n';
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << "study,key,value\n";
  for (const ReportRow& r : rows) out << r.study << ',' << r.key << ',' << format_double(r.value) << '\n';
}

std::vector<ReportRow> rate_rows(const ExperimentConfig& cfg) {
  const BipartiteNetwork net = build_network(cfg.network);
  const RateReport report = rate_report(net);
  std::vector<ReportRow> rows{
      {"rates", "C", report.C},
      {"rates", "degenerate", report.degenerate ? 1.0 : 0.0},
      {"rates", "per_sweep_contraction", report.per_sweep_contraction},
  };
  if (report.two_node_factor) rows.push_back({"rates", "two_node_factor", *report.two_node_factor});
  if (report.small_eta_bounds) {
    rows.push_back({"rates", "small_eta_kl_bound", report.small_eta_bounds->kl_bound});
    rows.push_back({"rates", "small_eta_tv_bound", report.small_eta_bounds->tv_bound});
  }
  if (all_quadratic(net) && cfg.run.init.kind == InitConfig::Kind::Gaussian) {
    const auto [mean0, cov0] = initial_moments(cfg);
    const double kl0 = kl_from_deviation(initial_deviation(net, mean0, cov0));
    rows.push_back({"rates", "kl0", kl0});
    rows.push_back({"rates", "delta", cfg.study.delta});
    if (report.per_sweep_contraction < 1.0 || kl0 <= 2.0 * cfg.study.delta * cfg.study.delta) {
      rows.push_back({"rates", "mixing_sweeps",
                      static_cast<double>(report.mixing_sweeps(cfg.study.delta, kl0))});
    }
  }
  return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                const ExperimentOptions& options) {
  ExperimentResult result;
  std::vector<std::string> artifacts;
  std::filesystem::create_directories(out_dir);

  const auto finish = [&] {
    std::ofstream report(out_dir / "report.csv");
    write_report_csv(report, result.report);
    artifacts.push_back("report.csv");
    artifacts.push_back("manifest.json");
    write_manifest(out_dir / "manifest.json", cfg, result.error, artifacts);
    result.exit_status = result.error.empty() ? 0 : 2;
    return result;
  };

  try {
    const BipartiteNetwork net = build_network(cfg.network);
    double contraction = 1.0;
    if (cfg.study.rate_report) {
      result.report = rate_rows(cfg);
      contraction = rate_report(net).per_sweep_contraction;
    }
    if (cfg.run.enabled) {
      std::ofstream trace;
      if (cfg.output.trace) {
        trace.open(out_dir / "trace.csv");
        trace << "chain,k,side,vertex";
        for (int c = 0; c < net.d(); ++c) trace << ",coord" << c;
        trace << ",proposals\n";
        artifacts.push_back("trace.csv");
      }
      const RunOutcome run = run_chains(cfg, net, cfg.output.trace ? &trace : nullptr, options);
      result.error = run.error;
      run_rows(cfg, net, run, result.report);
      if (cfg.study.empirical_kl) empirical_kl_rows(cfg, net, run, contraction, result.report);
    }
    if (result.error.empty()) small_eta_rows(cfg, net, result.report);
  } catch (const Error& e) {
    result.error = e.what();
  }
  if (!result.error.empty() && !options.quiet) std::cerr << "error: " << result.error << '\n';
  return finish();
}

}  // namespace gibbsnet
