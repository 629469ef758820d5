#include "povdae/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "povdae/error.hpp"

namespace povdae {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<SourceSignalSpec> default_sources(const LtiDaeSystem& system) {
  std::vector<bool> is_output(system.variable_count(), false);
  for (const auto& e : system.equations) is_output[e.output] = true;
  std::vector<SourceSignalSpec> out;
  for (std::size_t v = 0; v < is_output.size(); ++v) {
    if (!is_output[v]) out.push_back({v, GaussianWhite{}, 0});
  }
  return out;
}

namespace {

std::vector<double> generate(const SourceSignalSpec& spec, std::size_t total, std::uint64_t seed) {
  std::mt19937_64 rng(mix_seed(mix_seed(seed, spec.variable), spec.seed_offset));
  std::vector<double> out(total, 0.0);
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, GaussianWhite>) {
          if (!(g.variance >= 0.0)) throw Error(ErrorCode::configuration, "negative source variance");
          std::normal_distribution<double> dist(g.mean, std::sqrt(g.variance));
          for (auto& x : out) x = dist(rng);
        } else if constexpr (std::is_same_v<G, Prbs>) {
          if (!(g.band > 0.0 && g.band <= 1.0)) throw Error(ErrorCode::configuration, "prbs band must be in (0, 1]");
          const auto hold = static_cast<std::size_t>(std::ceil(1.0 / g.band));
          std::bernoulli_distribution coin(0.5);
          double level = 0.0;
          for (std::size_t k = 0; k < total; ++k) {
            if (k % hold == 0) level = coin(rng) ? g.amplitude : -g.amplitude;
            out[k] = level;
          }
        } else if constexpr (std::is_same_v<G, Step>) {
          for (std::size_t k = g.time; k < total; ++k) out[k] = g.height;
        } else {
          if (g.samples.size() < total) {
            throw Error(ErrorCode::configuration, "external source has " + std::to_string(g.samples.size()) +
                                                      " samples, need " + std::to_string(total));
          }
          std::copy_n(g.samples.begin(), total, out.begin());
        }
      },
      spec.generator);
  return out;
}

// Equation indices ordered so every lag-0 dependency is computed first.
std::vector<std::size_t> solve_order(const LtiDaeSystem& system, const std::vector<int>& producer) {
  const std::size_t n = system.equations.size();
  std::vector<std::vector<std::size_t>> dependents(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = system.equations[i];
    for (const auto& t : e.terms) {
      if (t.lag != 0 || t.variable == e.output) continue;
      const int p = producer[t.variable];
      if (p < 0) continue;
      dependents[static_cast<std::size_t>(p)].push_back(i);
      ++indegree[i];
    }
  }
  std::vector<std::size_t> order;
  std::vector<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    // Smallest index first keeps the order deterministic.
    std::sort(ready.begin(), ready.end(), std::greater<>());
    const std::size_t i = ready.back();
    ready.pop_back();
    order.push_back(i);
    for (std::size_t j : dependents[i]) {
      if (--indegree[j] == 0) ready.push_back(j);
    }
  }
  if (order.size() != n) {
    throw Error(ErrorCode::unsupported_system, "algebraic loop among instantaneous dependencies");
  }
  return order;
}

}  // namespace

Trajectory simulate_noise_free(const LtiDaeSystem& system, const std::vector<SourceSignalSpec>& sources,
                               std::size_t n_total, std::size_t burn_in, std::uint64_t seed) {
  system.validate();
  const std::size_t m = system.variable_count();
  if (n_total <= system.eta) throw Error(ErrorCode::configuration, "n_total must exceed the system order");

  std::vector<int> producer(m, -1);
  for (std::size_t i = 0; i < system.equations.size(); ++i) {
    const auto out = system.equations[i].output;
    if (producer[out] >= 0) {
      throw Error(ErrorCode::configuration, "variable " + system.variables[out] + " is the output of two equations");
    }
    producer[out] = static_cast<int>(i);
  }
  std::vector<bool> is_source(m, false);
  for (const auto& s : sources) {
    if (s.variable >= m) throw Error(ErrorCode::configuration, "source index out of range");
    if (is_source[s.variable]) throw Error(ErrorCode::configuration, "duplicate source " + system.variables[s.variable]);
    if (producer[s.variable] >= 0) {
      throw Error(ErrorCode::configuration, "source " + system.variables[s.variable] + " is an equation output");
    }
    is_source[s.variable] = true;
  }
  for (std::size_t v = 0; v < m; ++v) {
    if (!is_source[v] && producer[v] < 0) {
      throw Error(ErrorCode::configuration, "variable " + system.variables[v] + " is neither a source nor an output");
    }
  }
  // Every source must be free in at least one admissible partition.
  {
    const auto table = ground_truth_partitions(build_constraint_matrix(system));
    for (const auto& s : sources) {
      const bool free_somewhere = std::any_of(table.begin(), table.end(), [&](const PartitionTruth& p) {
        return p.admissible && std::find(p.free.begin(), p.free.end(), s.variable) != p.free.end();
      });
      if (!free_somewhere) {
        throw Error(ErrorCode::configuration,
                    "source " + system.variables[s.variable] + " is not free in any admissible partition");
      }
    }
  }
  const auto order = solve_order(system, producer);

  const std::size_t total = burn_in + n_total;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(total));
  for (const auto& s : sources) {
    const auto signal = generate(s, total, seed);
    for (std::size_t k = 0; k < total; ++k) x(static_cast<Eigen::Index>(s.variable), static_cast<Eigen::Index>(k)) = signal[k];
  }
  for (std::size_t k = 0; k < total; ++k) {
    for (std::size_t i : order) {
      const auto& e = system.equations[i];
      double out_coeff = 0.0;
      double rest = 0.0;
      for (const auto& t : e.terms) {
        if (t.variable == e.output && t.lag == 0) {
          out_coeff = t.coefficient;
        } else if (t.lag <= k) {
          rest += t.coefficient * x(static_cast<Eigen::Index>(t.variable), static_cast<Eigen::Index>(k - t.lag));
        }
      }
      x(static_cast<Eigen::Index>(e.output), static_cast<Eigen::Index>(k)) = -rest / out_coeff;
    }
  }
  if (!x.allFinite()) {
    throw Error(ErrorCode::unsupported_system, "simulation diverged; the system is unstable under this excitation");
  }
  Trajectory traj;
  traj.data = x.rightCols(static_cast<Eigen::Index>(n_total));
  traj.names = system.variables;
  return traj;
}

MeasurementSet add_noise(const Trajectory& trajectory, const std::vector<double>& snr, std::uint64_t seed) {
  const auto m = trajectory.data.rows();
  const auto n = trajectory.data.cols();
  if (static_cast<Eigen::Index>(snr.size()) != m) {
    throw Error(ErrorCode::configuration, "need one SNR per variable (" + std::to_string(m) + ")");
  }
  if (n < 2) throw Error(ErrorCode::cannot_set_snr, "need at least two samples to measure variance");
  MeasurementSet out;
  out.names = trajectory.names;
  out.snr = snr;
  out.seed = seed;
  out.data = trajectory.data;
  out.true_sigmas.resize(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double ratio = snr[static_cast<std::size_t>(i)];
    if (!(ratio > 0.0) || !std::isfinite(ratio)) throw Error(ErrorCode::configuration, "SNR must be positive and finite");
    const auto row = trajectory.data.row(i);
    const double mean = row.mean();
    const double var = (row.array() - mean).square().sum() / static_cast<double>(n - 1);
    if (!(var > 0.0)) {
      throw Error(ErrorCode::cannot_set_snr, "variable " + (i < static_cast<Eigen::Index>(trajectory.names.size())
                                                                ? trajectory.names[static_cast<std::size_t>(i)]
                                                                : std::to_string(i)) +
                                                 " has zero variance");
    }
    const double sigma = std::sqrt(var / ratio);
    out.true_sigmas[static_cast<std::size_t>(i)] = sigma;
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(i) + 0x1000));
    std::normal_distribution<double> dist(0.0, sigma);
    for (Eigen::Index k = 0; k < n; ++k) out.data(i, k) += dist(rng);
  }
  return out;
}

}  // namespace povdae
