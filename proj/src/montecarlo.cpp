#include "povdae/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "povdae/error.hpp"

namespace povdae {

std::uint64_t run_seed(std::uint64_t base_seed, std::size_t index) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(index));
}

namespace {

std::string label_of(const LtiDaeSystem& system, const IndexSet& set) {
  std::string out;
  for (std::size_t i : set) {
    if (!out.empty()) out += '+';
    out += system.variables[i];
  }
  return out;
}

}  // namespace

RunRecord run_once(const McConfig& config, std::size_t index) {
  RunRecord rec;
  rec.index = index;
  rec.seed = run_seed(config.base_seed, index);
  const auto& sys = config.system;
  const auto sources = config.sources.empty() ? default_sources(sys) : config.sources;
  const auto traj = simulate_noise_free(sys, sources, config.n_total, config.burn_in, mix_seed(rec.seed, 1));
  const auto meas = add_noise(traj, config.snr, mix_seed(rec.seed, 2));
  rec.true_sigmas = meas.true_sigmas;

  auto options = config.discovery;
  options.require_admissible = false;
  try {
    const auto report = discover(meas.data, meas.names, options);
    rec.pipeline_ok = true;
    rec.structure = report.structure;
    rec.estimated_sigmas = report.noise.sigmas;
    rec.structure_correct = report.structure.n_a == sys.algebraic_count() &&
                            report.structure.n_d == sys.difference_count();
    if (rec.structure_correct) {
      // Partitions come back sorted by condition; index them lexicographically.
      auto parts = report.partitions;
      std::sort(parts.begin(), parts.end(),
                [](const PartitionResult& a, const PartitionResult& b) { return a.dependent < b.dependent; });
      for (const auto& p : parts) {
        rec.admissible.push_back(p.admissible);
        rec.conditions.push_back(p.condition);
      }
    }
    rec.unambiguous = report.sources.unambiguous;
    rec.ambiguous = report.sources.ambiguous;
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

ErrorTable run_montecarlo(const McConfig& config) {
  if (config.runs == 0) throw Error(ErrorCode::configuration, "runs must be at least 1");
  config.system.validate();
  if (config.snr.size() != config.system.variable_count()) {
    throw Error(ErrorCode::configuration, "need one SNR per variable");
  }
  const auto truth = ground_truth_partitions(build_constraint_matrix(config.system));

  ErrorTable table;
  table.runs = config.runs;
  table.records.resize(config.runs);
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.runs);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(threads);
  auto worker = [&](std::size_t slot) {
    try {
      for (std::size_t i = next++; i < config.runs; i = next++) table.records[i] = run_once(config, i);
    } catch (...) {
      failures[slot] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  for (const auto& t : truth) {
    ErrorRow row;
    row.dependent = t.dependent;
    row.label = label_of(config.system, t.dependent);
    row.truth_admissible = t.admissible;
    table.rows.push_back(std::move(row));
  }
  for (const auto& rec : table.records) {
    if (!rec.structure_correct) {
      ++table.failed_runs;
      continue;
    }
    for (std::size_t c = 0; c < table.rows.size(); ++c) {
      if (rec.admissible[c]) ++table.rows[c].observed_admissible;
    }
  }
  const double runs = static_cast<double>(config.runs);
  for (auto& row : table.rows) {
    const double observed = static_cast<double>(row.observed_admissible);
    if (row.truth_admissible) {
      row.type2_pct = 100.0 * (runs - observed) / runs;
    } else {
      row.type1_pct = 100.0 * observed / runs;
    }
  }
  return table;
}

}  // namespace povdae
