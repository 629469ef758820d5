// povdae command-line front end.
//
//   povdae simulate       --config sys.json --samples N --snr a,b,c --seed S --out data.csv --truth truth.json
//   povdae estimate-noise --data data.csv --lag L [--d D] --out noise.json
//   povdae discover       --data data.csv --lag 5 --lag2 1 --threshold 10 --unity-ceiling 1.2 --report report.json
//   povdae oracle         --config sys.json
//   povdae montecarlo     --config mc.json --out table.csv

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "povdae/dipca.hpp"
#include "povdae/error.hpp"
#include "povdae/io.hpp"
#include "povdae/montecarlo.hpp"
#include "povdae/pipeline.hpp"
#include "povdae/simulate.hpp"
#include "povdae/sysmodel.hpp"

namespace {

using namespace povdae;

std::string join_names(const std::vector<std::string>& names, const IndexSet& set) {
  std::string out = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i) out += ",";
    out += names[set[i]];
  }
  return out + "}";
}

void print_report(const DiscoveryReport& r) {
  std::cout << "noise sigmas:";
  for (std::size_t i = 0; i < r.names.size(); ++i) std::cout << ' ' << r.names[i] << '=' << r.noise.sigmas[i];
  std::cout << "  (d=" << r.noise.d_used << ", iterations=" << r.noise.iterations
            << (r.noise.converged ? "" : ", not converged") << ")\n";
  std::cout << "structure: n_a=" << r.structure.n_a << " n_d=" << r.structure.n_d << " n_S=" << r.structure.n_s
            << '\n';
  for (const auto& p : r.partitions) {
    std::cout << "  " << join_names(r.names, p.dependent) << "  cond=" << p.condition << "  alpha=" << p.admissible
              << '\n';
  }
  std::cout << "unambiguous sources: " << join_names(r.names, r.sources.unambiguous) << '\n';
  std::cout << "ambiguous sources:   " << join_names(r.names, r.sources.ambiguous) << '\n';
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pure-source discovery in LTI-DAE systems from noisy measurements"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out, sim_truth;
  std::size_t sim_samples = 2047;
  std::size_t sim_burn_in = default_burn_in;
  std::vector<double> sim_snr;
  std::uint64_t sim_seed = 1;
  auto* sim = app.add_subcommand("simulate", "Simulate a system and add measurement noise");
  sim->add_option("--config", sim_config, "System description (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--samples", sim_samples, "Retained samples")->required();
  sim->add_option("--snr", sim_snr, "Per-variable SNR (variance ratio), comma separated")->required()->delimiter(',');
  sim->add_option("--seed", sim_seed, "Random seed");
  sim->add_option("--burn-in", sim_burn_in, "Discarded initial samples");
  sim->add_option("--out", sim_out, "Measurement CSV")->required();
  sim->add_option("--truth", sim_truth, "Ground-truth JSON");

  // estimate-noise
  std::string en_data, en_out;
  std::size_t en_lag = 5;
  std::optional<std::size_t> en_d;
  bool en_no_center = false;
  auto* en = app.add_subcommand("estimate-noise", "Estimate measurement noise levels with dynamic iterative PCA");
  en->add_option("--data", en_data, "Measurement CSV")->required()->check(CLI::ExistingFile);
  en->add_option("--lag", en_lag, "Stacking lag");
  en->add_option("--d", en_d, "Constraint count (selected automatically when omitted)");
  en->add_flag("--no-center", en_no_center, "Do not remove column means");
  en->add_option("--out", en_out, "Noise model JSON")->required();

  // discover
  std::string dis_data, dis_report;
  DiscoveryOptions dis_opts;
  std::optional<std::size_t> dis_lag2;
  bool dis_no_center = false;
  auto* dis = app.add_subcommand("discover", "Run the full source-discovery pipeline");
  dis->add_option("--data", dis_data, "Measurement CSV")->required()->check(CLI::ExistingFile);
  dis->add_option("--lag", dis_opts.max_lag, "Maximum stacking lag (L1)");
  dis->add_option("--lag2", dis_lag2, "Second lag (L2); defaults to 0 when n_a > 0, else 1");
  dis->add_option("--threshold", dis_opts.threshold, "Condition-number admissibility threshold");
  dis->add_option("--unity-ceiling", dis_opts.unity_ceiling, "Scaled singular values below this count as unity");
  dis->add_option("--d", dis_opts.constraints, "Constraint count for noise estimation");
  dis->add_flag("--no-center", dis_no_center, "Do not remove column means");
  dis->add_option("--report", dis_report, "Report JSON");

  // oracle
  std::string or_config;
  auto* orc = app.add_subcommand("oracle", "Print the noise-free partition table of a system");
  orc->add_option("--config", or_config, "System description (JSON)")->required()->check(CLI::ExistingFile);

  // montecarlo
  std::string mc_config, mc_out;
  std::optional<std::size_t> mc_threads, mc_runs;
  auto* mc = app.add_subcommand("montecarlo", "Type I / type II error rates over repeated simulations");
  mc->add_option("--config", mc_config, "Monte Carlo configuration (JSON)")->required()->check(CLI::ExistingFile);
  mc->add_option("--out", mc_out, "Error table CSV");
  mc->add_option("--threads", mc_threads, "Worker threads (0 = all cores)");
  mc->add_option("--runs", mc_runs, "Override the number of runs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      auto file = io::read_system(sim_config);
      const auto sources = file.sources.empty() ? default_sources(file.system) : file.sources;
      const auto traj = simulate_noise_free(file.system, sources, sim_samples, sim_burn_in, mix_seed(sim_seed, 1));
      const auto meas = add_noise(traj, sim_snr, mix_seed(sim_seed, 2));
      io::write_csv(sim_out, meas.names, meas.data);
      if (!sim_truth.empty()) {
        auto truth = io::truth_to_json(file.system, meas, sim_burn_in);
        truth["seed"] = sim_seed;
        io::write_text(sim_truth, truth.dump(2) + "\n");
      }
      std::cout << "wrote " << sim_samples << " samples of " << meas.names.size() << " variables to " << sim_out
                << '\n';
    } else if (*en) {
      const auto ds = io::read_csv(en_data);
      NoiseOptions opts;
      opts.constraints = en_d;
      opts.center = !en_no_center;
      const auto noise = estimate_noise(ds.data, en_lag, opts);
      io::write_text(en_out, io::noise_to_json(noise).dump(2) + "\n");
      for (std::size_t i = 0; i < ds.names.size(); ++i) {
        std::cout << ds.names[i] << ": sigma^2 = " << noise.sigmas[i] * noise.sigmas[i] << '\n';
      }
      for (const auto& w : noise.warnings) std::cerr << "warning: " << w << '\n';
    } else if (*dis) {
      const auto ds = io::read_csv(dis_data);
      dis_opts.lag2 = dis_lag2;
      dis_opts.center = !dis_no_center;
      const auto report = discover(ds.data, ds.names, dis_opts);
      if (!dis_report.empty()) io::write_report(report, dis_report);
      print_report(report);
    } else if (*orc) {
      const auto file = io::read_system(or_config);
      const auto table = ground_truth_partitions(build_constraint_matrix(file.system));
      std::cout << io::format_oracle_table(file.system, table);
    } else if (*mc) {
      auto cfg = io::read_mc_config(mc_config);
      if (mc_threads) cfg.threads = *mc_threads;
      if (mc_runs) cfg.runs = *mc_runs;
      const auto table = run_montecarlo(cfg);
      const auto csv = io::format_error_table(table);
      if (!mc_out.empty()) io::write_text(mc_out, csv);
      std::cout << csv;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
