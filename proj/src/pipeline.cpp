#include "povdae/pipeline.hpp"

#include <algorithm>
#include <iterator>

#include "povdae/error.hpp"

namespace povdae {

namespace {

template <class Fn>
auto staged(const char* stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

}  // namespace

DiscoveryReport discover(const Eigen::MatrixXd& measurements, const std::vector<std::string>& names,
                         const DiscoveryOptions& options) {
  const auto m = static_cast<std::size_t>(measurements.rows());
  if (names.size() != m) {
    throw Error(ErrorCode::configuration, "got " + std::to_string(names.size()) + " names for " + std::to_string(m) +
                                              " variables", "input");
  }
  if (options.lag2 && *options.lag2 >= options.max_lag) {
    throw Error(ErrorCode::configuration, "lag2 must be below the maximum lag", "input");
  }

  DiscoveryReport report;
  report.names = names;
  report.options = options;

  NoiseOptions noise_opts;
  noise_opts.constraints = options.constraints;
  noise_opts.center = options.center;
  report.noise = staged("estimate-noise", [&] { return estimate_noise(measurements, options.max_lag, noise_opts); });
  for (const auto& w : report.noise.warnings) report.warnings.push_back("estimate-noise: " + w);

  StructureOptions structure_opts;
  structure_opts.lag1 = options.max_lag;
  structure_opts.lag2 = options.lag2;
  structure_opts.unity_ceiling = options.unity_ceiling;
  structure_opts.center = options.center;
  report.structure =
      staged("structure", [&] { return estimate_structure(measurements, report.noise, structure_opts); });

  for (const auto& [lag, count] : report.structure.d_at_lag) {
    (void)count;
    report.spectra[lag] = scaled_spectrum(measurements, lag, report.noise, options.unity_ceiling, options.center)
                              .singular_values;
  }

  const auto basis = staged("spectrum", [&] {
    return scaled_spectrum(measurements, options.max_lag, report.noise, options.unity_ceiling, options.center);
  });
  for (const auto& w : basis.warnings) report.warnings.push_back("spectrum: " + w);
  if (basis.unity_count() != report.noise.d_used) {
    report.warnings.push_back("unity count at the maximum lag (" + std::to_string(basis.unity_count()) +
                              ") differs from the constraint count used for noise estimation (" +
                              std::to_string(report.noise.d_used) + ")");
  }

  const std::size_t n_dep = report.structure.n_a + report.structure.n_d;
  report.partitions = staged("partition", [&] {
    return enumerate_partitions(basis, n_dep, options.threshold, options.combination_cap);
  });
  if (options.require_admissible) {
    report.sources = staged("classify", [&] { return classify_sources(report.partitions, options.threshold); });
  } else {
    report.sources = collect_sources(report.partitions, options.threshold);
    if (report.sources.admissible.empty()) {
      report.warnings.push_back("classify: no partition passed the condition-number threshold");
    }
  }
  check_report_invariants(report);
  return report;
}

void check_report_invariants(const DiscoveryReport& report) {
  const auto& s = report.sources;
  if (s.unambiguous.size() > report.structure.n_s) {
    throw Error(ErrorCode::structural_mismatch, "more unambiguous sources than n_S", "report");
  }
  for (const auto& p : s.admissible) {
    if (p.free.size() != report.structure.n_s) {
      throw Error(ErrorCode::structural_mismatch, "admissible free set size differs from n_S", "report");
    }
  }
  IndexSet both;
  std::set_intersection(s.unambiguous.begin(), s.unambiguous.end(), s.ambiguous.begin(), s.ambiguous.end(),
                        std::back_inserter(both));
  if (!both.empty()) throw Error(ErrorCode::structural_mismatch, "source sets overlap", "report");
}

}  // namespace povdae
