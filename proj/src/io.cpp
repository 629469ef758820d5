#include "povdae/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "povdae/error.hpp"

namespace povdae::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? Json("inf") : Json("-inf");
  return Json(v);
}

double number_from(const Json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorCode::parse, "expected a number or \"inf\", got \"" + s + "\"");
  }
  return j.get<double>();
}

std::size_t index_of(const std::vector<std::string>& names, const Json& ref, const char* what) {
  if (ref.is_number_unsigned() || ref.is_number_integer()) {
    const auto i = ref.get<long long>();
    if (i < 0 || static_cast<std::size_t>(i) >= names.size()) {
      throw Error(ErrorCode::malformed_system, std::string(what) + " index " + std::to_string(i) + " out of range");
    }
    return static_cast<std::size_t>(i);
  }
  const auto name = ref.get<std::string>();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return i;
  }
  throw Error(ErrorCode::malformed_system, std::string(what) + " refers to unknown variable \"" + name + "\"");
}

Json names_of(const std::vector<std::string>& names, const IndexSet& set) {
  Json out = Json::array();
  for (std::size_t i : set) out.push_back(names.at(i));
  return out;
}

IndexSet set_from(const std::vector<std::string>& names, const Json& j) {
  IndexSet out;
  for (const auto& v : j) out.push_back(index_of(names, v, "set member"));
  std::sort(out.begin(), out.end());
  return out;
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, std::string(what) + ": " + e.what());
  }
}

void check_version(const Json& j, const char* what) {
  if (!j.contains("schema_version")) throw Error(ErrorCode::schema_version, std::string(what) + " has no schema_version");
  const int v = j.at("schema_version").get<int>();
  if (v != schema_version) {
    throw Error(ErrorCode::schema_version, std::string(what) + " schema_version " + std::to_string(v) +
                                               " is not supported (expected " + std::to_string(schema_version) + ")");
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  Dataset ds;
  bool have_header = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (!have_header) {
      for (auto c : cells) {
        if (c.empty()) parse_error(line_no, "empty column name");
        ds.names.emplace_back(c);
      }
      have_header = true;
      continue;
    }
    if (cells.size() != ds.names.size()) {
      parse_error(line_no, "expected " + std::to_string(ds.names.size()) + " cells, found " + std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto cell = cells[c];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        parse_error(line_no, "column " + std::to_string(c + 1) + " (" + ds.names[c] + "): not a number: \"" +
                                 std::string(cell) + "\"");
      }
      if (!std::isfinite(v)) {
        parse_error(line_no, "column " + std::to_string(c + 1) + " (" + ds.names[c] + "): non-finite value \"" +
                                 std::string(cell) + "\"");
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::parse, "empty file");
  if (rows.empty()) throw Error(ErrorCode::parse, "no data rows after the header");
  ds.data.resize(static_cast<Eigen::Index>(ds.names.size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < ds.names.size(); ++i) {
      ds.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[k][i];
    }
  }
  return ds;
}

Dataset read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

std::string format_csv(const std::vector<std::string>& names, const Eigen::MatrixXd& data) {
  if (static_cast<Eigen::Index>(names.size()) != data.rows()) {
    throw Error(ErrorCode::shape, "header length does not match row count");
  }
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  out += '\n';
  for (Eigen::Index k = 0; k < data.cols(); ++k) {
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      if (i) out += ',';
      out += format_double(data(i, k));
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& names, const Eigen::MatrixXd& data) {
  write_text(path, format_csv(names, data));
}

Json read_json(const std::filesystem::path& path) {
  const auto text = read_file(path);
  return guarded(path.string().c_str(), [&] { return Json::parse(text); });
}

// --- systems -------------------------------------------------------------

namespace {

SourceSignalSpec source_from_json(const std::vector<std::string>& names, const Json& j) {
  SourceSignalSpec spec;
  spec.variable = index_of(names, j.at("var"), "source");
  spec.seed_offset = j.value("seed_offset", std::uint64_t{0});
  const auto type = j.value("type", std::string("gaussian"));
  if (type == "gaussian") {
    spec.generator = GaussianWhite{j.value("mean", 0.0), j.value("variance", 1.0)};
  } else if (type == "prbs") {
    spec.generator = Prbs{j.value("amplitude", 1.0), j.value("band", 1.0)};
  } else if (type == "step") {
    spec.generator = Step{j.value("time", std::size_t{0}), j.value("height", 1.0)};
  } else if (type == "external") {
    spec.generator = ExternalSamples{j.at("samples").get<std::vector<double>>()};
  } else {
    throw Error(ErrorCode::configuration, "unknown source type \"" + type + "\"");
  }
  return spec;
}

Json source_to_json(const std::vector<std::string>& names, const SourceSignalSpec& s) {
  Json j;
  j["var"] = names.at(s.variable);
  std::visit(
      [&](const auto& g) {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, GaussianWhite>) {
          j["type"] = "gaussian";
          j["mean"] = g.mean;
          j["variance"] = g.variance;
        } else if constexpr (std::is_same_v<G, Prbs>) {
          j["type"] = "prbs";
          j["amplitude"] = g.amplitude;
          j["band"] = g.band;
        } else if constexpr (std::is_same_v<G, Step>) {
          j["type"] = "step";
          j["time"] = g.time;
          j["height"] = g.height;
        } else {
          j["type"] = "external";
          j["samples"] = g.samples;
        }
      },
      s.generator);
  if (s.seed_offset) j["seed_offset"] = s.seed_offset;
  return j;
}

}  // namespace

SystemFile system_from_json(const Json& j) {
  return guarded("system", [&] {
    auto names = j.at("variables").get<std::vector<std::string>>();
    std::vector<Equation> equations;
    for (const auto& ej : j.at("equations")) {
      Equation e;
      const auto kind = ej.at("kind").get<std::string>();
      if (kind == "algebraic") {
        e.kind = EquationKind::algebraic;
      } else if (kind == "difference") {
        e.kind = EquationKind::difference;
      } else {
        throw Error(ErrorCode::malformed_system, "unknown equation kind \"" + kind + "\"");
      }
      e.output = index_of(names, ej.at("output"), "output");
      for (const auto& tj : ej.at("terms")) {
        e.terms.push_back({index_of(names, tj.at("var"), "term"), tj.value("lag", std::size_t{0}), tj.at("coeff").get<double>()});
      }
      equations.push_back(std::move(e));
    }
    SystemFile out;
    out.system = make_system(names, std::move(equations));
    if (j.contains("eta")) {
      const auto eta = j.at("eta").get<std::size_t>();
      if (eta < out.system.eta) throw Error(ErrorCode::malformed_system, "eta is smaller than the largest lag used");
      out.system.eta = eta;
    }
    if (j.contains("sources")) {
      for (const auto& sj : j.at("sources")) out.sources.push_back(source_from_json(out.system.variables, sj));
    }
    return out;
  });
}

Json system_to_json(const LtiDaeSystem& system, const std::vector<SourceSignalSpec>& sources) {
  Json j;
  j["variables"] = system.variables;
  j["eta"] = system.eta;
  Json eqs = Json::array();
  for (const auto& e : system.equations) {
    Json ej;
    ej["kind"] = e.kind == EquationKind::algebraic ? "algebraic" : "difference";
    ej["output"] = system.variables[e.output];
    Json terms = Json::array();
    for (const auto& t : e.terms) {
      terms.push_back(Json{{"var", system.variables[t.variable]}, {"lag", t.lag}, {"coeff", t.coefficient}});
    }
    ej["terms"] = std::move(terms);
    eqs.push_back(std::move(ej));
  }
  j["equations"] = std::move(eqs);
  if (!sources.empty()) {
    Json sj = Json::array();
    for (const auto& s : sources) sj.push_back(source_to_json(system.variables, s));
    j["sources"] = std::move(sj);
  }
  return j;
}

SystemFile read_system(const std::filesystem::path& path) { return system_from_json(read_json(path)); }

// --- noise and reports ----------------------------------------------------

Json noise_to_json(const NoiseModel& noise) {
  Json j;
  j["schema_version"] = schema_version;
  j["lag"] = noise.lag;
  j["sigmas"] = noise.sigmas;
  std::vector<double> variances;
  for (double s : noise.sigmas) variances.push_back(s * s);
  j["variances"] = variances;
  j["d_used"] = noise.d_used;
  j["iterations"] = noise.iterations;
  j["converged"] = noise.converged;
  j["warnings"] = noise.warnings;
  return j;
}

NoiseModel noise_from_json(const Json& j) {
  return guarded("noise", [&] {
    NoiseModel n;
    n.lag = j.at("lag").get<std::size_t>();
    n.sigmas = j.at("sigmas").get<std::vector<double>>();
    n.d_used = j.at("d_used").get<std::size_t>();
    n.iterations = j.at("iterations").get<std::size_t>();
    n.converged = j.at("converged").get<bool>();
    n.warnings = j.value("warnings", std::vector<std::string>{});
    return n;
  });
}

Json report_to_json(const DiscoveryReport& r) {
  Json j;
  j["schema_version"] = schema_version;
  j["variables"] = r.names;

  const auto& o = r.options;
  Json opts;
  opts["max_lag"] = o.max_lag;
  opts["lag2"] = o.lag2 ? Json(*o.lag2) : Json(nullptr);
  opts["threshold"] = o.threshold;
  opts["unity_ceiling"] = o.unity_ceiling;
  opts["center"] = o.center;
  opts["constraints"] = o.constraints ? Json(*o.constraints) : Json(nullptr);
  opts["combination_cap"] = o.combination_cap;
  opts["require_admissible"] = o.require_admissible;
  const NoiseOptions noise_defaults;
  opts["noise_estimation"] = {{"tolerance", noise_defaults.tolerance},
                              {"max_iterations", noise_defaults.max_iterations},
                              {"initial_fraction", noise_defaults.initial_fraction},
                              {"unity_band", noise_defaults.unity_band},
                              {"edge_factor", noise_defaults.edge_factor},
                              {"min_gap_ratio", noise_defaults.min_gap_ratio}};
  j["options"] = std::move(opts);

  Json noise = noise_to_json(r.noise);
  noise.erase("schema_version");
  j["noise"] = std::move(noise);

  const auto& s = r.structure;
  Json st;
  st["n_a"] = s.n_a;
  st["n_d"] = s.n_d;
  st["n_S"] = s.n_s;
  st["lag1"] = s.lag1;
  st["lag2"] = s.lag2;
  Json d_at = Json::object();
  for (const auto& [lag, d] : s.d_at_lag) d_at[std::to_string(lag)] = d;
  st["d_at_lag"] = std::move(d_at);
  j["structure"] = std::move(st);

  Json spectra = Json::object();
  for (const auto& [lag, sv] : r.spectra) spectra[std::to_string(lag)] = sv;
  j["spectra"] = std::move(spectra);

  Json parts = Json::array();
  for (const auto& p : r.partitions) {
    Json pj;
    pj["dependent"] = names_of(r.names, p.dependent);
    pj["cond"] = number_or_inf(p.condition);
    pj["admissible"] = p.admissible;
    pj["free"] = names_of(r.names, p.free);
    parts.push_back(std::move(pj));
  }
  j["partitions"] = std::move(parts);

  Json src;
  src["unambiguous"] = names_of(r.names, r.sources.unambiguous);
  src["ambiguous"] = names_of(r.names, r.sources.ambiguous);
  src["threshold"] = r.sources.threshold;
  j["sources"] = std::move(src);
  j["warnings"] = r.warnings;
  return j;
}

DiscoveryReport report_from_json(const Json& j) {
  check_version(j, "report");
  return guarded("report", [&] {
    DiscoveryReport r;
    r.names = j.at("variables").get<std::vector<std::string>>();

    const auto& oj = j.at("options");
    r.options.max_lag = oj.at("max_lag").get<std::size_t>();
    if (!oj.at("lag2").is_null()) r.options.lag2 = oj.at("lag2").get<std::size_t>();
    r.options.threshold = oj.at("threshold").get<double>();
    r.options.unity_ceiling = oj.at("unity_ceiling").get<double>();
    r.options.center = oj.at("center").get<bool>();
    if (!oj.at("constraints").is_null()) r.options.constraints = oj.at("constraints").get<std::size_t>();
    r.options.combination_cap = oj.at("combination_cap").get<std::uint64_t>();
    r.options.require_admissible = oj.at("require_admissible").get<bool>();

    r.noise = noise_from_json(j.at("noise"));

    const auto& sj = j.at("structure");
    r.structure.n_a = sj.at("n_a").get<std::size_t>();
    r.structure.n_d = sj.at("n_d").get<std::size_t>();
    r.structure.n_s = sj.at("n_S").get<std::size_t>();
    r.structure.lag1 = sj.at("lag1").get<std::size_t>();
    r.structure.lag2 = sj.at("lag2").get<std::size_t>();
    for (const auto& [k, v] : sj.at("d_at_lag").items()) r.structure.d_at_lag[std::stoul(k)] = v.get<std::size_t>();

    for (const auto& [k, v] : j.at("spectra").items()) r.spectra[std::stoul(k)] = v.get<std::vector<double>>();

    for (const auto& pj : j.at("partitions")) {
      PartitionResult p;
      p.dependent = set_from(r.names, pj.at("dependent"));
      p.condition = number_from(pj.at("cond"));
      p.admissible = pj.at("admissible").get<bool>();
      p.free = set_from(r.names, pj.at("free"));
      r.partitions.push_back(std::move(p));
    }

    const auto& srcj = j.at("sources");
    r.sources.unambiguous = set_from(r.names, srcj.at("unambiguous"));
    r.sources.ambiguous = set_from(r.names, srcj.at("ambiguous"));
    r.sources.threshold = srcj.at("threshold").get<double>();
    for (const auto& p : r.partitions) {
      if (p.admissible) r.sources.admissible.push_back(p);
    }
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    return r;
  });
}

void write_report(const DiscoveryReport& report, const std::filesystem::path& path) {
  write_text(path, report_to_json(report).dump(2) + "\n");
}

DiscoveryReport read_report(const std::filesystem::path& path) { return report_from_json(read_json(path)); }

Json truth_to_json(const LtiDaeSystem& system, const MeasurementSet& m, std::size_t burn_in) {
  Json j;
  j["schema_version"] = schema_version;
  j["variables"] = system.variables;
  j["seed"] = m.seed;
  j["samples"] = static_cast<std::size_t>(m.data.cols());
  j["burn_in"] = burn_in;
  j["snr"] = m.snr;
  j["true_sigmas"] = m.true_sigmas;
  std::vector<double> variances;
  for (double s : m.true_sigmas) variances.push_back(s * s);
  j["true_variances"] = variances;
  j["structure"] = Json{{"n_a", system.algebraic_count()},
                        {"n_d", system.difference_count()},
                        {"n_S", system.source_count()}};
  Json parts = Json::array();
  for (const auto& p : ground_truth_partitions(build_constraint_matrix(system))) {
    parts.push_back(Json{{"dependent", names_of(system.variables, p.dependent)},
                         {"rank", p.rank},
                         {"admissible", p.admissible},
                         {"free", names_of(system.variables, p.free)}});
  }
  j["ground_truth_partitions"] = std::move(parts);
  return j;
}

// --- Monte Carlo ------------------------------------------------------------

McConfig mc_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  return guarded("mc config", [&] {
    McConfig cfg;
    SystemFile sys;
    if (j.contains("system")) {
      sys = system_from_json(j.at("system"));
    } else if (j.contains("system_file")) {
      std::filesystem::path p = j.at("system_file").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      sys = read_system(p);
    } else {
      throw Error(ErrorCode::configuration, "mc config needs \"system\" or \"system_file\"");
    }
    cfg.system = std::move(sys.system);
    cfg.sources = std::move(sys.sources);
    cfg.snr = j.at("snr").get<std::vector<double>>();
    cfg.n_total = j.value("samples", cfg.n_total);
    cfg.burn_in = j.value("burn_in", cfg.burn_in);
    cfg.runs = j.value("runs", cfg.runs);
    cfg.base_seed = j.value("seed", cfg.base_seed);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("discovery")) {
      const auto& dj = j.at("discovery");
      auto& d = cfg.discovery;
      d.max_lag = dj.value("lag", d.max_lag);
      if (dj.contains("lag2") && !dj.at("lag2").is_null()) d.lag2 = dj.at("lag2").get<std::size_t>();
      d.threshold = dj.value("threshold", d.threshold);
      d.unity_ceiling = dj.value("unity_ceiling", d.unity_ceiling);
      d.center = dj.value("center", d.center);
    }
    return cfg;
  });
}

McConfig read_mc_config(const std::filesystem::path& path) {
  return mc_config_from_json(read_json(path), path.parent_path());
}

std::string format_error_table(const ErrorTable& table) {
  std::ostringstream out;
  out << "combination,truth,observed_admissible,type1_pct,type2_pct,failed_runs\n";
  for (const auto& row : table.rows) {
    out << row.label << ',' << (row.truth_admissible ? 1 : 0) << ',' << row.observed_admissible << ',';
    if (!row.truth_admissible) out << format_double(row.type1_pct);
    out << ',';
    if (row.truth_admissible) out << format_double(row.type2_pct);
    out << ',' << table.failed_runs << '\n';
  }
  return out.str();
}

std::string format_oracle_table(const LtiDaeSystem& system, const std::vector<PartitionTruth>& table) {
  auto braces = [&](const IndexSet& set) {
    std::string s = "{";
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i) s += ",";
      s += system.variables[set[i]];
    }
    return s + "}";
  };
  std::size_t width = std::string("dependent").size();
  for (const auto& row : table) width = std::max(width, braces(row.dependent).size());
  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(width) + 2) << "dependent" << "rank  alpha  free\n";
  for (const auto& row : table) {
    out << std::left << std::setw(static_cast<int>(width) + 2) << braces(row.dependent) << std::setw(6) << row.rank
        << std::setw(7) << (row.admissible ? 1 : 0) << (row.admissible ? braces(row.free) : "-") << '\n';
  }
  return out.str();
}

}  // namespace povdae::io
