#include "povdae/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "povdae/error.hpp"

namespace povdae {

std::size_t Equation::order() const {
  std::size_t eta = 0;
  for (const auto& t : terms) eta = std::max(eta, t.lag);
  return eta;
}

std::size_t LtiDaeSystem::algebraic_count() const {
  return static_cast<std::size_t>(std::count_if(equations.begin(), equations.end(),
                                                [](const Equation& e) { return e.kind == EquationKind::algebraic; }));
}

std::size_t LtiDaeSystem::difference_count() const { return equations.size() - algebraic_count(); }

namespace {

[[noreturn]] void malformed(std::size_t eq, const std::string& what) {
  throw Error(ErrorCode::malformed_system, "equation " + std::to_string(eq) + ": " + what);
}

double output_coefficient(const Equation& e) {
  for (const auto& t : e.terms) {
    if (t.variable == e.output && t.lag == 0) return t.coefficient;
  }
  return 0.0;
}

}  // namespace

void LtiDaeSystem::validate() const {
  const std::size_t m = variables.size();
  if (equations.empty()) throw Error(ErrorCode::malformed_system, "system has no equations");
  if (m <= equations.size()) {
    throw Error(ErrorCode::malformed_system, "need more variables (" + std::to_string(m) + ") than equations (" +
                                                 std::to_string(equations.size()) + ")");
  }
  for (std::size_t i = 0; i < equations.size(); ++i) {
    const auto& e = equations[i];
    if (e.terms.empty()) malformed(i, "no terms");
    if (e.output >= m) malformed(i, "output index out of range");
    std::set<std::pair<std::size_t, std::size_t>> seen;
    bool has_lagged = false;
    for (const auto& t : e.terms) {
      if (t.variable >= m) malformed(i, "variable index " + std::to_string(t.variable) + " out of range");
      if (t.lag > eta) malformed(i, "lag " + std::to_string(t.lag) + " exceeds eta " + std::to_string(eta));
      if (!std::isfinite(t.coefficient)) malformed(i, "non-finite coefficient");
      if (!seen.emplace(t.variable, t.lag).second) {
        malformed(i, "duplicate term for " + variables[t.variable] + "[k-" + std::to_string(t.lag) + "]");
      }
      if (t.lag > 0) has_lagged = true;
    }
    if (e.kind == EquationKind::algebraic && has_lagged) malformed(i, "algebraic equation with lagged term");
    if (e.kind == EquationKind::difference && !has_lagged) malformed(i, "difference equation without lagged term");
    if (output_coefficient(e) == 0.0) malformed(i, "output " + variables[e.output] + " has no instantaneous term");
  }
}

LtiDaeSystem make_system(std::vector<std::string> variables, std::vector<Equation> equations) {
  LtiDaeSystem sys;
  sys.variables = std::move(variables);
  sys.equations = std::move(equations);
  for (const auto& e : sys.equations) sys.eta = std::max(sys.eta, e.order());
  sys.validate();
  return sys;
}

namespace {

ConstraintMatrix empty_constraints(std::size_t m, std::size_t lag, std::size_t rows) {
  ConstraintMatrix out;
  out.variables = m;
  out.eta = lag;
  out.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(m * (lag + 1)));
  return out;
}

void write_row(ConstraintMatrix& out, Eigen::Index row, const Equation& e, std::size_t shift) {
  const double scale = output_coefficient(e);
  for (const auto& t : e.terms) {
    out.entries(row, static_cast<Eigen::Index>(out.column(t.variable, t.lag + shift))) = t.coefficient / scale;
  }
}

}  // namespace

ConstraintMatrix build_constraint_matrix(const LtiDaeSystem& system) {
  system.validate();
  auto out = empty_constraints(system.variable_count(), system.eta, system.equations.size());
  for (std::size_t i = 0; i < system.equations.size(); ++i) {
    write_row(out, static_cast<Eigen::Index>(i), system.equations[i], 0);
  }
  return out;
}

ConstraintMatrix padded_constraints(const LtiDaeSystem& system, std::size_t lag) {
  system.validate();
  auto out = empty_constraints(system.variable_count(), lag, expected_constraint_count(system, lag));
  Eigen::Index r = 0;
  for (const auto& e : system.equations) {
    for (std::size_t s = 0; s + e.order() <= lag; ++s) write_row(out, r++, e, s);
  }
  return out;
}

std::size_t expected_constraint_count(const LtiDaeSystem& system, std::size_t lag) {
  std::size_t d = 0;
  for (const auto& e : system.equations) {
    if (e.order() <= lag) d += lag - e.order() + 1;
  }
  return d;
}

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rtol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = rtol * s(0);
  return static_cast<std::size_t>((s.array() > cutoff).count());
}

std::vector<PartitionTruth> ground_truth_partitions(const ConstraintMatrix& a, double rtol) {
  const std::size_t m = a.variables;
  const std::size_t n_dep = a.rows();
  if (n_dep > m) {
    throw Error(ErrorCode::malformed_system, "more constraint rows than variables");
  }
  const Eigen::MatrixXd inst = a.instantaneous();
  std::vector<PartitionTruth> out;
  for_each_combination(m, n_dep, [&](const IndexSet& dep) {
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(n_dep), static_cast<Eigen::Index>(n_dep));
    for (std::size_t c = 0; c < n_dep; ++c) sub.col(static_cast<Eigen::Index>(c)) = inst.col(static_cast<Eigen::Index>(dep[c]));
    PartitionTruth row;
    row.dependent = dep;
    row.rank = numerical_rank(sub, rtol);
    row.admissible = row.rank == n_dep;
    row.free = complement(dep, m);
    out.push_back(std::move(row));
  });
  return out;
}

double max_relative_residual(const ConstraintMatrix& a, const Eigen::MatrixXd& trajectory) {
  const auto m = static_cast<Eigen::Index>(a.variables);
  const auto eta = static_cast<Eigen::Index>(a.eta);
  if (trajectory.rows() != m) throw Error(ErrorCode::shape, "trajectory row count does not match variable count");
  const double scale = trajectory.cwiseAbs().maxCoeff();
  Eigen::VectorXd window(m * (eta + 1));
  double worst = 0.0;
  for (Eigen::Index k = eta; k < trajectory.cols(); ++k) {
    for (Eigen::Index l = 0; l <= eta; ++l) window.segment(l * m, m) = trajectory.col(k - l);
    worst = std::max(worst, (a.entries * window).cwiseAbs().maxCoeff());
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace povdae
