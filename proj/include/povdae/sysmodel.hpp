#pragma once

// Symbolic LTI-DAE systems and their constraint matrices.
//
// A system of M variables obeys n_a algebraic and n_d difference equations.
// Stacking x[k], x[k-1], ..., x[k-eta] into one vector, every equation becomes
// a row of the constraint matrix A with A x[k,eta] = 0. Columns are lag-major:
// all M instantaneous columns first, then the lag-1 block, and so on.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "povdae/combinatorics.hpp"

namespace povdae {

enum class EquationKind { algebraic, difference };

struct Term {
  std::size_t variable = 0;
  std::size_t lag = 0;
  double coefficient = 0.0;

  bool operator==(const Term&) const = default;
};

// All terms live on the left-hand side: sum(coeff * x_var[k - lag]) = 0.
struct Equation {
  EquationKind kind = EquationKind::algebraic;
  std::vector<Term> terms;
  std::size_t output = 0;

  std::size_t order() const;
  bool operator==(const Equation&) const = default;
};

struct LtiDaeSystem {
  std::vector<std::string> variables;
  std::vector<Equation> equations;
  std::size_t eta = 0;

  std::size_t variable_count() const { return variables.size(); }
  std::size_t algebraic_count() const;
  std::size_t difference_count() const;
  std::size_t source_count() const { return variables.size() - equations.size(); }

  // Throws Error(malformed_system) when an invariant is broken.
  void validate() const;

  bool operator==(const LtiDaeSystem&) const = default;
};

// Builds a system with eta set to the largest lag used, then validates it.
LtiDaeSystem make_system(std::vector<std::string> variables, std::vector<Equation> equations);

struct ConstraintMatrix {
  Eigen::MatrixXd entries;
  std::size_t variables = 0;
  std::size_t eta = 0;

  std::size_t rows() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t column(std::size_t variable, std::size_t lag) const { return lag * variables + variable; }
  Eigen::MatrixXd instantaneous() const { return entries.leftCols(static_cast<Eigen::Index>(variables)); }
  Eigen::MatrixXd lagged() const {
    return entries.rightCols(entries.cols() - static_cast<Eigen::Index>(variables));
  }
};

// Rows follow equation order; each row is divided by the output's lag-0
// coefficient so that coefficient becomes +1.
ConstraintMatrix build_constraint_matrix(const LtiDaeSystem& system);

// Every equation shifted by s = 0 .. L - order, padded to M(L+1) columns.
// Its rank is the number of linear relations visible at stacking lag L.
ConstraintMatrix padded_constraints(const LtiDaeSystem& system, std::size_t lag);

// (L+1) n_a + sum over difference equations of (L - eta_i + 1), for L >= each eta_i.
std::size_t expected_constraint_count(const LtiDaeSystem& system, std::size_t lag);

std::size_t numerical_rank(const Eigen::MatrixXd& m, double rtol = 1e-10);

struct PartitionTruth {
  IndexSet dependent;
  std::size_t rank = 0;
  bool admissible = false;
  IndexSet free;
};

// Enumerates all C(M, n_dep) dependent sets in lexicographic order and checks
// the rank of the square instantaneous submatrix.
std::vector<PartitionTruth> ground_truth_partitions(const ConstraintMatrix& a, double rtol = 1e-10);

// max_k |A x[k,eta]|_inf / max|x| over all k where the full window is available.
// `trajectory` is M x N (row per variable).
double max_relative_residual(const ConstraintMatrix& a, const Eigen::MatrixXd& trajectory);

}  // namespace povdae
