#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace povdae {

// Row r holds [z[k], z[k-1], ..., z[k-L]] for k = L + r (0-based), each block
// ordered by variable, so columns line up with ConstraintMatrix columns.
// All entries carry the 1/sqrt(N) factor, N = N_total - L.
struct LagMatrix {
  Eigen::MatrixXd entries;
  std::size_t lag = 0;
  std::size_t variables = 0;
  bool centered = true;

  std::size_t rows() const { return static_cast<std::size_t>(entries.rows()); }
  std::size_t column(std::size_t variable, std::size_t lag_index) const { return lag_index * variables + variable; }
  std::size_t variable_of(std::size_t column) const { return column % variables; }
  std::size_t lag_of(std::size_t column) const { return column / variables; }
};

// measurements: M x N_total, row per variable. Requires N_total > L.
LagMatrix build_lag_matrix(const Eigen::MatrixXd& measurements, std::size_t lag, bool center = true);

// Throws data_too_short unless N_total - L > M (L + 1).
void require_overdetermined(const Eigen::MatrixXd& measurements, std::size_t lag);

}  // namespace povdae
