#pragma once

// Dynamic iterative PCA.
//
// Alternates between (i) scaling the lagged data matrix by the current noise
// standard deviations and taking the right singular vectors of the d smallest
// singular values as constraint rows, and (ii) re-estimating the diagonal
// noise variances by maximising the Gaussian likelihood of the constraint
// residuals. At the fixed point the d constraint directions of the scaled
// data have singular values near one.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace povdae {

inline constexpr double default_unity_ceiling = 1.2;

struct NoiseOptions {
  std::optional<std::size_t> constraints;  // d; chosen automatically when empty
  double tolerance = 1e-6;
  std::size_t max_iterations = 200;
  double initial_fraction = 0.1;  // initial sigma as a fraction of each sample std
  double unity_band = 0.25;       // accepted |s - 1| for the d smallest values, upper cap
  double edge_factor = 1.25;      // band also capped at edge_factor * sqrt(M(L+1) / N)
  double min_gap_ratio = 1.1;     // s_(d+1) / s_d, counted from the smallest
  bool center = true;
};

struct NoiseModel {
  std::vector<double> sigmas;
  std::size_t d_used = 0;
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t lag = 0;
  std::vector<std::string> warnings;

  bool operator==(const NoiseModel&) const = default;
};

struct ConstraintBasis {
  std::vector<double> singular_values;  // descending, length M(L+1)
  Eigen::MatrixXd rows;                 // d_L x M(L+1), orthonormal, scaled coordinates
  std::size_t lag = 0;
  std::size_t variables = 0;
  std::vector<double> sigmas;
  std::vector<std::string> warnings;

  std::size_t unity_count() const { return static_cast<std::size_t>(rows.rows()); }
};

// Result of the alternating iteration at a fixed constraint count.
struct DipcaRun {
  std::vector<double> variances;
  std::vector<double> spectrum;  // descending scaled singular values
  std::size_t iterations = 0;
  bool converged = false;
};

// `gram` is Z^T Z of the (centered, 1/sqrt(N)) lag matrix.
DipcaRun run_dipca(const Eigen::MatrixXd& gram, std::size_t variables, std::size_t lag, std::size_t d,
                   std::vector<double> initial_variances, const NoiseOptions& options);

// Smallest d with d(d+1) >= 2M.
std::size_t min_identifiable_constraints(std::size_t variables);

NoiseModel estimate_noise(const Eigen::MatrixXd& measurements, std::size_t lag, const NoiseOptions& options = {});

ConstraintBasis scaled_spectrum(const Eigen::MatrixXd& measurements, std::size_t lag, const NoiseModel& noise,
                                double unity_ceiling = default_unity_ceiling, bool center = true);

// Number of trailing (smallest) values below the ceiling.
std::size_t count_unity(std::span<const double> spectrum, double unity_ceiling = default_unity_ceiling);

}  // namespace povdae
