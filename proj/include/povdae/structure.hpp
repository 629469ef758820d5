#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <optional>

#include "povdae/dipca.hpp"

namespace povdae {

struct StructureEstimate {
  std::size_t n_a = 0;
  std::size_t n_d = 0;
  std::size_t n_s = 0;
  std::map<std::size_t, std::size_t> d_at_lag;
  std::size_t lag1 = 0;
  std::size_t lag2 = 0;

  bool operator==(const StructureEstimate&) const = default;
};

struct StructureOptions {
  std::size_t lag1 = 5;
  std::optional<std::size_t> lag2;  // 0 when n_a > 0, else 1
  double unity_ceiling = default_unity_ceiling;
  double integer_tolerance = 0.05;
  bool center = true;
};

std::size_t estimate_na(const Eigen::MatrixXd& measurements, const NoiseModel& noise,
                        double unity_ceiling = default_unity_ceiling, bool center = true);

// n_d = (d1 - d2) / (L1 - L2) - n_a, accepted only when the quotient is
// within `integer_tolerance` of a non-negative integer.
std::size_t nd_from_counts(std::size_t d1, std::size_t lag1, std::size_t d2, std::size_t lag2, std::size_t n_a,
                           double integer_tolerance = 0.05);

std::size_t estimate_nd(const Eigen::MatrixXd& measurements, const NoiseModel& noise, std::size_t lag1,
                        std::size_t lag2, std::size_t n_a, double unity_ceiling = default_unity_ceiling,
                        bool center = true);

StructureEstimate estimate_structure(const Eigen::MatrixXd& measurements, const NoiseModel& noise,
                                     const StructureOptions& options = {});

}  // namespace povdae
