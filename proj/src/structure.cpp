#include "povdae/structure.hpp"

#include <cmath>
#include <string>

#include "povdae/error.hpp"

namespace povdae {

namespace {

std::size_t unity_at(const Eigen::MatrixXd& measurements, const NoiseModel& noise, std::size_t lag,
                     double unity_ceiling, bool center) {
  return scaled_spectrum(measurements, lag, noise, unity_ceiling, center).unity_count();
}

}  // namespace

std::size_t estimate_na(const Eigen::MatrixXd& measurements, const NoiseModel& noise, double unity_ceiling,
                        bool center) {
  return unity_at(measurements, noise, 0, unity_ceiling, center);
}

std::size_t nd_from_counts(std::size_t d1, std::size_t lag1, std::size_t d2, std::size_t lag2, std::size_t n_a,
                           double integer_tolerance) {
  if (lag1 <= lag2) throw Error(ErrorCode::configuration, "need L1 > L2");
  const double quotient = (static_cast<double>(d1) - static_cast<double>(d2)) / static_cast<double>(lag1 - lag2);
  const double nd = quotient - static_cast<double>(n_a);
  const double rounded = std::round(nd);
  const std::string counts = "d=" + std::to_string(d1) + "@L=" + std::to_string(lag1) + ", d=" + std::to_string(d2) +
                             "@L=" + std::to_string(lag2) + ", n_a=" + std::to_string(n_a);
  if (std::abs(nd - rounded) > integer_tolerance) {
    throw Error(ErrorCode::inconsistent_counts,
                "non-integer n_d " + std::to_string(nd) + " from " + counts + " (lags below the system order?)");
  }
  if (rounded < 0.0) {
    throw Error(ErrorCode::inconsistent_counts, "negative n_d from " + counts);
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t estimate_nd(const Eigen::MatrixXd& measurements, const NoiseModel& noise, std::size_t lag1,
                        std::size_t lag2, std::size_t n_a, double unity_ceiling, bool center) {
  const std::size_t d1 = unity_at(measurements, noise, lag1, unity_ceiling, center);
  const std::size_t d2 = unity_at(measurements, noise, lag2, unity_ceiling, center);
  return nd_from_counts(d1, lag1, d2, lag2, n_a);
}

StructureEstimate estimate_structure(const Eigen::MatrixXd& measurements, const NoiseModel& noise,
                                     const StructureOptions& options) {
  StructureEstimate est;
  const auto m = static_cast<std::size_t>(measurements.rows());
  est.n_a = estimate_na(measurements, noise, options.unity_ceiling, options.center);
  est.d_at_lag[0] = est.n_a;
  est.lag1 = options.lag1;
  est.lag2 = options.lag2.value_or(est.n_a > 0 ? 0 : 1);
  if (est.lag1 <= est.lag2) {
    throw Error(ErrorCode::configuration,
                "L1 (" + std::to_string(est.lag1) + ") must exceed L2 (" + std::to_string(est.lag2) + ")");
  }
  for (std::size_t lag : {est.lag1, est.lag2}) {
    if (!est.d_at_lag.count(lag)) {
      est.d_at_lag[lag] = unity_at(measurements, noise, lag, options.unity_ceiling, options.center);
    }
  }
  est.n_d = nd_from_counts(est.d_at_lag[est.lag1], est.lag1, est.d_at_lag[est.lag2], est.lag2, est.n_a,
                           options.integer_tolerance);
  if (est.n_a + est.n_d >= m) {
    throw Error(ErrorCode::no_free_variables, "n_a + n_d = " + std::to_string(est.n_a + est.n_d) +
                                                  " leaves no free variable among " + std::to_string(m));
  }
  est.n_s = m - est.n_a - est.n_d;
  return est;
}

}  // namespace povdae
