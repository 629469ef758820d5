#include "povdae/lagstack.hpp"

#include <cmath>
#include <string>

#include "povdae/error.hpp"

namespace povdae {

LagMatrix build_lag_matrix(const Eigen::MatrixXd& measurements, std::size_t lag, bool center) {
  const auto m = measurements.rows();
  const auto n_total = measurements.cols();
  const auto l = static_cast<Eigen::Index>(lag);
  if (m == 0) throw Error(ErrorCode::shape, "no variables");
  if (n_total <= l) {
    throw Error(ErrorCode::data_too_short,
                std::to_string(n_total) + " samples cannot be stacked with lag " + std::to_string(lag));
  }
  const Eigen::Index n = n_total - l;
  LagMatrix out;
  out.lag = lag;
  out.variables = static_cast<std::size_t>(m);
  out.centered = center;
  out.entries.resize(n, m * (l + 1));
  for (Eigen::Index b = 0; b <= l; ++b) {
    out.entries.middleCols(b * m, m) = measurements.middleCols(l - b, n).transpose();
  }
  if (center) out.entries.rowwise() -= out.entries.colwise().mean();
  out.entries /= std::sqrt(static_cast<double>(n));
  return out;
}

void require_overdetermined(const Eigen::MatrixXd& measurements, std::size_t lag) {
  const auto m = static_cast<std::size_t>(measurements.rows());
  const auto n_total = static_cast<std::size_t>(measurements.cols());
  const std::size_t cols = m * (lag + 1);
  if (n_total <= lag || n_total - lag <= cols) {
    throw Error(ErrorCode::data_too_short, std::to_string(n_total) + " samples give fewer rows than the " +
                                               std::to_string(cols) + " columns needed at lag " + std::to_string(lag));
  }
}

}  // namespace povdae
