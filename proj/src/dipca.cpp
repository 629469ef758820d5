#include "povdae/dipca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "povdae/error.hpp"
#include "povdae/lagstack.hpp"

namespace povdae {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Negative log-likelihood of the constraint residuals, up to constants and
// the factor N/2:  log det G + tr(G^-1 R),  G = sum_i var_i P_i.
class ResidualLikelihood {
 public:
  ResidualLikelihood(const Eigen::MatrixXd& a, const Eigen::MatrixXd& gram, std::size_t variables)
      : residual_cov_(a * gram * a.transpose()) {
    const auto d = a.rows();
    const auto m = static_cast<Eigen::Index>(variables);
    per_variable_.assign(variables, Eigen::MatrixXd::Zero(d, d));
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      per_variable_[static_cast<std::size_t>(j % m)] += a.col(j) * a.col(j).transpose();
    }
  }

  // Returns +inf when G is not positive definite.
  double operator()(const Eigen::VectorXd& log_var, Eigen::VectorXd* grad) const {
    const auto d = residual_cov_.rows();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = 0; i < per_variable_.size(); ++i) {
      g += std::exp(log_var(static_cast<Eigen::Index>(i))) * per_variable_[i];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(g);
    if (llt.info() != Eigen::Success) return kInf;
    const Eigen::MatrixXd l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const Eigen::MatrixXd g_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd g_inv_r = g_inv * residual_cov_;
    const double value = logdet + g_inv_r.trace();
    if (!std::isfinite(value)) return kInf;
    if (grad) {
      const Eigen::MatrixXd k = g_inv - g_inv_r * g_inv;
      grad->resize(log_var.size());
      for (std::size_t i = 0; i < per_variable_.size(); ++i) {
        (*grad)(static_cast<Eigen::Index>(i)) =
            std::exp(log_var(static_cast<Eigen::Index>(i))) * (k.cwiseProduct(per_variable_[i])).sum();
      }
    }
    return value;
  }

 private:
  Eigen::MatrixXd residual_cov_;
  std::vector<Eigen::MatrixXd> per_variable_;
};

// Box-clamped BFGS on the log-variances.
Eigen::VectorXd minimize_bfgs(const ResidualLikelihood& f, Eigen::VectorXd x, const Eigen::VectorXd& lower,
                              const Eigen::VectorXd& upper) {
  const auto n = x.size();
  auto clamp = [&](Eigen::VectorXd v) { return v.cwiseMax(lower).cwiseMin(upper); };
  x = clamp(x);
  Eigen::VectorXd grad;
  double fx = f(x, &grad);
  if (!std::isfinite(fx)) return x;
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  constexpr double max_step = 2.0;
  for (int iter = 0; iter < 100; ++iter) {
    if (grad.cwiseAbs().maxCoeff() < 1e-10) break;
    Eigen::VectorXd dir = -h * grad;
    if (grad.dot(dir) >= 0.0) {
      h.setIdentity();
      dir = -grad;
    }
    const double longest = dir.cwiseAbs().maxCoeff();
    if (longest > max_step) dir *= max_step / longest;

    double alpha = 1.0;
    Eigen::VectorXd trial;
    Eigen::VectorXd trial_grad;
    double f_trial = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      trial = clamp(x + alpha * dir);
      f_trial = f(trial, &trial_grad);
      if (std::isfinite(f_trial) && f_trial <= fx + 1e-4 * grad.dot(trial - x)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    const Eigen::VectorXd s = trial - x;
    const Eigen::VectorXd y = trial_grad - grad;
    const double improvement = fx - f_trial;
    x = trial;
    grad = trial_grad;
    fx = f_trial;
    const double sy = s.dot(y);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      h = (id - rho * s * y.transpose()) * h * (id - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    if (improvement < 1e-14 * (1.0 + std::abs(fx))) break;
  }
  return x;
}

Eigen::VectorXd column_weights(const std::vector<double>& variances, std::size_t lag) {
  const std::size_t m = variances.size();
  Eigen::VectorXd w(static_cast<Eigen::Index>(m * (lag + 1)));
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = 1.0 / std::sqrt(variances[static_cast<std::size_t>(j) % m]);
  return w;
}

// Ascending eigen-decomposition of the scaled Gram matrix.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> scaled_eigen(const Eigen::MatrixXd& gram, const Eigen::VectorXd& w) {
  const Eigen::MatrixXd scaled = w.asDiagonal() * gram * w.asDiagonal();
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(scaled);
}

std::vector<double> descending_singular_values(const Eigen::VectorXd& ascending_eigenvalues) {
  std::vector<double> out(static_cast<std::size_t>(ascending_eigenvalues.size()));
  for (Eigen::Index i = 0; i < ascending_eigenvalues.size(); ++i) {
    out[out.size() - 1 - static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, ascending_eigenvalues(i)));
  }
  return out;
}

Eigen::MatrixXd gram_of(const Eigen::MatrixXd& measurements, std::size_t lag, bool center) {
  const auto z = build_lag_matrix(measurements, lag, center);
  return z.entries.transpose() * z.entries;
}

// Checks the d smallest values are within the band and separated from the rest.
// Pure-noise scaled singular values spread roughly as 1 +- sqrt(columns / rows).
double unity_band(const NoiseOptions& opt, std::size_t columns, std::size_t rows) {
  return std::min(opt.unity_band, opt.edge_factor * std::sqrt(static_cast<double>(columns) / static_cast<double>(rows)));
}

bool accept_constraint_count(const std::vector<double>& spectrum, std::size_t d, const NoiseOptions& opt, double band,
                             bool require_gap) {
  const std::size_t n = spectrum.size();
  for (std::size_t i = n - d; i < n; ++i) {
    if (std::abs(spectrum[i] - 1.0) > band) return false;
  }
  if (!require_gap || d == n) return true;
  const double inner = spectrum[n - d];
  const double outer = spectrum[n - d - 1];
  return outer >= opt.min_gap_ratio * inner;
}

}  // namespace

std::size_t min_identifiable_constraints(std::size_t variables) {
  std::size_t d = 1;
  while (d * (d + 1) < 2 * variables) ++d;
  return d;
}

DipcaRun run_dipca(const Eigen::MatrixXd& gram, std::size_t variables, std::size_t lag, std::size_t d,
                   std::vector<double> initial_variances, const NoiseOptions& options) {
  const auto n = gram.rows();
  const auto m = static_cast<Eigen::Index>(variables);
  if (gram.cols() != n || n != m * static_cast<Eigen::Index>(lag + 1)) {
    throw Error(ErrorCode::shape, "gram matrix does not match variable count and lag");
  }
  if (d == 0 || static_cast<Eigen::Index>(d) > n) {
    throw Error(ErrorCode::configuration, "constraint count must be in [1, " + std::to_string(n) + "]");
  }
  Eigen::VectorXd lower(m);
  Eigen::VectorXd upper(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double total = std::max(gram(i, i), std::numeric_limits<double>::min() * 1e10);
    lower(i) = std::log(total * 1e-10);
    upper(i) = std::log(total);
  }

  DipcaRun run;
  run.variances = std::move(initial_variances);
  const auto dd = static_cast<Eigen::Index>(d);
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd w = column_weights(run.variances, lag);
    const auto eig = scaled_eigen(gram, w);
    const Eigen::MatrixXd a = eig.eigenvectors().leftCols(dd).transpose() * w.asDiagonal();
    const ResidualLikelihood likelihood(a, gram, variables);

    Eigen::VectorXd log_var(m);
    for (Eigen::Index i = 0; i < m; ++i) log_var(i) = std::log(run.variances[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd next = minimize_bfgs(likelihood, log_var, lower, upper);

    double change = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double old_sigma = std::sqrt(run.variances[static_cast<std::size_t>(i)]);
      const double new_sigma = std::exp(0.5 * next(i));
      change = std::max(change, std::abs(new_sigma - old_sigma) / old_sigma);
      run.variances[static_cast<std::size_t>(i)] = std::exp(next(i));
    }
    run.iterations = it;
    if (change < options.tolerance) {
      run.converged = true;
      break;
    }
  }
  run.spectrum = descending_singular_values(scaled_eigen(gram, column_weights(run.variances, lag)).eigenvalues());
  return run;
}

NoiseModel estimate_noise(const Eigen::MatrixXd& measurements, std::size_t lag, const NoiseOptions& options) {
  require_overdetermined(measurements, lag);
  const std::size_t m = static_cast<std::size_t>(measurements.rows());
  const std::size_t n = m * (lag + 1);
  const std::size_t d_min = min_identifiable_constraints(m);

  NoiseModel model;
  model.lag = lag;

  const Eigen::MatrixXd gram = gram_of(measurements, lag, options.center);
  std::vector<double> init(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double var = gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    if (!(var > 0.0)) {
      throw Error(ErrorCode::not_identifiable, "measurement " + std::to_string(i) + " has zero variance");
    }
    init[i] = options.initial_fraction * options.initial_fraction * var;
  }

  auto finish = [&](const DipcaRun& run, std::size_t d) {
    model.d_used = d;
    model.iterations = run.iterations;
    model.converged = run.converged;
    model.sigmas.resize(m);
    for (std::size_t i = 0; i < m; ++i) model.sigmas[i] = std::sqrt(run.variances[i]);
    if (d * (d + 1) < 2 * n) {
      model.warnings.push_back("d(d+1) >= 2M(L+1) does not hold for d = " + std::to_string(d));
    }
    if (!run.converged) {
      model.warnings.push_back("noise estimation stopped after " + std::to_string(run.iterations) +
                               " iterations without converging");
    }
    return model;
  };

  if (options.constraints) {
    const std::size_t d = *options.constraints;
    if (d * (d + 1) < 2 * m) {
      throw Error(ErrorCode::not_identifiable, "d = " + std::to_string(d) + " cannot identify " + std::to_string(m) +
                                                   " variances (need d(d+1) >= 2M)");
    }
    if (d > n) throw Error(ErrorCode::configuration, "d must not exceed M(L+1) = " + std::to_string(n));
    return finish(run_dipca(gram, m, lag, d, init, options), d);
  }

  if (d_min >= n) {
    throw Error(ErrorCode::not_identifiable, "lag " + std::to_string(lag) + " leaves no identifiable constraint count");
  }
  const double band = unity_band(options, n, static_cast<std::size_t>(measurements.cols()) - lag);
  std::optional<std::pair<DipcaRun, std::size_t>> in_band;
  for (std::size_t d = n - 1; d >= d_min; --d) {
    auto run = run_dipca(gram, m, lag, d, init, options);
    if (accept_constraint_count(run.spectrum, d, options, band, true)) return finish(run, d);
    if (!in_band && accept_constraint_count(run.spectrum, d, options, band, false)) in_band.emplace(std::move(run), d);
    if (d == d_min) break;
  }
  if (in_band) {
    model.warnings.push_back("no constraint count showed a clear gap; using the largest in-band count");
    return finish(in_band->first, in_band->second);
  }
  model.warnings.push_back("no constraint count produced unity singular values; using d = " + std::to_string(d_min));
  return finish(run_dipca(gram, m, lag, d_min, init, options), d_min);
}

ConstraintBasis scaled_spectrum(const Eigen::MatrixXd& measurements, std::size_t lag, const NoiseModel& noise,
                                double unity_ceiling, bool center) {
  const auto m = static_cast<std::size_t>(measurements.rows());
  if (noise.sigmas.size() != m) throw Error(ErrorCode::shape, "noise model does not match variable count");
  for (double s : noise.sigmas) {
    if (!(s > 0.0)) throw Error(ErrorCode::configuration, "noise sigmas must be positive");
  }
  require_overdetermined(measurements, lag);
  Eigen::MatrixXd scaled = measurements;
  for (std::size_t i = 0; i < m; ++i) scaled.row(static_cast<Eigen::Index>(i)) /= noise.sigmas[i];
  const auto z = build_lag_matrix(scaled, lag, center);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(z.entries, Eigen::ComputeThinV);

  ConstraintBasis basis;
  basis.lag = lag;
  basis.variables = m;
  basis.sigmas = noise.sigmas;
  const auto& sv = svd.singularValues();
  basis.singular_values.assign(sv.data(), sv.data() + sv.size());
  const std::size_t d = count_unity(basis.singular_values, unity_ceiling);
  const auto n = static_cast<Eigen::Index>(basis.singular_values.size());
  const auto dd = static_cast<Eigen::Index>(d);
  basis.rows = svd.matrixV().rightCols(dd).transpose();
  for (Eigen::Index r = 0; r < basis.rows.rows(); ++r) {
    Eigen::Index arg = 0;
    basis.rows.row(r).cwiseAbs().maxCoeff(&arg);
    if (basis.rows(r, arg) < 0.0) basis.rows.row(r) *= -1.0;
  }
  if (n > 0 && basis.singular_values.back() < 0.1) {
    basis.warnings.push_back("smallest scaled singular value is far below unity; noise levels look overestimated "
                             "or the data are nearly noise-free");
  }
  return basis;
}

std::size_t count_unity(std::span<const double> spectrum, double unity_ceiling) {
  std::size_t count = 0;
  for (auto it = spectrum.rbegin(); it != spectrum.rend() && *it < unity_ceiling; ++it) ++count;
  return count;
}

}  // namespace povdae
