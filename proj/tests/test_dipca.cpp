#include <doctest.h>

#include <algorithm>
#include <random>

#include "povdae/dipca.hpp"
#include "povdae/error.hpp"
#include "povdae/io.hpp"
#include "povdae/simulate.hpp"

using namespace povdae;

namespace {

LtiDaeSystem load(const std::string& name) {
  return io::read_system(std::string(POVDAE_DATA_DIR) + "/systems/" + name + ".json").system;
}

Eigen::MatrixXd white(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(rows, cols);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
  return z;
}

MeasurementSet two_tank(std::size_t n, std::uint64_t seed, std::vector<double> snr = {2, 3, 5}) {
  const auto sys = load("two_tank");
  return add_noise(simulate_noise_free(sys, default_sources(sys), n, default_burn_in, mix_seed(seed, 1)), snr,
                   mix_seed(seed, 2));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("count_unity") {
  CHECK(count_unity(std::vector<double>{5.31, 4.99, 1.02, 0.98}) == 2);
  CHECK(count_unity(std::vector<double>{8.92, 5.24, 5.05, 4.95, 1.07, 1.05, 1.03, 0.99, 0.98, 0.96, 0.94, 0.93}) ==
        8);
  CHECK(count_unity(std::vector<double>{9.0, 4.0, 2.5}) == 0);
  CHECK(count_unity(std::vector<double>{}) == 0);
  CHECK(count_unity(std::vector<double>{3.0, 1.1, 1.5, 0.9}, 1.2) == 1);
}

TEST_CASE("minimum identifiable constraint count") {
  CHECK(min_identifiable_constraints(2) == 2);
  CHECK(min_identifiable_constraints(3) == 2);
  CHECK(min_identifiable_constraints(4) == 3);
  CHECK(min_identifiable_constraints(6) == 3);
  CHECK(min_identifiable_constraints(7) == 4);
}

TEST_CASE("pure noise with the whole space residual recovers sample variances") {
  std::mt19937_64 rng(77);
  Eigen::MatrixXd z = white(rng, 2, 100000);
  z.row(0) *= 0.5;
  z.row(1) *= 3.0;
  NoiseOptions opts;
  opts.constraints = 2;
  const auto model = estimate_noise(z, 0, opts);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const Eigen::ArrayXd c = z.row(i).array() - z.row(i).mean();
    const double sample_var = c.square().mean();
    CHECK(std::abs(model.sigmas[static_cast<std::size_t>(i)] * model.sigmas[static_cast<std::size_t>(i)] /
                       sample_var -
                   1.0) < 0.02);
  }
}

TEST_CASE("equal noise levels give equal estimates") {
  const auto sys = load("two_tank");
  const auto traj = simulate_noise_free(sys, default_sources(sys), 20000, 500, 12);
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd z = traj.data + 0.2 * white(rng, 3, 20000);
  const auto model = estimate_noise(z, 5);
  const auto [lo, hi] = std::minmax_element(model.sigmas.begin(), model.sigmas.end());
  CHECK(*hi / *lo - 1.0 < 0.05);
  CHECK(model.d_used == 10);
}

TEST_CASE("two-tank noise estimates") {
  const auto meas = two_tank(2047, 2024);
  const auto model = estimate_noise(meas.data, 5);
  CHECK(model.converged);
  CHECK(model.d_used == 10);
  for (std::size_t i = 0; i < 3; ++i) {
    const double ratio = model.sigmas[i] * model.sigmas[i] / (meas.true_sigmas[i] * meas.true_sigmas[i]);
    CHECK(std::abs(ratio - 1.0) < 0.25);
  }
}

TEST_CASE("scaling a measurement scales its noise estimate") {
  const auto meas = two_tank(2047, 31);
  const auto base = estimate_noise(meas.data, 5);
  const double c = 7.5;
  Eigen::MatrixXd scaled = meas.data;
  scaled.row(1) *= c;
  const auto model = estimate_noise(scaled, 5);
  CHECK(model.d_used == base.d_used);
  CHECK(model.sigmas[1] / (c * base.sigmas[1]) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(model.sigmas[0] / base.sigmas[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(model.sigmas[2] / base.sigmas[2] == doctest::Approx(1.0).epsilon(1e-5));

  const auto s1 = scaled_spectrum(meas.data, 5, base);
  const auto s2 = scaled_spectrum(scaled, 5, model);
  REQUIRE(s1.singular_values.size() == s2.singular_values.size());
  for (std::size_t i = 0; i < s1.singular_values.size(); ++i) {
    CHECK(std::abs(s1.singular_values[i] - s2.singular_values[i]) < 1e-6 * s1.singular_values[0]);
  }
}

TEST_CASE("constraint basis rows are orthonormal") {
  const auto meas = two_tank(2047, 5);
  const auto model = estimate_noise(meas.data, 5);
  const auto basis = scaled_spectrum(meas.data, 5, model);
  REQUIRE(basis.unity_count() == 10);
  REQUIRE(basis.rows.rows() == 10);
  const Eigen::MatrixXd gram = basis.rows * basis.rows.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::is_sorted(basis.singular_values.rbegin(), basis.singular_values.rend()));
  for (Eigen::Index r = 0; r < basis.rows.rows(); ++r) {
    Eigen::Index arg = 0;
    basis.rows.row(r).cwiseAbs().maxCoeff(&arg);
    CHECK(basis.rows(r, arg) > 0.0);
  }
}

TEST_CASE("noise-free data scaled by an assumed noise floor") {
  const auto sys = load("two_tank");
  const auto traj = simulate_noise_free(sys, default_sources(sys), 2047, 500, 3);
  NoiseModel floor;
  floor.sigmas = {0.1, 0.1, 0.1};
  const auto basis = scaled_spectrum(traj.data, 5, floor);
  CHECK(basis.singular_values.back() < 1e-8);
  CHECK(std::count_if(basis.singular_values.begin(), basis.singular_values.end(),
                      [](double s) { return s < 1e-8; }) == 10);
  CHECK_FALSE(basis.warnings.empty());
}

TEST_CASE("noise estimation error shrinks with more data") {
  auto median_error = [](std::size_t n) {
    std::vector<double> errors;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      const auto meas = two_tank(n, 500 + seed);
      const auto model = estimate_noise(meas.data, 5);
      double worst = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(model.sigmas[i] / meas.true_sigmas[i] - 1.0));
      }
      errors.push_back(worst);
    }
    return median(errors);
  };
  const double small = median_error(1000);
  const double large = median_error(100000);
  CHECK(large < small);
  CHECK(large < 0.05);
}

TEST_CASE("identifiability and argument errors") {
  const auto meas = two_tank(500, 1);
  NoiseOptions opts;
  opts.constraints = 1;
  try {
    estimate_noise(meas.data, 2, opts);
    FAIL("expected not_identifiable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_identifiable);
  }
  opts.constraints = 19;
  CHECK_THROWS_AS(estimate_noise(meas.data, 5, opts), Error);

  Eigen::MatrixXd constant = meas.data;
  constant.row(0).setConstant(2.0);
  CHECK_THROWS_AS(estimate_noise(constant, 2), Error);

  CHECK_THROWS_AS(estimate_noise(meas.data.leftCols(10), 5), Error);
}

TEST_CASE("non-convergence is reported, not thrown") {
  const auto meas = two_tank(2047, 9);
  NoiseOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 0.0;
  const auto model = estimate_noise(meas.data, 5, opts);
  CHECK_FALSE(model.converged);
  CHECK_FALSE(model.warnings.empty());
}
