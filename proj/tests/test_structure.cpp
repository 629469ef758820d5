#include <doctest.h>

#include <random>

#include "povdae/error.hpp"
#include "povdae/io.hpp"
#include "povdae/simulate.hpp"
#include "povdae/structure.hpp"

using namespace povdae;

namespace {

LtiDaeSystem load(const std::string& name) {
  return io::read_system(std::string(POVDAE_DATA_DIR) + "/systems/" + name + ".json").system;
}

MeasurementSet measure(const std::string& name, std::size_t n, std::vector<double> snr, std::uint64_t seed) {
  const auto sys = load(name);
  return add_noise(simulate_noise_free(sys, default_sources(sys), n, default_burn_in, mix_seed(seed, 1)), snr,
                   mix_seed(seed, 2));
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

}  // namespace

TEST_CASE("n_d from unity counts") {
  CHECK(nd_from_counts(10, 5, 2, 1, 0) == 2);
  CHECK(nd_from_counts(8, 2, 2, 0, 2) == 1);
  // purely algebraic: counts grow by n_a per lag
  CHECK(nd_from_counts(12, 5, 2, 0, 2) == 0);
  CHECK(code_of([] { nd_from_counts(9, 5, 2, 1, 0); }) == ErrorCode::inconsistent_counts);
  CHECK(code_of([] { nd_from_counts(6, 2, 2, 0, 3); }) == ErrorCode::inconsistent_counts);
  CHECK(code_of([] { nd_from_counts(6, 1, 2, 1, 0); }) == ErrorCode::configuration);
}

TEST_CASE("two-tank structure") {
  const auto meas = measure("two_tank", 2047, {2, 3, 5}, 2024);
  const auto noise = estimate_noise(meas.data, 5);
  CHECK(estimate_na(meas.data, noise) == 0);
  CHECK(estimate_nd(meas.data, noise, 5, 1, 0) == 2);
  const auto s = estimate_structure(meas.data, noise);
  CHECK(s.n_a == 0);
  CHECK(s.n_d == 2);
  CHECK(s.n_s == 1);
  CHECK(s.lag1 == 5);
  CHECK(s.lag2 == 1);
  CHECK(s.d_at_lag.at(5) == 10);
  CHECK(s.d_at_lag.at(1) == 2);
}

TEST_CASE("RC circuit structure") {
  const auto meas = measure("rc_circuit", 1000, {5, 4, 6, 8}, 2024);
  const auto noise = estimate_noise(meas.data, 5);
  CHECK(estimate_na(meas.data, noise) == 2);
  CHECK(estimate_nd(meas.data, noise, 2, 0, 2) == 1);
  const auto s = estimate_structure(meas.data, noise);
  CHECK(s.n_a == 2);
  CHECK(s.n_d == 1);
  CHECK(s.n_s == 1);
  CHECK(s.lag2 == 0);
  CHECK(s.d_at_lag.at(0) == 2);
  CHECK(s.d_at_lag.at(5) == 17);
}

TEST_CASE("feedback example structure from nearly noise-free data") {
  const auto meas = measure("feedback_stable", 4000, {1e6, 1e6, 1e6, 1e6, 1e6}, 8);
  const auto noise = estimate_noise(meas.data, 5);
  const auto s = estimate_structure(meas.data, noise);
  CHECK(s.n_a == 1);
  CHECK(s.n_d == 2);
  CHECK(s.n_s == 2);
}

TEST_CASE("independent white noise has no algebraic constraints") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Eigen::MatrixXd z(3, 5000);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
  NoiseModel model;
  model.sigmas = {0.1, 0.1, 0.1};
  CHECK(estimate_na(z, model) == 0);
}

TEST_CASE("no free variables") {
  const auto meas = measure("two_tank", 2047, {2, 3, 5}, 1);
  NoiseModel wrong;
  // sigmas far too large make every direction look like a constraint
  wrong.sigmas = {100.0, 100.0, 100.0};
  CHECK(code_of([&] { estimate_structure(meas.data, wrong); }) == ErrorCode::no_free_variables);
}
