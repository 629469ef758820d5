#include <doctest.h>

#include <random>

#include "povdae/error.hpp"
#include "povdae/io.hpp"
#include "povdae/simulate.hpp"
#include "povdae/sysmodel.hpp"
#include "test_support.hpp"

using namespace povdae;

namespace {

LtiDaeSystem load(const std::string& name) {
  return io::read_system(std::string(POVDAE_DATA_DIR) + "/systems/" + name + ".json").system;
}

Equation difference(std::size_t out, std::vector<Term> terms) {
  return {EquationKind::difference, std::move(terms), out};
}

Equation algebraic(std::size_t out, std::vector<Term> terms) {
  return {EquationKind::algebraic, std::move(terms), out};
}

void check_matrix(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
  REQUIRE(got.rows() == want.rows());
  REQUIRE(got.cols() == want.cols());
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-15);
}

}  // namespace

TEST_CASE("constraint matrix of the open-loop example") {
  // x = [y1, y2, u1, u2]
  const auto sys = make_system({"y1", "y2", "u1", "u2"},
                               {difference(0, {{0, 0, 1}, {0, 1, -0.5}, {2, 1, -2}}),
                                difference(1, {{1, 0, 1}, {1, 1, -0.8}, {2, 1, -1.2}, {3, 1, -1}})});
  const auto a = build_constraint_matrix(sys);
  Eigen::MatrixXd want(2, 8);
  want << 1, 0, 0, 0, -0.5, 0, -2, 0,  //
      0, 1, 0, 0, 0, -0.8, -1.2, -1;
  check_matrix(a.entries, want);
  CHECK(a.eta == 1);
  CHECK(a.instantaneous().cols() == 4);
  CHECK(a.lagged().cols() == 4);
  CHECK(a.column(2, 1) == 6);
  check_matrix(build_constraint_matrix(load("open_loop_example")).entries, want);
}

TEST_CASE("constraint matrix of the two-tank system") {
  // x = [F0, h1, h2]; rows follow the recursion h2[k] = 0.7168 h2[k-1] + 0.1772 h1[k-1]
  const auto sys = make_system({"F0", "h1", "h2"}, {difference(1, {{1, 0, 1}, {1, 1, -0.659}, {0, 1, -0.6815}}),
                                                    difference(2, {{2, 0, 1}, {2, 1, -0.7168}, {1, 1, -0.1772}})});
  Eigen::MatrixXd want(2, 6);
  want << 0, 1, 0, -0.6815, -0.659, 0,  //
      0, 0, 1, 0, -0.1772, -0.7168;
  check_matrix(build_constraint_matrix(sys).entries, want);
  CHECK((build_constraint_matrix(sys).entries.col(0).array() == 0).all());
}

TEST_CASE("single algebraic equation") {
  const auto sys = make_system({"x1", "x2"}, {algebraic(0, {{0, 0, 1}, {1, 0, -1}})});
  const auto a = build_constraint_matrix(sys);
  CHECK(a.eta == 0);
  Eigen::MatrixXd want(1, 2);
  want << 1, -1;
  check_matrix(a.entries, want);
}

TEST_CASE("rows are normalised to a unit output coefficient") {
  const auto sys = make_system({"x1", "x2"}, {algebraic(0, {{0, 0, 4}, {1, 0, -2}})});
  const auto a = build_constraint_matrix(sys);
  CHECK(a.entries(0, 0) == 1.0);
  CHECK(a.entries(0, 1) == -0.5);
}

TEST_CASE("malformed systems are rejected") {
  auto code_of = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  CHECK(code_of([] { make_system({"a", "b"}, {algebraic(0, {{0, 0, 1}, {0, 0, 2}, {1, 0, 1}})}); }) ==
        ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a", "b"}, {}); }) == ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a"}, {algebraic(0, {{0, 0, 1}})}); }) == ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a", "b"}, {algebraic(0, {{0, 0, 1}, {5, 0, 1}})}); }) ==
        ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a", "b"}, {algebraic(0, {{0, 0, 1}, {1, 1, 1}})}); }) ==
        ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a", "b"}, {difference(0, {{0, 0, 1}, {1, 0, 1}})}); }) ==
        ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a", "b"}, {algebraic(0, {{0, 1, 1}, {1, 0, 1}})}); }) ==
        ErrorCode::malformed_system);
  CHECK(code_of([] { make_system({"a", "b"}, {algebraic(0, {{0, 0, std::nan("")}, {1, 0, 1}})}); }) ==
        ErrorCode::malformed_system);
}

TEST_CASE("ground-truth partitions of the feedback example") {
  const auto sys = load("feedback_example");
  const auto table = ground_truth_partitions(build_constraint_matrix(sys));
  REQUIRE(table.size() == 10);
  const std::vector<std::size_t> ranks = {3, 3, 2, 2, 2, 2, 2, 2, 2, 1};
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(table[i].rank == ranks[i]);
    CHECK(table[i].admissible == (ranks[i] == 3));
  }
  // x = [y1, y2, r1, u1, u2]
  CHECK(table[0].dependent == IndexSet{0, 1, 2});
  CHECK(table[0].free == IndexSet{3, 4});
  CHECK(table[1].dependent == IndexSet{0, 1, 3});
  CHECK(table[1].free == IndexSet{2, 4});
  CHECK(table[9].dependent == IndexSet{2, 3, 4});
  CHECK_FALSE(table[9].admissible);
}

TEST_CASE("ground-truth partitions of the RC circuit") {
  const auto table = ground_truth_partitions(build_constraint_matrix(load("rc_circuit")));
  REQUIRE(table.size() == 4);
  // x = [U, V, X, i]
  CHECK(table[0].dependent == IndexSet{0, 1, 2});
  CHECK(table[0].rank == 3);
  CHECK(table[0].free == IndexSet{3});
  CHECK(table[1].dependent == IndexSet{0, 1, 3});
  CHECK(table[1].rank == 2);
  CHECK_FALSE(table[1].admissible);
  CHECK(table[2].free == IndexSet{1});
  CHECK(table[3].free == IndexSet{0});
  CHECK(table[2].rank == 3);
  CHECK(table[3].rank == 3);
}

TEST_CASE("ground truth agrees with a brute-force determinant oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto sys = testing::random_cascade(rng, testing::random_spec(rng));
    const auto a = build_constraint_matrix(sys);
    for (const auto& row : ground_truth_partitions(a)) {
      Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(row.dependent.size()));
      for (std::size_t c = 0; c < row.dependent.size(); ++c) {
        sub.col(static_cast<Eigen::Index>(c)) = a.instantaneous().col(static_cast<Eigen::Index>(row.dependent[c]));
      }
      const bool full = std::abs(sub.determinant()) > 1e-9;
      CHECK(row.admissible == full);
    }
  }
}

TEST_CASE("padded relation count follows the structure formula") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = testing::random_spec(rng);
    const auto sys = testing::random_cascade(rng, spec);
    std::uniform_int_distribution<std::size_t> lag(0, 5);
    const std::size_t l = lag(rng);
    const auto padded = padded_constraints(sys, l);
    CHECK(padded.entries.cols() == static_cast<Eigen::Index>(spec.variables * (l + 1)));
    CHECK(numerical_rank(padded.entries) == testing::relation_count_formula(spec, l));
    CHECK(expected_constraint_count(sys, l) == testing::relation_count_formula(spec, l));
  }
}

TEST_CASE("simulated trajectories satisfy their constraints") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sys = testing::random_cascade(rng, testing::random_spec(rng));
    const auto traj = simulate_noise_free(sys, default_sources(sys), 300, 100, 1000 + trial);
    CHECK(max_relative_residual(build_constraint_matrix(sys), traj.data) <= 1e-8);
  }
}

TEST_CASE("numerical rank") {
  Eigen::MatrixXd m(3, 3);
  m << 1, 2, 3, 2, 4, 6, 0, 0, 1;
  CHECK(numerical_rank(m) == 2);
  CHECK(numerical_rank(Eigen::MatrixXd::Identity(4, 4)) == 4);
  CHECK(numerical_rank(Eigen::MatrixXd::Zero(2, 3)) == 0);
}
