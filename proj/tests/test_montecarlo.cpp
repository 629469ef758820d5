#include <doctest.h>

#include "povdae/error.hpp"
#include "povdae/io.hpp"
#include "povdae/montecarlo.hpp"

using namespace povdae;

namespace {

McConfig two_tank_config(std::size_t runs, std::vector<double> snr) {
  McConfig cfg;
  cfg.system = io::read_system(std::string(POVDAE_DATA_DIR) + "/systems/two_tank.json").system;
  cfg.snr = std::move(snr);
  cfg.n_total = 2047;
  cfg.runs = runs;
  cfg.base_seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("per-run seeds are distinct and stable") {
  CHECK(run_seed(1, 0) == run_seed(1, 0));
  CHECK(run_seed(1, 0) != run_seed(1, 1));
  CHECK(run_seed(1, 0) != run_seed(2, 0));
}

TEST_CASE("results do not depend on the thread count") {
  auto cfg = two_tank_config(6, {2, 1.5, 1});
  cfg.threads = 1;
  const auto serial = run_montecarlo(cfg);
  cfg.threads = 3;
  const auto parallel = run_montecarlo(cfg);
  CHECK(serial == parallel);
  CHECK(serial.records.size() == 6);
  for (std::size_t i = 0; i < serial.records.size(); ++i) CHECK(serial.records[i].index == i);
}

TEST_CASE("ground truth labels follow the rank oracle") {
  const auto cfg = two_tank_config(2, {2, 3, 5});
  const auto table = run_montecarlo(cfg);
  const auto truth = ground_truth_partitions(build_constraint_matrix(cfg.system));
  REQUIRE(table.rows.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(table.rows[i].dependent == truth[i].dependent);
    CHECK(table.rows[i].truth_admissible == truth[i].admissible);
  }
  CHECK(table.rows[0].label == "h1+h2");
}

TEST_CASE("very high SNR gives no errors") {
  auto cfg = two_tank_config(20, {1e4, 1e4, 1e4});
  const auto table = run_montecarlo(cfg);
  CHECK(table.failed_runs == 0);
  for (const auto& row : table.rows) {
    CHECK(row.type1_pct == 0.0);
    CHECK(row.type2_pct == 0.0);
    CHECK(row.observed_admissible == (row.truth_admissible ? 20u : 0u));
  }
}

TEST_CASE("a threshold nothing passes turns every admissible combination into a miss") {
  auto cfg = two_tank_config(4, {2, 3, 5});
  cfg.discovery.threshold = 1.0;  // nothing passes
  const auto table = run_montecarlo(cfg);
  CHECK(table.failed_runs == 0);
  for (const auto& row : table.rows) {
    if (row.truth_admissible) CHECK(row.type2_pct == 100.0);
    else CHECK(row.type1_pct == 0.0);
  }
}

TEST_CASE("zero runs is a configuration error") {
  auto cfg = two_tank_config(0, {2, 3, 5});
  try {
    run_montecarlo(cfg);
    FAIL("expected configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::configuration);
  }
}
