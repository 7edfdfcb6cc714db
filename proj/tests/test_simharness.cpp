#include "amscale/am_core.hpp"
#include "amscale/baselines.hpp"
#include "amscale/error.hpp"
#include "amscale/simharness.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace amscale;

namespace {

bool same(const SimData& a, const SimData& b) {
  return (a.truth_y.array() == b.truth_y.array()).all() && a.placements == b.placements &&
         (a.true_c.array() == b.true_c.array()).all() &&
         (a.true_w.array() == b.true_w.array()).all() &&
         (a.sigma.array() == b.sigma.array()).all() && a.n_regular == b.n_regular;
}

}  // namespace

TEST_CASE("generate is deterministic per seed") {
  SimConfig cfg;
  cfg.seed = 42;
  CHECK(same(generate(cfg), generate(cfg)));
  SimConfig other = cfg;
  other.seed = 43;
  CHECK_FALSE(same(generate(cfg), generate(other)));
}

TEST_CASE("generated truth is standardized and draws respect their bounds") {
  SimConfig cfg;
  cfg.seed = 1;
  const auto sim = generate(cfg);
  CHECK(std::abs(sim.truth_y.mean()) <= 1e-12);
  const double sd = std::sqrt((sim.truth_y.array() - sim.truth_y.mean()).square().sum() / 5.0);
  CHECK(std::abs(sd - 1.0) <= 1e-12);
  CHECK(sim.placements.respondents() == 500);
  CHECK(sim.placements.stimuli() == 6);
  CHECK(sim.sigma.minCoeff() >= 0.3);
  CHECK(sim.sigma.maxCoeff() <= 0.9);
  CHECK(sim.true_w.cwiseAbs().minCoeff() >= 1e-6);
  CHECK(sim.true_w.maxCoeff() <= 1.0);
  REQUIRE(sim.placements.self_placement());
}

TEST_CASE("DGP consistency: c + wX - u recovers the truth") {
  SimConfig cfg;
  cfg.seed = 2;
  cfg.w_min = 0.05;
  const auto sim = generate(cfg);
  const Matrix& x = sim.placements.values();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double y = sim.true_c(i) + sim.true_w(i) * x(i, j) - sim.errors(i, j);
      worst = std::max(worst, std::abs(y - sim.truth_y(j)));
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("error draws follow the respondent noise level") {
  SimConfig cfg;
  cfg.seed = 3;
  cfg.n = 4000;
  cfg.sd_min = 0.5;
  cfg.sd_max = 0.5;
  const auto sim = generate(cfg);
  const double var = sim.errors.array().square().mean();
  CHECK(std::abs(var - 0.25) < 0.01);
  CHECK(std::abs(sim.errors.mean()) < 0.01);
}

TEST_CASE("noiseless simulation is recovered exactly") {
  SimConfig cfg;
  cfg.seed = 4;
  cfg.sd_min = 0.0;
  cfg.sd_max = 0.0;
  const auto sim = generate(cfg);
  const auto report = scale(sim.placements, {});
  CHECK((testing::sign_aligned(report.solution.y_hat, sim.truth_y) - sim.truth_y)
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
}

TEST_CASE("degenerate rows are appended") {
  SimConfig cfg;
  cfg.seed = 5;
  cfg.degenerate_count = 3;
  const auto sim = generate(cfg);
  CHECK(sim.placements.respondents() == 503);
  CHECK(sim.n_regular == 500);
  for (Eigen::Index i = 500; i < 503; ++i) {
    const auto row = sim.placements.values().row(i);
    CHECK(row.maxCoeff() == row.minCoeff());
    CHECK(sim.true_w(i) == 0.0);
  }
  // The regular rows are unaffected by the extra draws.
  SimConfig plain = cfg;
  plain.degenerate_count = 0;
  const auto base = generate(plain);
  CHECK(sim.placements.values().topRows(500) == base.placements.values());
}

TEST_CASE("rationalization shift moves placements by the shift") {
  SimConfig cfg;
  cfg.seed = 6;
  const auto base = generate(cfg);
  cfg.rationalization_shift = 0.25;
  const auto moved = generate(cfg);
  CHECK((base.truth_y.array() == moved.truth_y.array()).all());
  // On the common scale every cell moves by exactly +-shift.
  const Matrix diff = (moved.placements.values() - base.placements.values()).array().colwise() *
                      base.true_w.array();
  CHECK((diff.array().abs() - 0.25).abs().maxCoeff() < 1e-9);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.j = 1;
  CHECK_THROWS_AS(generate(cfg), ScalingError);
  cfg = SimConfig{};
  cfg.sd_min = 1.0;
  cfg.sd_max = 0.5;
  CHECK_THROWS_AS(generate(cfg), ScalingError);
  cfg = SimConfig{};
  cfg.w_min = 1.0;
  cfg.w_max = 1.0;
  CHECK_THROWS_AS(generate(cfg), ScalingError);
  cfg = SimConfig{};
  cfg.c_sd = -1.0;
  CHECK_THROWS_AS(generate(cfg), ScalingError);
}

TEST_CASE("replicates keep the truth and are reproducible in isolation") {
  SimConfig cfg;
  cfg.seed = 7;
  const auto sim = generate(cfg);
  const auto r3 = generate_replicate(cfg, sim.truth_y, 3);
  const auto again = generate_replicate(cfg, sim.truth_y, 3);
  CHECK(same(r3, again));
  CHECK((r3.truth_y.array() == sim.truth_y.array()).all());
  CHECK_FALSE(r3.placements == generate_replicate(cfg, sim.truth_y, 4).placements);
}

TEST_CASE("hetero experiment at defaults") {
  SimConfig cfg;
  cfg.seed = 8;
  const auto rec = run_hetero_experiment(cfg, {});
  REQUIRE(rec.comparison);
  CHECK_FALSE(rec.failure);
  CHECK(*rec.comparison->r_am_truth >= 0.999);
}

TEST_CASE("hetero experiment with two stimuli records the failure") {
  SimConfig cfg;
  cfg.j = 2;
  const auto rec = run_hetero_experiment(cfg, {});
  CHECK_FALSE(rec.comparison);
  REQUIRE(rec.failure);
  CHECK(rec.failure->find("NotIdentified") != std::string::npos);
}

TEST_CASE("retention experiment with degenerate rows") {
  SimConfig cfg;
  cfg.seed = 9;
  cfg.degenerate_count = 25;
  const auto rec = run_retention_experiment(cfg, {});
  CHECK(*rec.naive.n_dropped == 25);
  CHECK(*rec.naive.n_used == 500);
  CHECK(*rec.qr.n_degenerate == 25);
  CHECK(*rec.qr.n_dropped == 0);
  REQUIRE(rec.max_abs_difference);
  CHECK(*rec.max_abs_difference <= 1e-8);
}

TEST_CASE("retention experiment without degenerate rows") {
  SimConfig cfg;
  cfg.seed = 10;
  const auto rec = run_retention_experiment(cfg, {});
  CHECK(*rec.naive.n_used == 500);
  CHECK(*rec.qr.n_used == 500);
  CHECK(*rec.max_abs_difference <= 1e-10);
}

TEST_CASE("retention experiment with only degenerate rows") {
  SimConfig cfg;
  cfg.seed = 11;
  cfg.n = 0;
  cfg.degenerate_count = 20;
  const auto rec = run_retention_experiment(cfg, {});
  REQUIRE(rec.naive.failure);
  REQUIRE(rec.qr.failure);
  CHECK(rec.naive.failure->find("NoValidRespondents") != std::string::npos);
  CHECK(rec.qr.failure->find("NotIdentified") != std::string::npos);
  CHECK_FALSE(rec.max_abs_difference);
}

TEST_CASE("BIN replications on noiseless data") {
  SimConfig cfg;
  cfg.seed = 12;
  cfg.n = 100;
  cfg.sd_min = 0.0;
  cfg.sd_max = 0.0;
  cfg.c_sd = 0.0;
  const auto bin = run_bin_replications(cfg, 5, {});
  const double pooled_var = (bin.truth_y.array() - bin.truth_y.mean()).square().sum() * 5.0 /
                            (5.0 * static_cast<double>(bin.truth_y.size()) - 1.0);
  for (const auto& name : {"am", "mean", "median"}) {
    const auto& s = bin.stats.at(name);
    CHECK(std::abs(s.bias) <= 1e-8);
    CHECK(std::abs(s.noise) <= 1e-8);
    CHECK(std::abs(s.information - pooled_var) <= 1e-8);
  }
}

TEST_CASE("BIN replications need two replicates and are thread independent") {
  SimConfig cfg;
  cfg.seed = 13;
  cfg.n = 100;
  CHECK_THROWS_AS(run_bin_replications(cfg, 1, {}), ScalingError);
  const auto one = run_bin_replications(cfg, 6, {});
  SimConfig threaded = cfg;
  threaded.threads = 3;
  EstimatorConfig est;
  est.threads = 3;
  const auto many = run_bin_replications(threaded, 6, est);
  for (const auto& name : {"am", "mean", "median"}) {
    CHECK(one.stats.at(name).noise == many.stats.at(name).noise);
    CHECK(one.r_truth.at(name) == many.r_truth.at(name));
  }
}
