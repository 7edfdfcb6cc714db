#include "amscale/am_core.hpp"
#include "amscale/baselines.hpp"
#include "amscale/error.hpp"
#include "amscale/simharness.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace amscale;
using testing::max_abs;

namespace {

// Closed-form hat matrix of [1, x]: 1/J + (x_i - mean)(x_j - mean) / Sxx.
Matrix hat_oracle(const Vector& x) {
  const Eigen::Index j = x.size();
  const Vector xc = x.array() - x.mean();
  return Matrix::Constant(j, j, 1.0 / static_cast<double>(j)) + xc * xc.transpose() / xc.squaredNorm();
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const ScalingError& e) {
    return e.code();
  }
  FAIL("expected ScalingError");
  return ErrorCode::config_error;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

PlacementMatrix noiseless(const Vector& truth, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(static_cast<Eigen::Index>(n), truth.size());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double c = rng.normal();
    const double w = rng.uniform(0.2, 2.0);
    x.row(i) = ((truth.array() - c) / w).transpose();
  }
  return PlacementMatrix::from_values(std::move(x));
}

SimConfig default_sim(std::uint64_t seed) {
  SimConfig cfg;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("naive projector of x = [1, 2, 3]") {
  const Vector x = vec({1, 2, 3});
  Matrix expected(3, 3);
  expected << 5.0 / 6, 1.0 / 3, -1.0 / 6, 1.0 / 3, 1.0 / 3, 1.0 / 3, -1.0 / 6, 1.0 / 3, 5.0 / 6;
  CHECK(max_abs(hat_oracle(x) - expected) < 1e-15);
  CHECK(max_abs(projector_naive(design_matrix(x)) - expected) < 1e-10);
}

TEST_CASE("naive projector rejects constant rows and single stimuli") {
  CHECK(code_of([] { projector_naive(design_matrix(Vector::Zero(3))); }) ==
        ErrorCode::singular_respondent);
  CHECK(code_of([] { projector_naive(design_matrix(vec({4.2}))); }) ==
        ErrorCode::singular_respondent);
}

TEST_CASE("projectors fix the ones vector and are symmetric idempotent") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index j = 2 + static_cast<Eigen::Index>(rng.index(9));
    const Matrix d = design_matrix(testing::random_vector(rng, j, 3.0));
    const Matrix naive = projector_naive(d);
    const auto qr = projector_qr(d);
    CHECK(qr.rank == 2);
    for (const Matrix* p : {&naive, &qr.projector}) {
      CHECK(((*p) * Vector::Ones(j) - Vector::Ones(j)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(max_abs(*p - p->transpose()) < 1e-10);
      CHECK(max_abs((*p) * (*p) - *p) < 1e-10);
      CHECK(std::abs(p->trace() - 2.0) < 1e-10);
    }
    CHECK(max_abs(naive - qr.projector) < 1e-10);
    CHECK(max_abs(naive - hat_oracle(d.col(1))) < 1e-10);
  }
}

TEST_CASE("QR projector of a constant row is the projector onto ones") {
  const auto p = projector_qr(design_matrix(vec({5, 5, 5})));
  CHECK(p.rank == 1);
  CHECK(max_abs(p.projector - Matrix::Constant(3, 3, 1.0 / 3.0)) < 1e-15);
  CHECK(std::abs(p.projector.trace() - 1.0) < 1e-10);
  CHECK(max_abs(p.projector * p.projector - p.projector) < 1e-10);
}

TEST_CASE("QR rank decision near the tolerance") {
  const Vector x = vec({1.0, 1.0 + 1e-13, 1.0});
  // Exact-arithmetic oracle: the residual of x after removing the ones
  // direction is sqrt(sum (x - mean)^2), and the row has two distinct values.
  const double residual = std::sqrt((x.array() - x.mean()).square().sum());
  const double level = std::sqrt(3.0);  // max(|R00|, |R01|) for this row
  REQUIRE(residual > 1e-15 * level);
  REQUIRE(residual < 1e-12 * level);

  const auto fine = projector_qr(design_matrix(x), 1e-15);
  CHECK(fine.rank == 2);
  CHECK(fine.projector.allFinite());
  CHECK(std::abs(fine.projector.trace() - 2.0) < 1e-10);

  const auto coarse = projector_qr(design_matrix(x), 1e-12);
  CHECK(coarse.rank == 1);

  const auto distinct = projector_qr(design_matrix(vec({1.0, 1.0 + 1e-13, 4.0})), 1e-15);
  CHECK(distinct.rank == 2);
  CHECK(distinct.projector.allFinite());
}

TEST_CASE("QR projector needs two rows") {
  CHECK(code_of([] { projector_qr(design_matrix(vec({1.0}))); }) == ErrorCode::insufficient_rows);
}

TEST_CASE("accumulate of one respondent is its projector") {
  const auto p = PlacementMatrix::from_values(vec({1, 2, 3}).transpose());
  for (auto method : {Method::naive, Method::qr}) {
    EstimatorConfig cfg;
    cfg.method = method;
    const auto acc = accumulate(p, cfg);
    CHECK(acc.n_used == 1);
    CHECK(max_abs(acc.a - hat_oracle(vec({1, 2, 3}))) < 1e-10);
  }
}

TEST_CASE("accumulate with two stimuli gives nI") {
  Rng rng(4);
  const Matrix x = testing::random_matrix(rng, 40, 2);
  const auto p = PlacementMatrix::from_values(x);
  for (auto method : {Method::naive, Method::qr}) {
    EstimatorConfig cfg;
    cfg.method = method;
    const auto acc = accumulate(p, cfg);
    CHECK(max_abs(acc.a - 40.0 * Matrix::Identity(2, 2)) < 1e-10);
  }
}

TEST_CASE("naive and QR accumulations agree and are bounded") {
  Rng rng(8);
  const Matrix x = testing::random_matrix(rng, 100, 7);
  const auto p = PlacementMatrix::from_values(x);
  EstimatorConfig naive;
  naive.method = Method::naive;
  const auto a_naive = accumulate(p, naive);
  const auto a_qr = accumulate(p, EstimatorConfig{});
  CHECK(max_abs(a_naive.a - a_qr.a) <= 1e-10);
  CHECK(max_abs(a_qr.a - a_qr.a.transpose()) <= 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(a_qr.a);
  CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  CHECK(es.eigenvalues().maxCoeff() <= 100.0 + 1e-9);
  // The ones vector is always a null direction of A - nI.
  Matrix m = a_qr.a;
  m.diagonal().array() -= 100.0;
  CHECK((m * Vector::Ones(7)).cwiseAbs().maxCoeff() <= 1e-9 * 100.0);
}

TEST_CASE("constant rows: naive drops, QR retains as rank 1") {
  Matrix x(4, 3);
  x << 1, 2, 3, 4, 4, 4, 0, 1, 5, 0.3, 0.3, 0.3;
  const auto p = PlacementMatrix::from_values(x);

  EstimatorConfig naive;
  naive.method = Method::naive;
  const auto an = accumulate(p, naive);
  CHECK(an.n_used == 2);
  CHECK(an.n_dropped == 2);
  CHECK(an.n_degenerate == 0);

  const auto aq = accumulate(p, EstimatorConfig{});
  CHECK(aq.n_used == 2);
  CHECK(aq.n_degenerate == 2);
  CHECK(aq.n_dropped == 0);
  CHECK(aq.status[1] == RowStatus::degenerate);

  EstimatorConfig drop;
  drop.retain_degenerate = false;
  const auto ad = accumulate(p, drop);
  CHECK(ad.n_used == 2);
  CHECK(ad.n_dropped == 2);
  CHECK(max_abs(ad.a - an.a) < 1e-10);
}

TEST_CASE("accumulate errors") {
  CHECK(code_of([] { accumulate(PlacementMatrix::from_values(Matrix::Ones(3, 1)), {}); }) ==
        ErrorCode::too_few_stimuli);
  EstimatorConfig naive;
  naive.method = Method::naive;
  CHECK(code_of([&] { accumulate(PlacementMatrix::from_values(Matrix::Ones(3, 3)), naive); }) ==
        ErrorCode::no_valid_respondents);
}

TEST_CASE("accumulate is bit-identical across thread counts") {
  const auto sim = generate(default_sim(5));
  EstimatorConfig one;
  const auto base = accumulate(sim.placements, one);
  for (unsigned t : {2u, 3u, 8u}) {
    EstimatorConfig many;
    many.threads = t;
    const auto other = accumulate(sim.placements, many);
    CHECK((other.a.array() == base.a.array()).all());
  }
}

TEST_CASE("two stimuli are not identified") {
  Rng rng(12);
  const auto p = PlacementMatrix::from_values(testing::random_matrix(rng, 30, 2));
  const auto acc = accumulate(p, {});
  CHECK(code_of([&] { solve_stimuli(acc, {}); }) == ErrorCode::not_identified);
}

TEST_CASE("two stimuli with degenerate respondents still fail") {
  Matrix x(3, 2);
  x << 1, 2, 3, 3, 0, 1;
  const auto acc = accumulate(PlacementMatrix::from_values(x), {});
  CHECK(acc.n_degenerate == 1);
  CHECK(code_of([&] { solve_stimuli(acc, {}); }) == ErrorCode::too_few_stimuli);
}

TEST_CASE("noiseless data recover the standardized truth") {
  const Vector truth = testing::standardized(vec({-1.3, 0.2, 0.9, -0.4, 1.7, 0.5}));
  const auto p = noiseless(truth, 50, 1);
  for (auto method : {Method::naive, Method::qr}) {
    EstimatorConfig cfg;
    cfg.method = method;
    cfg.polarity_index = 0;
    const auto sol = solve_stimuli(accumulate(p, cfg), cfg);
    CHECK((sol.y_hat - truth).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(std::abs(sol.selected_eigenvalue) < 1e-8);
    CHECK(sol.deflated_spectrum.size() == 5);
    CHECK(sol.n_used == 50);
  }
}

TEST_CASE("solution invariants on simulated data") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto sim = generate(default_sim(seed));
    for (std::size_t pol = 0; pol < 6; ++pol) {
      EstimatorConfig cfg;
      cfg.polarity_index = pol;
      const auto acc = accumulate(sim.placements, cfg);
      const auto sol = solve_stimuli(acc, cfg);
      const double n = static_cast<double>(acc.contributing());
      CHECK(std::abs(sol.y_hat.mean()) <= 1e-10);
      const double sd = std::sqrt((sol.y_hat.array() - sol.y_hat.mean()).square().sum() / 5.0);
      CHECK(std::abs(sd - 1.0) <= 1e-10);
      CHECK(sol.y_hat(static_cast<Eigen::Index>(pol)) < 0.0);
      CHECK(sol.deflated_spectrum.maxCoeff() <= cfg.zero_tolerance_for(acc.contributing()));
      CHECK(sol.deflated_spectrum.minCoeff() >= -n - 1e-9);

      EstimatorConfig first;
      const auto base = solve_stimuli(acc, first);
      const double same = (sol.y_hat - base.y_hat).cwiseAbs().maxCoeff();
      const double flipped = (sol.y_hat + base.y_hat).cwiseAbs().maxCoeff();
      CHECK(std::min(same, flipped) < 1e-12);
    }
  }
}

TEST_CASE("heteroskedastic simulation correlates with truth") {
  const auto sim = generate(default_sim(1234));
  const auto report = scale(sim.placements, {});
  CHECK(std::abs(pearson(report.solution.y_hat, sim.truth_y)) >= 0.999);
}

TEST_CASE("affine transforms of respondents leave the solution unchanged") {
  const auto sim = generate(default_sim(77));
  Rng rng(78);
  Matrix x = sim.placements.values();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x.row(i) = (rng.normal(0.0, 3.0) + rng.uniform(0.1, 5.0) * x.row(i).array()).matrix();
  }
  const auto base = scale(sim.placements, {});
  const auto moved = scale(PlacementMatrix::from_values(x), {});
  CHECK((base.solution.y_hat - moved.solution.y_hat).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("appending constant rows shifts the deflated spectrum by -k") {
  const auto sim = generate(default_sim(31));
  Rng rng(32);
  const std::size_t k = 7;
  Matrix x(sim.placements.values().rows() + static_cast<Eigen::Index>(k), 6);
  x.topRows(sim.placements.values().rows()) = sim.placements.values();
  for (std::size_t r = 0; r < k; ++r) {
    x.row(sim.placements.values().rows() + static_cast<Eigen::Index>(r)).setConstant(rng.normal());
  }
  const auto base = solve_stimuli(accumulate(sim.placements, {}), {});
  const auto acc = accumulate(PlacementMatrix::from_values(x), {});
  CHECK(acc.n_degenerate == k);
  const auto more = solve_stimuli(acc, {});
  CHECK((base.y_hat - more.y_hat).cwiseAbs().maxCoeff() <= 1e-8);
  const Vector shift = more.deflated_spectrum - base.deflated_spectrum;
  CHECK((shift.array() + static_cast<double>(k)).abs().maxCoeff() <= 1e-8);
}

TEST_CASE("polarity at the midpoint is ambiguous") {
  const Vector truth = vec({-1.0, 0.0, 1.0});
  const auto p = noiseless(truth, 10, 2);
  EstimatorConfig cfg;
  cfg.polarity_index = 1;
  CHECK(code_of([&] { solve_stimuli(accumulate(p, cfg), cfg); }) == ErrorCode::ambiguous_polarity);
}

TEST_CASE("respondent transforms") {
  StimuliSolution sol;
  sol.y_hat = testing::standardized(vec({-1.0, 0.5, 2.0, -0.7}));
  const Vector& y = sol.y_hat;
  Matrix x(4, 4);
  x.row(0) = y.transpose();
  x.row(1) = ((y.array() - 2.0) / 0.5).matrix().transpose();
  x.row(2) = -y.transpose();
  x.row(3).setConstant(3.0);
  const auto t = respondent_transforms(PlacementMatrix::from_values(x), sol);
  REQUIRE(t.size() == 4);
  CHECK(std::abs(t[0].c_hat) < 1e-12);
  CHECK(std::abs(t[0].w_hat - 1.0) < 1e-12);
  CHECK(t[0].residual_ss < 1e-20);
  CHECK(std::abs(t[1].c_hat - 2.0) < 1e-10);
  CHECK(std::abs(t[1].w_hat - 0.5) < 1e-10);
  CHECK(std::abs(t[2].w_hat + 1.0) < 1e-12);
  CHECK(t[2].reversed);
  CHECK_FALSE(t[0].reversed);
  CHECK(t[3].w_hat == 0.0);
  CHECK(std::abs(t[3].c_hat - y.mean()) < 1e-15);
  CHECK_FALSE(t[3].reversed);
  for (const auto& r : t) CHECK(r.residual_ss >= 0.0);
}

TEST_CASE("ideal points") {
  std::vector<RespondentTransform> t(3);
  t[0].c_hat = 0.0;
  t[0].w_hat = 1.0;
  t[1].c_hat = 2.0;
  t[1].w_hat = 0.5;
  t[2].c_hat = 1.0;
  t[2].w_hat = 0.0;
  const auto points = ideal_points(t, vec({3.0, 4.0, 1.0}));
  CHECK(points[0] == doctest::Approx(3.0));
  CHECK(points[1] == doctest::Approx(4.0));
  CHECK_FALSE(points[2].has_value());
  CHECK_FALSE(ideal_points(t, std::nullopt)[0].has_value());
}

TEST_CASE("scale drops missing rows and partitions respondents") {
  const auto sim = generate(default_sim(9));
  Matrix x = sim.placements.values();
  Mask missing = Mask::Constant(x.rows(), x.cols(), false);
  Rng rng(10);
  std::size_t missing_rows = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (rng.uniform01() < 0.1) {
      missing(i, static_cast<Eigen::Index>(rng.index(6))) = true;
      ++missing_rows;
    }
  }
  const PlacementMatrix p(x, missing, sim.placements.stimulus_labels(),
                          sim.placements.respondent_ids(), sim.placements.self_placement());
  const auto report = scale(p, {});
  CHECK(report.dropped.size() == missing_rows);
  CHECK(report.transforms.size() + report.dropped.size() == p.respondents());
  CHECK(report.solution.n_used == p.respondents() - missing_rows);
  for (const auto& d : report.dropped) CHECK(d.reason == "missing placements");
  CHECK(std::abs(pearson(report.solution.y_hat, sim.truth_y)) > 0.99);
  CHECK(report.diagnostics.min_j_satisfied);
  CHECK(report.diagnostics.top_gap > 0.0);
}

TEST_CASE("scale reports ideal points from self placements") {
  const auto sim = generate(default_sim(13));
  const auto report = scale(sim.placements, {});
  std::size_t with_points = 0;
  for (const auto& t : report.transforms) with_points += t.ideal_point ? 1 : 0;
  CHECK(with_points == sim.placements.respondents());
}

TEST_CASE("constant rows everywhere are not identified") {
  Matrix x(5, 4);
  for (Eigen::Index i = 0; i < 5; ++i) x.row(i).setConstant(static_cast<double>(i));
  const auto p = PlacementMatrix::from_values(x);
  CHECK(code_of([&] { scale(p, {}); }) == ErrorCode::not_identified);
  EstimatorConfig naive;
  naive.method = Method::naive;
  CHECK(code_of([&] { scale(p, naive); }) == ErrorCode::no_valid_respondents);
}

TEST_CASE("single stimulus fails on both paths") {
  const auto p = PlacementMatrix::from_values(Matrix::Random(5, 1));
  for (auto method : {Method::naive, Method::qr}) {
    EstimatorConfig cfg;
    cfg.method = method;
    CHECK(code_of([&] { scale(p, cfg); }) == ErrorCode::too_few_stimuli);
  }
}

TEST_CASE("naive scale reports rank-deficient drops") {
  Matrix x(4, 3);
  x << 1, 2, 3, 2, 2, 2, 0, 1, 5, 3, 1, 2;
  EstimatorConfig naive;
  naive.method = Method::naive;
  const auto report = scale(PlacementMatrix::from_values(x), naive);
  REQUIRE(report.dropped.size() == 1);
  CHECK(report.dropped[0].id == "2");
  CHECK(report.dropped[0].reason.find("rank-deficient") != std::string::npos);
}

TEST_CASE("bootstrap on noiseless data has zero width") {
  const Vector truth = testing::standardized(vec({-1.3, 0.2, 0.9, -0.4, 1.7, 0.5}));
  const auto p = noiseless(truth, 60, 3);
  const auto result = bootstrap_ci(p, {}, 100, 42, 0.9);
  REQUIRE(result.intervals.size() == 6);
  for (const auto& iv : result.intervals) CHECK(iv.upper - iv.lower <= 1e-6);
  CHECK(result.failures == 0);
}

TEST_CASE("bootstrap is deterministic and thread independent") {
  const auto sim = generate(default_sim(21));
  const auto a = bootstrap_ci(sim.placements, {}, 120, 5, 0.9);
  EstimatorConfig threaded;
  threaded.threads = 4;
  const auto b = bootstrap_ci(sim.placements, threaded, 120, 5, 0.9);
  REQUIRE(a.intervals.size() == b.intervals.size());
  for (std::size_t k = 0; k < a.intervals.size(); ++k) {
    CHECK(a.intervals[k].lower == b.intervals[k].lower);
    CHECK(a.intervals[k].upper == b.intervals[k].upper);
    CHECK(a.intervals[k].lower <= a.intervals[k].estimate);
    CHECK(a.intervals[k].estimate <= a.intervals[k].upper);
  }
}

TEST_CASE("bootstrap covers the truth in most seeds") {
  // Per-stimulus coverage of the sign-aligned truth over 25 seeds.
  std::vector<int> covered(6, 0);
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const auto sim = generate(default_sim(seed));
    const auto result = bootstrap_ci(sim.placements, {}, 200, seed, 0.9);
    Vector estimate(6);
    for (Eigen::Index k = 0; k < 6; ++k) estimate(k) = result.intervals[static_cast<std::size_t>(k)].estimate;
    const Vector truth = testing::sign_aligned(sim.truth_y, estimate);
    for (std::size_t k = 0; k < 6; ++k) {
      const auto& iv = result.intervals[k];
      const double t = truth(static_cast<Eigen::Index>(k));
      covered[k] += (iv.lower <= t && t <= iv.upper) ? 1 : 0;
    }
  }
  for (int c : covered) CHECK(c >= 20);
}

TEST_CASE("bootstrap argument checks and degenerate resamples") {
  const auto sim = generate(default_sim(2));
  CHECK(code_of([&] { bootstrap_ci(sim.placements, {}, 50, 1, 0.9); }) == ErrorCode::config_error);
  CHECK(code_of([&] { bootstrap_ci(sim.placements, {}, 100, 1, 1.0); }) == ErrorCode::config_error);

  // One informative respondent among 100: roughly a third of resamples miss it.
  Matrix x(100, 4);
  x.row(0) << 1, 2, 4, 3;
  for (Eigen::Index i = 1; i < 100; ++i) x.row(i).setConstant(static_cast<double>(i % 7));
  const auto p = PlacementMatrix::from_values(x);
  CHECK_NOTHROW(scale(p, {}));
  CHECK(code_of([&] { bootstrap_ci(p, {}, 200, 3, 0.9); }) == ErrorCode::bootstrap_degenerate);
}
