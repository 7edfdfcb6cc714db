#include "amscale/simharness.hpp"

#include "amscale/error.hpp"
#include "amscale/parallel.hpp"
#include "amscale/rng.hpp"

#include <cmath>

namespace amscale {

namespace {

constexpr double kMinAbsWeight = 1e-6;

Vector draw_truth(Rng& rng, std::size_t j) {
  Vector y(static_cast<Eigen::Index>(j));
  for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = rng.normal();
  y.array() -= y.mean();
  const double sd = std::sqrt(y.squaredNorm() / static_cast<double>(y.size() - 1));
  if (!(sd > 0.0)) {
    throw ScalingError(ErrorCode::config_error, "stimulus draws are degenerate; change the seed");
  }
  return y / sd;
}

SimData draw_respondents(const SimConfig& cfg, const Vector& truth, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(cfg.n);
  const auto j = truth.size();
  const auto k = static_cast<Eigen::Index>(cfg.degenerate_count);
  const Eigen::Index rows = n + k;

  Vector sigma = Vector::Zero(rows);
  for (Eigen::Index i = 0; i < n; ++i) sigma(i) = rng.uniform(cfg.sd_min, cfg.sd_max);

  Matrix errors(n, j);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index s = 0; s < j; ++s) errors(i, s) = rng.normal(0.0, sigma(i));
  }

  Vector w = Vector::Zero(rows);
  for (Eigen::Index i = 0; i < n; ++i) {
    do {
      w(i) = rng.uniform(cfg.w_min, cfg.w_max);
    } while (std::abs(w(i)) < kMinAbsWeight);
  }

  Vector c = Vector::Zero(rows);
  for (Eigen::Index i = 0; i < n; ++i) c(i) = rng.normal(0.0, cfg.c_sd);

  Vector self_truth = Vector::Zero(rows);
  Vector self(rows);
  for (Eigen::Index i = 0; i < n; ++i) self_truth(i) = rng.normal();
  for (Eigen::Index i = 0; i < n; ++i) {
    self(i) = (self_truth(i) + rng.normal(0.0, sigma(i)) - c(i)) / w(i);
  }

  // Perceived positions on the common scale before the respondent's distortion.
  Matrix perceived = truth.transpose().replicate(n, 1) + errors;
  if (cfg.rationalization_shift != 0.0) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double toward = rng.uniform01() < 0.5 ? 1.0 : -1.0;  // likes vs dislikes
      for (Eigen::Index s = 0; s < j; ++s) {
        const double gap = self_truth(i) - perceived(i, s);
        const double dir = gap > 0.0 ? 1.0 : (gap < 0.0 ? -1.0 : 0.0);
        perceived(i, s) += toward * cfg.rationalization_shift * dir;
      }
    }
  }

  Matrix x(rows, j);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = (perceived.row(i).array() - c(i)) / w(i);
  }
  for (Eigen::Index i = n; i < rows; ++i) {
    const double level = rng.normal();
    x.row(i).setConstant(level);
    self(i) = level;
  }

  std::vector<std::string> labels(static_cast<std::size_t>(j));
  for (std::size_t s = 0; s < labels.size(); ++s) labels[s] = default_stimulus_label(s);
  std::vector<std::string> ids(static_cast<std::size_t>(rows));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = std::to_string(i + 1);

  SimData out{truth,
              PlacementMatrix(std::move(x), Mask::Constant(rows, j, false), std::move(labels),
                              std::move(ids), self),
              std::move(c),
              std::move(w),
              std::move(sigma),
              std::move(self_truth),
              std::move(errors),
              cfg.n};
  return out;
}

double aligned_difference(const Vector& a, const Vector& b) {
  const Vector bb = a.dot(b) < 0.0 ? Vector(-b) : b;
  return (a - bb).cwiseAbs().maxCoeff();
}

std::string describe(const ScalingError& e) {
  return std::string(to_string(e.code())) + ": " + e.what();
}

}  // namespace

void SimConfig::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(sd_min) || !finite(sd_max) || !finite(w_min) || !finite(w_max) || !finite(c_sd) ||
      !finite(rationalization_shift)) {
    throw ScalingError(ErrorCode::config_error, "simulation parameters must be finite");
  }
  if (j < 2) throw ScalingError(ErrorCode::config_error, "simulation needs j >= 2");
  if (n + degenerate_count < 1) {
    throw ScalingError(ErrorCode::config_error, "simulation needs at least one respondent");
  }
  if (sd_min < 0.0 || sd_min > sd_max) {
    throw ScalingError(ErrorCode::config_error, "need 0 <= sd_min <= sd_max");
  }
  if (!(w_min < w_max)) throw ScalingError(ErrorCode::config_error, "need w_min < w_max");
  if (!(w_max > kMinAbsWeight || w_min < -kMinAbsWeight)) {
    throw ScalingError(ErrorCode::config_error, "weight interval lies entirely near zero");
  }
  if (c_sd < 0.0) throw ScalingError(ErrorCode::config_error, "need c_sd >= 0");
}

SimData generate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const Vector truth = draw_truth(rng, cfg.j);
  return draw_respondents(cfg, truth, rng);
}

SimData generate_replicate(const SimConfig& cfg, const Vector& truth_y, std::uint64_t replicate) {
  cfg.validate();
  Rng rng = Rng::for_replicate(cfg.seed, replicate);
  return draw_respondents(cfg, truth_y, rng);
}

HeteroRecord run_hetero_experiment(const SimConfig& cfg, const EstimatorConfig& estimator) {
  HeteroRecord record;
  record.config = cfg;
  const auto data = generate(cfg);
  try {
    record.comparison = compare_estimators(data, estimator);
  } catch (const ScalingError& e) {
    if (!e.is_estimation_failure()) throw;
    record.failure = describe(e);
  }
  return record;
}

RetentionRecord run_retention_experiment(const SimConfig& cfg, const EstimatorConfig& estimator) {
  RetentionRecord record;
  record.config = cfg;
  const auto data = generate(cfg);

  auto run = [&](Method method, bool retain) {
    MethodRetention out;
    EstimatorConfig ec = estimator;
    ec.method = method;
    ec.retain_degenerate = retain;
    try {
      const auto report = scale(data.placements, ec);
      out.n_used = report.solution.n_used;
      out.n_degenerate = report.n_degenerate;
      out.n_dropped = report.dropped.size();
      out.y_hat = report.solution.y_hat;
    } catch (const ScalingError& e) {
      if (!e.is_estimation_failure()) throw;
      out.failure = describe(e);
    }
    return out;
  };
  record.naive = run(Method::naive, false);
  record.qr = run(Method::qr, true);
  if (record.naive.y_hat && record.qr.y_hat) {
    record.max_abs_difference = aligned_difference(*record.naive.y_hat, *record.qr.y_hat);
  }
  return record;
}

BinReplications run_bin_replications(const SimConfig& cfg, std::size_t replicates,
                                     const EstimatorConfig& estimator) {
  if (replicates < 2) {
    throw ScalingError(ErrorCode::config_error, "BIN replications need at least 2 replicates");
  }
  cfg.validate();
  Rng truth_rng(cfg.seed);
  const Vector truth = draw_truth(truth_rng, cfg.j);
  const auto j = truth.size();
  const auto r_count = static_cast<Eigen::Index>(replicates);

  const std::vector<std::string> names{"am", "mean", "median"};
  std::vector<Matrix> calibrated(names.size(), Matrix(r_count, j));
  std::vector<std::vector<double>> correlations(names.size(), std::vector<double>(replicates));

  EstimatorConfig inner = estimator;
  inner.threads = 1;
  parallel_for(replicates, cfg.threads, [&](std::size_t r) {
    const auto data = generate_replicate(cfg, truth, r + 1);
    std::vector<std::optional<double>> means = column_means(data.placements);
    std::vector<std::optional<double>> medians = column_medians(data.placements);
    Vector est[3] = {scale(data.placements, inner).solution.y_hat, Vector(j), Vector(j)};
    for (Eigen::Index s = 0; s < j; ++s) {
      est[1](s) = *means[static_cast<std::size_t>(s)];
      est[2](s) = *medians[static_cast<std::size_t>(s)];
    }
    for (std::size_t e = 0; e < names.size(); ++e) {
      calibrated[e].row(static_cast<Eigen::Index>(r)) = calibrate_to_truth(est[e], truth);
      correlations[e][r] = pearson(affine_align(est[e], truth), truth);
    }
  });

  BinReplications out;
  out.replicates = replicates;
  out.truth_y = truth;
  for (std::size_t e = 0; e < names.size(); ++e) {
    out.stats[names[e]] = bin_decomposition(calibrated[e], truth);
    out.r_truth[names[e]] = std::move(correlations[e]);
  }
  return out;
}

}  // namespace amscale
