#include "amscale/baselines.hpp"

#include "amscale/error.hpp"
#include "amscale/simharness.hpp"

#include <algorithm>
#include <cmath>

namespace amscale {

namespace {

std::vector<double> observed(const PlacementMatrix& p, std::size_t j) {
  std::vector<double> out;
  for (std::size_t i = 0; i < p.respondents(); ++i) {
    if (!p.is_missing(i, j)) {
      out.push_back(p.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
  }
  return out;
}

// Slope and intercept of y on x by centered least squares.
std::pair<double, double> regress(const Eigen::Ref<const Vector>& x,
                                  const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ScalingError(ErrorCode::degenerate_variance, "regression needs two paired values");
  }
  const Vector xc = x.array() - x.mean();
  const double sxx = xc.squaredNorm();
  if (!(sxx > 0.0)) {
    throw ScalingError(ErrorCode::degenerate_variance, "regressor has zero variance");
  }
  const double slope = xc.dot((y.array() - y.mean()).matrix()) / sxx;
  return {y.mean() - slope * x.mean(), slope};
}

Vector require_all(const std::vector<std::optional<double>>& values) {
  Vector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!values[k]) {
      throw ScalingError(ErrorCode::empty_stimulus_column,
                         "stimulus " + std::to_string(k) + " has no observed placements");
    }
    out(static_cast<Eigen::Index>(k)) = *values[k];
  }
  return out;
}

EstimatorRow truth_row(std::string name, const Vector& est, const Vector& truth) {
  EstimatorRow row;
  row.name = std::move(name);
  row.r_truth = pearson(affine_align(est, truth), truth);
  Matrix calibrated = calibrate_to_truth(est, truth).transpose();
  row.bin = bin_decomposition(calibrated, truth);
  return row;
}

}  // namespace

std::vector<std::optional<double>> column_means(const PlacementMatrix& p) {
  std::vector<std::optional<double>> out(p.stimuli());
  for (std::size_t j = 0; j < p.stimuli(); ++j) {
    const auto xs = observed(p, j);
    if (xs.empty()) continue;
    double sum = 0.0;
    for (double x : xs) sum += x;
    out[j] = sum / static_cast<double>(xs.size());
  }
  return out;
}

std::vector<std::optional<double>> column_medians(const PlacementMatrix& p) {
  std::vector<std::optional<double>> out(p.stimuli());
  for (std::size_t j = 0; j < p.stimuli(); ++j) {
    auto xs = observed(p, j);
    if (xs.empty()) continue;
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    out[j] = xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
  }
  return out;
}

double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ScalingError(ErrorCode::degenerate_variance,
                       "correlation needs two equally long vectors of length >= 2");
  }
  const Vector xc = x.array() - x.mean();
  const Vector yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  const double syy = yc.squaredNorm();
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw ScalingError(ErrorCode::degenerate_variance, "correlation of a constant vector");
  }
  const double r = xc.dot(yc) / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

Vector affine_align(const Eigen::Ref<const Vector>& est, const Eigen::Ref<const Vector>& truth) {
  const auto [alpha, beta] = regress(est, truth);
  return (alpha + beta * est.array()).matrix();
}

Vector calibrate_to_truth(const Eigen::Ref<const Vector>& est,
                          const Eigen::Ref<const Vector>& truth) {
  const auto [alpha, beta] = regress(truth, est);
  // Fitted spread of est explained by truth, relative to est's own spread.
  const double explained = std::abs(beta) * (truth.array() - truth.mean()).matrix().norm();
  const double spread = (est.array() - est.mean()).matrix().norm();
  if (!(explained > 1e-12 * spread) || !std::isfinite(beta)) {
    throw ScalingError(ErrorCode::degenerate_variance,
                       "estimate is uncorrelated with truth; cannot calibrate");
  }
  return ((est.array() - alpha) / beta).matrix();
}

BinStats bin_decomposition(const Matrix& estimates, const Eigen::Ref<const Vector>& truth) {
  if (estimates.cols() != truth.size() || estimates.rows() < 1) {
    throw ScalingError(ErrorCode::config_error, "estimates must be R x J with J matching truth");
  }
  const Eigen::Index replicates = estimates.rows();
  const Eigen::Index count = estimates.size();
  Matrix t = truth.transpose().replicate(replicates, 1);

  const double mean_theta = estimates.mean();
  const double mean_t = t.mean();
  const double denom = static_cast<double>(count - 1);

  BinStats stats;
  stats.bias = (estimates - t).mean();
  if (count < 2) return stats;
  const auto dtheta = (estimates.array() - mean_theta);
  const auto dt = (t.array() - mean_t);
  stats.information = (dtheta * dt).sum() / denom;
  stats.noise = dtheta.square().sum() / denom - dt.square().sum() / denom;
  return stats;
}

EstimatorComparison compare_estimators(const SimData& sim, const EstimatorConfig& cfg) {
  const auto report = scale(sim.placements, cfg);
  const Vector& am = report.solution.y_hat;
  const Vector means = require_all(column_means(sim.placements));
  const Vector medians = require_all(column_medians(sim.placements));
  const Vector& truth = sim.truth_y;

  EstimatorComparison out;
  out.rows.push_back(truth_row("am", am, truth));
  out.rows.push_back(truth_row("mean", means, truth));
  out.rows.push_back(truth_row("median", medians, truth));
  out.r_am_truth = out.rows[0].r_truth;
  out.r_mean_truth = out.rows[1].r_truth;
  out.r_am_mean = pearson(affine_align(am, means), means);
  return out;
}

EstimatorComparison compare_without_truth(const PlacementMatrix& p, const EstimatorConfig& cfg) {
  const auto report = scale(p, cfg);
  const Vector means = require_all(column_means(p));
  EstimatorComparison out;
  out.r_am_mean = pearson(affine_align(report.solution.y_hat, means), means);
  out.rows.push_back({"am", std::nullopt, std::nullopt});
  out.rows.push_back({"mean", std::nullopt, std::nullopt});
  out.rows.push_back({"median", std::nullopt, std::nullopt});
  return out;
}

}  // namespace amscale
