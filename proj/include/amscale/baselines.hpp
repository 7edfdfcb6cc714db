#pragma once

#include "amscale/am_core.hpp"
#include "amscale/placements.hpp"

#include <optional>
#include <string>
#include <vector>

namespace amscale {

struct SimData;

struct BinStats {
  double bias = 0.0;
  double information = 0.0;
  double noise = 0.0;
};

// Available-case column summaries; absent for a column with no observations.
std::vector<std::optional<double>> column_means(const PlacementMatrix& p);
std::vector<std::optional<double>> column_medians(const PlacementMatrix& p);

// Product-moment correlation. Throws DegenerateVariance for k < 2 or a
// constant argument.
double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

// alpha + beta * est with (alpha, beta) the least-squares regression of truth on est.
Vector affine_align(const Eigen::Ref<const Vector>& est, const Eigen::Ref<const Vector>& truth);

// Puts est on the truth scale by inverting the regression of est on truth:
// est ~ alpha + beta * truth, returned as (est - alpha) / beta. Unlike
// affine_align this does not shrink toward the mean, so var(result) - var(truth)
// measures the estimator's dispersion. Throws DegenerateVariance when est
// carries no linear signal about truth.
Vector calibrate_to_truth(const Eigen::Ref<const Vector>& est,
                          const Eigen::Ref<const Vector>& truth);

// Pools every (replicate, stimulus) pair; sample (n - 1) moments.
// Rows of `estimates` are replicates already put on the truth scale.
BinStats bin_decomposition(const Matrix& estimates, const Eigen::Ref<const Vector>& truth);

struct EstimatorRow {
  std::string name;
  std::optional<double> r_truth;
  std::optional<BinStats> bin;
};

struct EstimatorComparison {
  std::optional<double> r_am_truth;
  std::optional<double> r_mean_truth;
  double r_am_mean = 0.0;
  std::vector<EstimatorRow> rows;  // am, mean, median
};

// AM, column means and column medians against the simulated truth. The AM
// vector is sign-free, so correlations are computed after affine alignment.
EstimatorComparison compare_estimators(const SimData& sim, const EstimatorConfig& cfg);

// Real data without truth: only the agreement between AM and the means.
EstimatorComparison compare_without_truth(const PlacementMatrix& p, const EstimatorConfig& cfg);

}  // namespace amscale
