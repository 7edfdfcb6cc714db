#include "amscale/am_core.hpp"

#include "amscale/error.hpp"
#include "amscale/parallel.hpp"
#include "amscale/rng.hpp"

#include <algorithm>
#include <cmath>

namespace amscale {

namespace {

// Linear interpolation between order statistics (the usual "type 7" rule).
double quantile(std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapResult bootstrap_ci(const PlacementMatrix& p, const EstimatorConfig& cfg,
                             std::size_t replicates, std::uint64_t seed, double level) {
  if (replicates < 100) {
    throw ScalingError(ErrorCode::config_error, "bootstrap needs at least 100 replicates");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw ScalingError(ErrorCode::config_error, "interval level must lie strictly in (0, 1)");
  }

  const auto point = scale(p, cfg);
  const auto data = complete_cases(p).matrix;
  const std::size_t n = data.respondents();
  const Eigen::Index stimuli = point.solution.y_hat.size();

  EstimatorConfig inner = cfg;
  inner.threads = 1;

  std::vector<std::optional<Vector>> draws(replicates);
  parallel_for(replicates, cfg.threads, [&](std::size_t b) {
    Rng rng = Rng::for_replicate(seed, b + 1);
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = static_cast<std::size_t>(rng.index(n));
    try {
      const auto acc = accumulate(data.select_rows(rows), inner);
      Vector y = solve_stimuli(acc, inner).y_hat;
      if (y.dot(point.solution.y_hat) < 0.0) y = -y;
      draws[b] = std::move(y);
    } catch (const ScalingError& e) {
      if (!e.is_estimation_failure()) throw;
    }
  });

  std::vector<Vector> ok;
  for (auto& d : draws) {
    if (d) ok.push_back(std::move(*d));
  }
  const std::size_t failures = replicates - ok.size();
  if (static_cast<double>(failures) > 0.2 * static_cast<double>(replicates)) {
    throw ScalingError(ErrorCode::bootstrap_degenerate,
                       std::to_string(failures) + " of " + std::to_string(replicates) +
                           " bootstrap replicates were not identified");
  }

  BootstrapResult result;
  result.replicates = replicates;
  result.failures = failures;
  result.level = level;
  result.seed = seed;
  const double tail = (1.0 - level) / 2.0;
  std::vector<double> column(ok.size());
  for (Eigen::Index j = 0; j < stimuli; ++j) {
    for (std::size_t b = 0; b < ok.size(); ++b) column[b] = ok[b](j);
    std::sort(column.begin(), column.end());
    StimulusInterval iv;
    iv.label = point.stimulus_labels[static_cast<std::size_t>(j)];
    iv.estimate = point.solution.y_hat(j);
    iv.lower = quantile(column, tail);
    iv.upper = quantile(column, 1.0 - tail);
    result.intervals.push_back(std::move(iv));
  }
  return result;
}

}  // namespace amscale
