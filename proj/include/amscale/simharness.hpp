#pragma once

#include "amscale/am_core.hpp"
#include "amscale/baselines.hpp"
#include "amscale/placements.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace amscale {

struct SimConfig {
  std::size_t n = 500;
  std::size_t j = 6;
  double sd_min = 0.3;
  double sd_max = 0.9;
  double w_min = 0.0;
  double w_max = 1.0;
  double c_sd = 1.0;
  std::uint64_t seed = 1234;
  std::size_t degenerate_count = 0;
  double rationalization_shift = 0.0;
  unsigned threads = 1;

  void validate() const;
};

// Synthetic truth and the placements generated from it. Rows past
// `n_regular` are the appended constant-row respondents; their true_w is 0.
struct SimData {
  Vector truth_y;
  PlacementMatrix placements;
  Vector true_c;
  Vector true_w;
  Vector sigma;
  Vector self_truth;
  Matrix errors;  // u_ij on the common scale, regular rows only
  std::size_t n_regular = 0;
};

// Stimuli: j standard-normal draws, standardized. Respondent i draws
// sigma_i ~ U(sd_min, sd_max), u_ij ~ N(0, sigma_i), w_i ~ U(w_min, w_max)
// (redrawn while |w_i| < 1e-6), c_i ~ N(0, c_sd) and places
// X_ij = (Y_j + u_ij - c_i) / w_i.
SimData generate(const SimConfig& cfg);

// Same DGP with the stimulus truth held fixed; respondent draws come from
// the replicate's own generator.
SimData generate_replicate(const SimConfig& cfg, const Vector& truth_y, std::uint64_t replicate);

struct HeteroRecord {
  SimConfig config;
  std::optional<EstimatorComparison> comparison;
  std::optional<std::string> failure;  // error name and message when AM fails
};

HeteroRecord run_hetero_experiment(const SimConfig& cfg, const EstimatorConfig& estimator);

struct MethodRetention {
  std::optional<std::size_t> n_used;
  std::optional<std::size_t> n_degenerate;
  std::optional<std::size_t> n_dropped;
  std::optional<Vector> y_hat;
  std::optional<std::string> failure;
};

struct RetentionRecord {
  SimConfig config;
  MethodRetention naive;
  MethodRetention qr;
  std::optional<double> max_abs_difference;  // sign-aligned, infinity norm
};

RetentionRecord run_retention_experiment(const SimConfig& cfg, const EstimatorConfig& estimator);

struct BinReplications {
  std::size_t replicates = 0;
  Vector truth_y;
  std::map<std::string, BinStats> stats;            // am, mean, median
  std::map<std::string, std::vector<double>> r_truth;  // per-replicate |Pearson|
};

// Fixed truth from cfg.seed; replicate r (1-based) uses seed ^ r for every
// respondent-level draw. Estimates are calibrated to the truth scale before
// pooling.
BinReplications run_bin_replications(const SimConfig& cfg, std::size_t replicates,
                                     const EstimatorConfig& estimator);

}  // namespace amscale
