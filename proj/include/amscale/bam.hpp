#pragma once

#include "amscale/placements.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace amscale {

struct BamConfig {
  std::size_t max_iterations = 500;
  double convergence_tolerance = 1e-8;  // max |change in y_hat| per iteration
  std::size_t polarity_index = 0;
  std::size_t min_placements = 2;
  unsigned threads = 1;
};

// Point estimates for X_ij = a_i + b_i Y_j + error, with Y standardized.
struct BamSolution {
  Vector y_hat;
  Vector a;  // one entry per retained respondent
  Vector b;
  std::vector<std::string> respondent_ids;  // retained respondents, input order
  std::vector<std::string> excluded_ids;    // fewer than min_placements observed
  std::size_t iterations = 0;
  bool converged = false;
  double final_ssr = 0.0;

  // SSR after each step, three entries per iteration: respondent update,
  // stimulus update, renormalization.
  std::vector<double> ssr_trace;
};

// Alternating least squares over the observed cells:
//   1. per respondent, regress observed X_ij on [1, Y_j]        -> a_i, b_i
//   2. per stimulus, Y_j = sum b_i (X_ij - a_i) / sum b_i^2
//   3. standardize Y and absorb the shift and scale into a and b
// Starts from the standardized available-case column means. Respondents with
// fewer than min_placements observations are excluded. Reaching
// max_iterations returns the current iterate with converged = false.
BamSolution bam_als(const PlacementMatrix& p, const BamConfig& cfg = {});

struct BamParameters {
  double a = 0.0;
  double b = 0.0;
};

// Noise-free correspondence between c + w X = Y and X = a + b Y:
// a = -c / w, b = 1 / w. Throws ZeroWeight for w == 0.
BamParameters parameter_map(double c, double w);

struct AmParameters {
  double c = 0.0;
  double w = 0.0;
};

// Inverse of parameter_map: c = -a / b, w = 1 / b.
AmParameters inverse_parameter_map(double a, double b);

}  // namespace amscale
