#pragma once

#include "amscale/identification.hpp"
#include "amscale/placements.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace amscale {

enum class Method { naive, qr };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);

struct EstimatorConfig {
  Method method = Method::qr;
  std::size_t polarity_index = 0;
  double rank_tolerance = 1e-12;
  // Absolute thresholds on the deflated spectrum. When unset they default to
  // 1e-9 * n and 1e-7 * n, n being the number of contributing respondents.
  std::optional<double> zero_eigen_tolerance;
  std::optional<double> separation_tolerance;
  // Keep constant-row respondents as rank-1 projectors. Only meaningful for
  // the QR path; the naive path cannot invert their normal equations.
  bool retain_degenerate = true;
  unsigned threads = 1;

  double zero_tolerance_for(std::size_t n) const;
  double separation_tolerance_for(std::size_t n) const;
  void validate(std::size_t stimuli) const;
};

// Hat matrix X (X'X)^-1 X' computed by explicitly inverting the 2x2 normal
// equations. Throws SingularRespondent when X'X is numerically singular.
Matrix projector_naive(const Matrix& design, double rank_tolerance = 1e-12);

struct QrProjector {
  Matrix projector;
  int rank = 0;
};

// Same projector as Q Q' from a thin Householder QR. A design whose second
// column is numerically in the span of the ones column yields the rank-1
// projector onto the ones direction instead of failing.
QrProjector projector_qr(const Matrix& design, double rank_tolerance = 1e-12);

enum class RowStatus : std::uint8_t { used, degenerate, dropped };

struct ProjectorAccumulation {
  Matrix a;
  std::size_t n_used = 0;
  std::size_t n_degenerate = 0;
  std::size_t n_dropped = 0;
  std::vector<RowStatus> status;  // one entry per input row

  std::size_t contributing() const { return n_used + n_degenerate; }
};

// Sums per-respondent projectors in input row order. Projectors are computed
// in fixed-size blocks that may run on worker threads; the block partial sums
// are combined in block order, so the result does not depend on `threads`.
ProjectorAccumulation accumulate(const PlacementMatrix& p, const EstimatorConfig& cfg);

struct StimuliSolution {
  Vector y_hat;
  double selected_eigenvalue = 0.0;
  Vector deflated_spectrum;  // descending, length J-1
  std::size_t n_used = 0;
  Method method = Method::qr;
};

// Restricts A - nI to the mean-zero subspace, takes the eigenvector of the
// largest eigenvalue, standardizes it and fixes its sign by polarity.
StimuliSolution solve_stimuli(const ProjectorAccumulation& acc, const EstimatorConfig& cfg);

// Deflated operator H'(A - nI)H in the Helmert basis.
Matrix deflated_operator(const ProjectorAccumulation& acc);

struct RespondentTransform {
  double c_hat = 0.0;
  double w_hat = 0.0;
  double residual_ss = 0.0;
  bool reversed = false;
  std::optional<double> ideal_point;
};

std::vector<RespondentTransform> respondent_transforms(const PlacementMatrix& p,
                                                       const StimuliSolution& sol,
                                                       double rank_tolerance = 1e-12);

// c + w * self where a self placement exists and w != 0.
std::vector<std::optional<double>> ideal_points(const std::vector<RespondentTransform>& transforms,
                                                const std::optional<Vector>& self);

struct DroppedRespondent {
  std::string id;
  std::string reason;
};

struct ScalingReport {
  std::vector<std::string> stimulus_labels;
  StimuliSolution solution;
  std::vector<std::string> respondent_ids;  // aligned with transforms
  std::vector<RespondentTransform> transforms;
  std::vector<DroppedRespondent> dropped;
  std::size_t n_degenerate = 0;
  IdentificationReport diagnostics;
};

// complete_cases -> accumulate -> solve_stimuli -> respondent_transforms -> ideal_points
ScalingReport scale(const PlacementMatrix& p, const EstimatorConfig& cfg);

struct StimulusInterval {
  std::string label;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct BootstrapResult {
  std::vector<StimulusInterval> intervals;
  std::size_t replicates = 0;
  std::size_t failures = 0;
  double level = 0.0;
  std::uint64_t seed = 0;
};

// Percentile intervals from resampling respondents with replacement.
// Replicate b draws from its own generator seeded with seed ^ (b + 1), and
// each replicate is sign-aligned to the point estimate before the quantiles
// are taken.
BootstrapResult bootstrap_ci(const PlacementMatrix& p, const EstimatorConfig& cfg,
                             std::size_t replicates, std::uint64_t seed, double level);

}  // namespace amscale
