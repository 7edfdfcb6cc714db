#pragma once

#include "amscale/placements.hpp"

#include <cstddef>
#include <optional>
#include <string>

namespace amscale {

struct ProjectorAccumulation;
struct EstimatorConfig;

struct MinStimuliCheck {
  bool pass = false;
  std::string reason;  // empty on pass
};

// At least three stimuli are needed. With two, every respondent's projector
// is the 2x2 identity and A - nI vanishes; with one, X'X is singular.
MinStimuliCheck check_min_stimuli(std::size_t stimuli);

// 2 when two placements in the row differ by more than
// tolerance * max(1, max |x|), otherwise 1.
int respondent_rank(const Eigen::Ref<const Vector>& row, double rank_tolerance = 1e-12);

// True when ||A - nI||_inf is within the zero tolerance (default 1e-9 * n).
bool verify_zero_operator(const ProjectorAccumulation& acc,
                          std::optional<double> tolerance = std::nullopt);

struct IdentificationReport {
  std::size_t j_count = 0;
  bool min_j_satisfied = false;
  std::string reason;
  std::size_t rank1 = 0;
  std::size_t rank2 = 0;
  bool zero_operator = false;
  double top_gap = 0.0;
};

// Full diagnosis of a placement matrix. Never throws for identification
// problems; those are reported in the returned fields.
IdentificationReport diagnose(const PlacementMatrix& p, const EstimatorConfig& cfg);

}  // namespace amscale
