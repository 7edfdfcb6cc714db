#include "amscale/identification.hpp"

#include "amscale/am_core.hpp"
#include "amscale/error.hpp"
#include "amscale/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace amscale {

MinStimuliCheck check_min_stimuli(std::size_t stimuli) {
  switch (stimuli) {
    case 0:
      return {false, "no stimuli"};
    case 1:
      return {false,
              "singular normal equations: with one stimulus X'X = [[1, x], [x, x^2]] has rank 1"};
    case 2:
      return {false,
              "zero operator: with two stimuli every respondent projector is the identity, so "
              "A - nI is the zero matrix"};
    default:
      return {true, {}};
  }
}

int respondent_rank(const Eigen::Ref<const Vector>& row, double rank_tolerance) {
  if (row.size() < 2) return 1;
  const double spread = row.maxCoeff() - row.minCoeff();
  const double magnitude = row.cwiseAbs().maxCoeff();
  return spread > rank_tolerance * std::max(1.0, magnitude) ? 2 : 1;
}

bool verify_zero_operator(const ProjectorAccumulation& acc, std::optional<double> tolerance) {
  const auto n = acc.contributing();
  const double tol = tolerance.value_or(1e-9 * static_cast<double>(std::max<std::size_t>(n, 1)));
  Matrix m = acc.a;
  m.diagonal().array() -= static_cast<double>(n);
  // Infinity norm: largest absolute row sum.
  return m.cwiseAbs().rowwise().sum().maxCoeff() <= tol;
}

IdentificationReport diagnose(const PlacementMatrix& p, const EstimatorConfig& cfg) {
  IdentificationReport report;
  report.j_count = p.stimuli();
  const auto check = check_min_stimuli(p.stimuli());
  report.min_j_satisfied = check.pass;
  report.reason = check.reason;

  std::vector<std::size_t> complete;
  for (std::size_t i = 0; i < p.respondents(); ++i) {
    if (!p.row_complete(i)) continue;
    complete.push_back(i);
    const Vector row = p.values().row(static_cast<Eigen::Index>(i)).transpose();
    (respondent_rank(row, cfg.rank_tolerance) == 2 ? report.rank2 : report.rank1)++;
  }
  if (p.stimuli() < 2 || complete.empty()) return report;

  EstimatorConfig qr_cfg = cfg;
  qr_cfg.method = Method::qr;
  qr_cfg.retain_degenerate = true;
  ProjectorAccumulation acc;
  try {
    acc = accumulate(p.select_rows(complete), qr_cfg);
  } catch (const ScalingError& e) {
    if (!e.is_estimation_failure()) throw;
    return report;
  }
  report.zero_operator = verify_zero_operator(acc, cfg.zero_eigen_tolerance);
  if (p.stimuli() >= 3) {
    const auto eig = linalg::jacobi_eigen(deflated_operator(acc));
    report.top_gap = std::max(0.0, eig.values(0) - eig.values(1));
  }
  return report;
}

}  // namespace amscale
