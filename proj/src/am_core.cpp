#include "amscale/am_core.hpp"

#include "amscale/error.hpp"
#include "amscale/linalg.hpp"
#include "amscale/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace amscale {

namespace {

constexpr std::size_t kBlockRows = 64;

// Rank of a J x 2 design from its R factor. The second column counts as
// independent when its residual after removing the ones direction exceeds the
// tolerance relative to the larger of the ones norm and the row's level.
int design_rank(const Matrix& r, double rank_tolerance) {
  const double scale = std::max(std::abs(r(0, 0)), std::abs(r(0, 1)));
  return std::abs(r(1, 1)) < rank_tolerance * scale ? 1 : 2;
}

double sample_sd(const Vector& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

std::string not_identified_message(Eigen::Index stimuli) {
  std::string msg =
      "stimulus positions are not identified: A - nI vanishes on the mean-zero subspace, so "
      "every direction is an eigenvector with eigenvalue 0";
  if (stimuli == 2) {
    msg += " (with two stimuli each respondent's projector is the 2x2 identity; at least three "
           "stimuli are required)";
  }
  return msg;
}

}  // namespace

std::string_view to_string(Method method) {
  return method == Method::naive ? "naive" : "qr";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "naive") return Method::naive;
  if (name == "qr") return Method::qr;
  return std::nullopt;
}

double EstimatorConfig::zero_tolerance_for(std::size_t n) const {
  return zero_eigen_tolerance.value_or(1e-9 * static_cast<double>(std::max<std::size_t>(n, 1)));
}

double EstimatorConfig::separation_tolerance_for(std::size_t n) const {
  return separation_tolerance.value_or(1e-7 * static_cast<double>(std::max<std::size_t>(n, 1)));
}

void EstimatorConfig::validate(std::size_t stimuli) const {
  auto positive = [](std::optional<double> v) { return !v || (*v > 0.0 && std::isfinite(*v)); };
  if (!(rank_tolerance > 0.0) || !positive(zero_eigen_tolerance) ||
      !positive(separation_tolerance)) {
    throw ScalingError(ErrorCode::config_error, "tolerances must be positive");
  }
  if (polarity_index >= stimuli) {
    throw ScalingError(ErrorCode::config_error,
                       "polarity index " + std::to_string(polarity_index) + " is out of range for " +
                           std::to_string(stimuli) + " stimuli");
  }
}

Matrix projector_naive(const Matrix& design, double rank_tolerance) {
  const Eigen::Matrix2d xtx = design.transpose() * design;
  const double det = xtx(0, 0) * xtx(1, 1) - xtx(0, 1) * xtx(1, 0);
  const double trace = xtx.trace();
  // Reciprocal condition estimate of X'X: det / trace^2 ~ (s_min / s_max)^2.
  if (design.rows() < 2 || !(det > rank_tolerance * trace * trace)) {
    throw ScalingError(ErrorCode::singular_respondent,
                       "X'X is singular; the respondent's placements do not vary");
  }
  Eigen::Matrix2d inverse;
  inverse << xtx(1, 1), -xtx(0, 1), -xtx(1, 0), xtx(0, 0);
  inverse /= det;
  return design * inverse * design.transpose();
}

QrProjector projector_qr(const Matrix& design, double rank_tolerance) {
  if (design.rows() < 2) {
    throw ScalingError(ErrorCode::insufficient_rows,
                       "QR decomposition of the design needs at least two stimuli");
  }
  const auto qr = linalg::householder_qr(design);
  if (design_rank(qr.r, rank_tolerance) == 1) {
    const Vector q0 = qr.q.col(0);
    return {q0 * q0.transpose(), 1};
  }
  return {qr.q * qr.q.transpose(), 2};
}

ProjectorAccumulation accumulate(const PlacementMatrix& p, const EstimatorConfig& cfg) {
  const auto stimuli = static_cast<Eigen::Index>(p.stimuli());
  if (stimuli < 2) {
    throw ScalingError(ErrorCode::too_few_stimuli,
                       "at least two stimuli are needed to form respondent projectors (J=" +
                           std::to_string(stimuli) + "); X'X is singular for a single stimulus");
  }
  if (p.has_missing()) {
    throw ScalingError(ErrorCode::config_error,
                       "accumulate requires complete rows; run complete_cases first");
  }

  const std::size_t n = p.respondents();
  const std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
  std::vector<Matrix> partial(blocks, Matrix::Zero(stimuli, stimuli));
  std::vector<RowStatus> status(n, RowStatus::dropped);

  parallel_for(blocks, cfg.threads, [&](std::size_t b) {
    Matrix& sum = partial[b];
    const std::size_t end = std::min(n, (b + 1) * kBlockRows);
    for (std::size_t i = b * kBlockRows; i < end; ++i) {
      const Matrix design = design_matrix(p.values().row(static_cast<Eigen::Index>(i)).transpose());
      if (cfg.method == Method::naive) {
        try {
          sum += projector_naive(design, cfg.rank_tolerance);
          status[i] = RowStatus::used;
        } catch (const ScalingError& e) {
          if (e.code() != ErrorCode::singular_respondent) throw;
        }
        continue;
      }
      auto proj = projector_qr(design, cfg.rank_tolerance);
      if (proj.rank == 2) {
        sum += proj.projector;
        status[i] = RowStatus::used;
      } else if (cfg.retain_degenerate) {
        sum += proj.projector;
        status[i] = RowStatus::degenerate;
      }
    }
  });

  ProjectorAccumulation acc;
  acc.a = Matrix::Zero(stimuli, stimuli);
  for (const auto& s : partial) acc.a += s;
  acc.a = 0.5 * (acc.a + acc.a.transpose());
  for (auto s : status) {
    switch (s) {
      case RowStatus::used: ++acc.n_used; break;
      case RowStatus::degenerate: ++acc.n_degenerate; break;
      case RowStatus::dropped: ++acc.n_dropped; break;
    }
  }
  acc.status = std::move(status);
  if (acc.contributing() == 0) {
    throw ScalingError(ErrorCode::no_valid_respondents,
                       "no respondent has a usable design (all placements constant)");
  }
  return acc;
}

Matrix deflated_operator(const ProjectorAccumulation& acc) {
  const Eigen::Index stimuli = acc.a.rows();
  const double n = static_cast<double>(acc.contributing());
  const Matrix h = linalg::helmert_basis(stimuli);
  Matrix m = acc.a;
  m.diagonal().array() -= n;
  Matrix d = h.transpose() * m * h;
  return 0.5 * (d + d.transpose());
}

StimuliSolution solve_stimuli(const ProjectorAccumulation& acc, const EstimatorConfig& cfg) {
  const Eigen::Index stimuli = acc.a.rows();
  if (stimuli < 2) {
    throw ScalingError(ErrorCode::too_few_stimuli, "at least three stimuli are required");
  }
  if (acc.contributing() == 0) {
    throw ScalingError(ErrorCode::no_valid_respondents, "no contributing respondents");
  }
  cfg.validate(static_cast<std::size_t>(stimuli));

  const std::size_t n = acc.contributing();
  const auto eig = linalg::jacobi_eigen(deflated_operator(acc));
  const double zero_tol = cfg.zero_tolerance_for(n);

  if (eig.values.cwiseAbs().maxCoeff() <= zero_tol) {
    throw ScalingError(ErrorCode::not_identified, not_identified_message(stimuli));
  }
  if (stimuli < 3) {
    throw ScalingError(ErrorCode::too_few_stimuli,
                       "at least three stimuli are required; J=2 leaves a single deflated "
                       "direction and no unique solution");
  }
  const double gap = eig.values(0) - eig.values(1);
  if (gap < cfg.separation_tolerance_for(n)) {
    throw ScalingError(ErrorCode::not_identified,
                       "stimulus positions are not identified: the two largest eigenvalues of "
                       "the deflated operator coincide (gap " + std::to_string(gap) + ")");
  }

  const Matrix h = linalg::helmert_basis(stimuli);
  Vector y = h * eig.vectors.col(0);
  y.array() -= y.mean();
  y /= sample_sd(y);

  const auto pol = static_cast<Eigen::Index>(cfg.polarity_index);
  if (std::abs(y(pol)) < 1e-12) {
    throw ScalingError(ErrorCode::ambiguous_polarity,
                       "the polarity stimulus sits at the scale midpoint; choose another");
  }
  if (y(pol) > 0.0) y = -y;

  StimuliSolution sol;
  sol.y_hat = std::move(y);
  sol.selected_eigenvalue = eig.values(0);
  sol.deflated_spectrum = eig.values;
  sol.n_used = acc.n_used;
  sol.method = cfg.method;
  return sol;
}

std::vector<RespondentTransform> respondent_transforms(const PlacementMatrix& p,
                                                       const StimuliSolution& sol,
                                                       double rank_tolerance) {
  if (p.has_missing()) {
    throw ScalingError(ErrorCode::config_error, "respondent transforms need complete rows");
  }
  if (static_cast<Eigen::Index>(p.stimuli()) != sol.y_hat.size()) {
    throw ScalingError(ErrorCode::config_error, "solution and placements disagree on J");
  }
  const double y_mean = sol.y_hat.mean();
  std::vector<RespondentTransform> out(p.respondents());
  for (std::size_t i = 0; i < p.respondents(); ++i) {
    auto& t = out[i];
    const Matrix design = design_matrix(p.values().row(static_cast<Eigen::Index>(i)).transpose());
    const auto qr = linalg::householder_qr(design);
    if (design_rank(qr.r, rank_tolerance) == 1) {
      t.c_hat = y_mean;
      t.w_hat = 0.0;
      t.residual_ss = (sol.y_hat.array() - y_mean).square().sum();
      continue;
    }
    const Vector coef = linalg::solve_least_squares(qr, sol.y_hat);
    t.c_hat = coef(0);
    t.w_hat = coef(1);
    t.residual_ss = (design * coef - sol.y_hat).squaredNorm();
    t.reversed = t.w_hat < 0.0;
  }
  const auto points = ideal_points(out, p.self_placement());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].ideal_point = points[i];
  return out;
}

std::vector<std::optional<double>> ideal_points(const std::vector<RespondentTransform>& transforms,
                                                const std::optional<Vector>& self) {
  std::vector<std::optional<double>> out(transforms.size());
  if (!self) return out;
  if (static_cast<std::size_t>(self->size()) != transforms.size()) {
    throw ScalingError(ErrorCode::config_error, "self placements and transforms are misaligned");
  }
  for (std::size_t i = 0; i < transforms.size(); ++i) {
    const double s = (*self)(static_cast<Eigen::Index>(i));
    const auto& t = transforms[i];
    if (std::isfinite(s) && t.w_hat != 0.0) out[i] = t.c_hat + t.w_hat * s;
  }
  return out;
}

ScalingReport scale(const PlacementMatrix& p, const EstimatorConfig& cfg) {
  cfg.validate(p.stimuli());
  auto cc = complete_cases(p);

  std::vector<std::size_t> kept_rows;
  {
    std::size_t d = 0;
    for (std::size_t i = 0; i < p.respondents(); ++i) {
      if (d < cc.dropped.size() && cc.dropped[d] == i) {
        ++d;
      } else {
        kept_rows.push_back(i);
      }
    }
  }

  const auto acc = accumulate(cc.matrix, cfg);
  auto solution = solve_stimuli(acc, cfg);

  ScalingReport report;
  report.stimulus_labels = p.stimulus_labels();
  report.n_degenerate = acc.n_degenerate;

  std::vector<std::size_t> retained;
  std::vector<std::pair<std::size_t, DroppedRespondent>> dropped;
  for (auto i : cc.dropped) {
    dropped.push_back({i, {p.respondent_ids()[i], "missing placements"}});
  }
  for (std::size_t k = 0; k < acc.status.size(); ++k) {
    if (acc.status[k] == RowStatus::dropped) {
      const std::string reason = cfg.method == Method::naive
                                     ? "rank-deficient: singular normal equations"
                                     : "rank-deficient: constant placements";
      dropped.push_back({kept_rows[k], {cc.matrix.respondent_ids()[k], reason}});
    } else {
      retained.push_back(k);
    }
  }
  std::sort(dropped.begin(), dropped.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& d : dropped) report.dropped.push_back(std::move(d.second));

  const auto used = retained.size() == cc.matrix.respondents() ? cc.matrix
                                                                : cc.matrix.select_rows(retained);
  report.transforms = respondent_transforms(used, solution, cfg.rank_tolerance);
  report.respondent_ids = used.respondent_ids();

  auto& diag = report.diagnostics;
  const auto check = check_min_stimuli(p.stimuli());
  diag.j_count = p.stimuli();
  diag.min_j_satisfied = check.pass;
  diag.reason = check.reason;
  for (std::size_t i = 0; i < cc.matrix.respondents(); ++i) {
    const Vector row = cc.matrix.values().row(static_cast<Eigen::Index>(i)).transpose();
    (respondent_rank(row, cfg.rank_tolerance) == 2 ? diag.rank2 : diag.rank1)++;
  }
  diag.zero_operator = verify_zero_operator(acc, cfg.zero_eigen_tolerance);
  diag.top_gap = solution.deflated_spectrum(0) - solution.deflated_spectrum(1);

  report.solution = std::move(solution);
  return report;
}

}  // namespace amscale
