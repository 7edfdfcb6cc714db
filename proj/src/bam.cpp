#include "amscale/bam.hpp"

#include "amscale/error.hpp"
#include "amscale/parallel.hpp"

#include <cmath>

namespace amscale {

namespace {

struct Observed {
  std::vector<Eigen::Index> stimuli;
  std::vector<double> values;
};

double sample_sd(const Vector& v) {
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

}  // namespace

BamParameters parameter_map(double c, double w) {
  if (w == 0.0) throw ScalingError(ErrorCode::zero_weight, "weight must be nonzero");
  return {-c / w, 1.0 / w};
}

AmParameters inverse_parameter_map(double a, double b) {
  if (b == 0.0) throw ScalingError(ErrorCode::zero_weight, "weight must be nonzero");
  return {-a / b, 1.0 / b};
}

BamSolution bam_als(const PlacementMatrix& p, const BamConfig& cfg) {
  const auto j = static_cast<Eigen::Index>(p.stimuli());
  if (j < 3) {
    throw ScalingError(ErrorCode::too_few_stimuli, "BAM estimation needs at least three stimuli");
  }
  if (cfg.max_iterations < 1 || !(cfg.convergence_tolerance > 0.0) ||
      cfg.polarity_index >= p.stimuli()) {
    throw ScalingError(ErrorCode::config_error, "invalid BAM configuration");
  }

  BamSolution sol;
  std::vector<Observed> rows;
  for (std::size_t i = 0; i < p.respondents(); ++i) {
    Observed obs;
    for (Eigen::Index s = 0; s < j; ++s) {
      if (p.is_missing(i, static_cast<std::size_t>(s))) continue;
      obs.stimuli.push_back(s);
      obs.values.push_back(p.values()(static_cast<Eigen::Index>(i), s));
    }
    if (obs.stimuli.size() < std::max<std::size_t>(cfg.min_placements, 1)) {
      sol.excluded_ids.push_back(p.respondent_ids()[i]);
      continue;
    }
    sol.respondent_ids.push_back(p.respondent_ids()[i]);
    rows.push_back(std::move(obs));
  }
  if (rows.empty()) {
    throw ScalingError(ErrorCode::insufficient_placements,
                       "no respondent has at least " + std::to_string(cfg.min_placements) +
                           " observed placements");
  }

  // Column-major view for the stimulus step: (respondent, value) per stimulus.
  std::vector<std::vector<std::pair<std::size_t, double>>> columns(static_cast<std::size_t>(j));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t k = 0; k < rows[r].stimuli.size(); ++k) {
      columns[static_cast<std::size_t>(rows[r].stimuli[k])].push_back({r, rows[r].values[k]});
    }
  }
  Vector y(j);
  for (Eigen::Index s = 0; s < j; ++s) {
    const auto& col = columns[static_cast<std::size_t>(s)];
    if (col.empty()) {
      throw ScalingError(ErrorCode::empty_stimulus_column,
                         "stimulus '" + p.stimulus_labels()[static_cast<std::size_t>(s)] +
                             "' is not placed by any retained respondent");
    }
    double sum = 0.0;
    for (const auto& [r, x] : col) sum += x;
    y(s) = sum / static_cast<double>(col.size());
  }
  auto standardize = [&](Vector& v) -> std::pair<double, double> {
    const double m = v.mean();
    const double sd = sample_sd(v);
    if (!(sd > 0.0) || !std::isfinite(sd)) {
      throw ScalingError(ErrorCode::not_identified,
                         "stimulus estimates collapsed to a single point");
    }
    v = (v.array() - m) / sd;
    return {m, sd};
  };
  standardize(y);

  const auto n = static_cast<Eigen::Index>(rows.size());
  Vector a = Vector::Zero(n);
  Vector b = Vector::Zero(n);

  auto ssr = [&] {
    double total = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const double ar = a(static_cast<Eigen::Index>(r));
      const double br = b(static_cast<Eigen::Index>(r));
      for (std::size_t k = 0; k < rows[r].stimuli.size(); ++k) {
        const double e = ar + br * y(rows[r].stimuli[k]) - rows[r].values[k];
        total += e * e;
      }
    }
    return total;
  };

  auto respondent_step = [&](std::size_t r) {
    const auto& obs = rows[r];
    const double count = static_cast<double>(obs.stimuli.size());
    double ym = 0.0;
    double xm = 0.0;
    for (std::size_t k = 0; k < obs.stimuli.size(); ++k) {
      ym += y(obs.stimuli[k]);
      xm += obs.values[k];
    }
    ym /= count;
    xm /= count;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k < obs.stimuli.size(); ++k) {
      const double dy = y(obs.stimuli[k]) - ym;
      syy += dy * dy;
      sxy += dy * (obs.values[k] - xm);
    }
    const auto idx = static_cast<Eigen::Index>(r);
    b(idx) = syy > 1e-24 ? sxy / syy : 0.0;
    a(idx) = xm - b(idx) * ym;
  };

  auto stimulus_step = [&](std::size_t s) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [r, x] : columns[s]) {
      const double br = b(static_cast<Eigen::Index>(r));
      num += br * (x - a(static_cast<Eigen::Index>(r)));
      den += br * br;
    }
    if (den > 0.0) y(static_cast<Eigen::Index>(s)) = num / den;
  };

  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    const Vector previous = y;

    parallel_for(rows.size(), cfg.threads, respondent_step);
    sol.ssr_trace.push_back(ssr());

    parallel_for(static_cast<std::size_t>(j), cfg.threads, stimulus_step);
    sol.ssr_trace.push_back(ssr());

    const auto [m, sd] = standardize(y);
    a = a.array() + b.array() * m;
    b *= sd;
    sol.ssr_trace.push_back(ssr());

    sol.iterations = it + 1;
    if ((y - previous).cwiseAbs().maxCoeff() < cfg.convergence_tolerance) {
      sol.converged = true;
      break;
    }
  }

  const auto pol = static_cast<Eigen::Index>(cfg.polarity_index);
  if (std::abs(y(pol)) < 1e-12) {
    throw ScalingError(ErrorCode::ambiguous_polarity,
                       "the polarity stimulus sits at the scale midpoint; choose another");
  }
  if (y(pol) > 0.0) {
    y = -y;
    b = -b;
  }
  sol.y_hat = std::move(y);
  sol.a = std::move(a);
  sol.b = std::move(b);
  sol.final_ssr = sol.ssr_trace.back();
  return sol;
}

}  // namespace amscale
