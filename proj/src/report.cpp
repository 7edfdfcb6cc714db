#include "amscale/report.hpp"

#include "amscale/format.hpp"

#include <cmath>

namespace amscale::report {

namespace {

void render_into(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close_pad(static_cast<std::size_t>(depth) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        render_into(it.value(), out, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& item : j) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        render_into(item, out, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case Json::value_t::number_float:
      out += format_real(j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

Json optional_real(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json stimuli_json(const std::vector<std::string>& labels, const Vector& positions) {
  Json arr = Json::array();
  for (std::size_t k = 0; k < labels.size(); ++k) {
    arr.push_back({{"label", labels[k]}, {"position", positions(static_cast<Eigen::Index>(k))}});
  }
  return arr;
}

Json vector_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

Json dgp_notes() {
  return Json::array(
      {"placement errors u_ij are drawn independently for every cell from N(0, sigma_i)",
       "respondent weights are redrawn while |w_i| < 1e-6",
       "placements are X_ij = (Y_j + u_ij - c_i) / w_i"});
}

std::string csv_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

}  // namespace

std::string render(const Json& doc) {
  std::string out;
  render_into(doc, out, 0);
  out += "\n";
  return out;
}

Json to_json(const IdentificationReport& diag) {
  Json j;
  j["j_count"] = diag.j_count;
  j["min_j_satisfied"] = diag.min_j_satisfied;
  j["reason"] = diag.reason;
  j["respondent_ranks"] = {{"rank1", diag.rank1}, {"rank2", diag.rank2}};
  j["zero_operator"] = diag.zero_operator;
  j["top_gap"] = diag.top_gap;
  return j;
}

Json to_json(const ScalingReport& report) {
  Json j;
  j["stimuli"] = stimuli_json(report.stimulus_labels, report.solution.y_hat);
  j["eigenvalues"] = vector_json(report.solution.deflated_spectrum);
  Json respondents = Json::array();
  for (std::size_t i = 0; i < report.transforms.size(); ++i) {
    const auto& t = report.transforms[i];
    respondents.push_back({{"id", report.respondent_ids[i]},
                           {"c", t.c_hat},
                           {"w", t.w_hat},
                           {"reversed", t.reversed},
                           {"ideal_point", optional_real(t.ideal_point)}});
  }
  j["respondents"] = std::move(respondents);
  Json dropped = Json::array();
  for (const auto& d : report.dropped) dropped.push_back({{"id", d.id}, {"reason", d.reason}});
  j["dropped"] = std::move(dropped);
  j["method"] = std::string(to_string(report.solution.method));
  j["n_used"] = report.solution.n_used;
  j["n_degenerate"] = report.n_degenerate;
  j["diagnostics"] = to_json(report.diagnostics);
  return j;
}

Json to_json(const BamSolution& sol, const std::vector<std::string>& stimulus_labels) {
  Json j;
  j["stimuli"] = stimuli_json(stimulus_labels, sol.y_hat);
  Json respondents = Json::array();
  for (std::size_t i = 0; i < sol.respondent_ids.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    respondents.push_back({{"id", sol.respondent_ids[i]}, {"a", sol.a(idx)}, {"b", sol.b(idx)}});
  }
  j["respondents"] = std::move(respondents);
  j["iterations"] = sol.iterations;
  j["converged"] = sol.converged;
  j["ssr"] = sol.final_ssr;
  j["excluded"] = sol.excluded_ids;
  return j;
}

Json to_json(const BootstrapResult& result) {
  Json j;
  j["level"] = result.level;
  j["replicates"] = result.replicates;
  j["failures"] = result.failures;
  j["seed"] = result.seed;
  Json intervals = Json::array();
  for (const auto& iv : result.intervals) {
    intervals.push_back({{"label", iv.label},
                         {"estimate", iv.estimate},
                         {"lower", iv.lower},
                         {"upper", iv.upper}});
  }
  j["intervals"] = std::move(intervals);
  return j;
}

Json to_json(const SimConfig& cfg) {
  Json j;
  j["n"] = cfg.n;
  j["j"] = cfg.j;
  j["sd_min"] = cfg.sd_min;
  j["sd_max"] = cfg.sd_max;
  j["w_min"] = cfg.w_min;
  j["w_max"] = cfg.w_max;
  j["c_sd"] = cfg.c_sd;
  j["degenerate_count"] = cfg.degenerate_count;
  j["rationalization_shift"] = cfg.rationalization_shift;
  return j;
}

Json to_json(const BinStats& stats) {
  return {{"bias", stats.bias}, {"information", stats.information}, {"noise", stats.noise}};
}

Json comparison_json(const HeteroRecord& record, const BinReplications* replications) {
  Json j;
  j["seed"] = record.config.seed;
  j["config"] = to_json(record.config);
  j["dgp_notes"] = dgp_notes();
  if (record.comparison) {
    const auto& cmp = *record.comparison;
    j["correlations"] = {{"am_truth", optional_real(cmp.r_am_truth)},
                         {"mean_truth", optional_real(cmp.r_mean_truth)},
                         {"am_mean", cmp.r_am_mean}};
    Json rows = Json::array();
    for (const auto& row : cmp.rows) {
      rows.push_back({{"name", row.name}, {"r_truth", optional_real(row.r_truth)}});
    }
    j["estimators"] = std::move(rows);
  } else {
    j["correlations"] = nullptr;
    j["estimators"] = nullptr;
  }
  j["failure"] = record.failure ? Json(*record.failure) : Json(nullptr);
  if (replications) {
    Json bin;
    bin["replicates"] = replications->replicates;
    Json rows = Json::array();
    for (const auto& name : {"am", "mean", "median"}) {
      Json row = {{"name", name}};
      row.update(to_json(replications->stats.at(name)));
      rows.push_back(std::move(row));
    }
    bin["estimators"] = std::move(rows);
    j["bin"] = std::move(bin);
  }
  return j;
}

Json comparison_json(const EstimatorComparison& real_data) {
  Json j;
  j["correlations"] = {{"am_mean", real_data.r_am_mean}};
  return j;
}

Json to_json(const RetentionRecord& record) {
  auto method = [](const MethodRetention& m) {
    Json j;
    auto count = [](const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); };
    j["n_used"] = count(m.n_used);
    j["n_degenerate"] = count(m.n_degenerate);
    j["n_dropped"] = count(m.n_dropped);
    j["failure"] = m.failure ? Json(*m.failure) : Json(nullptr);
    return j;
  };
  Json j;
  j["seed"] = record.config.seed;
  j["config"] = to_json(record.config);
  j["naive"] = method(record.naive);
  j["qr"] = method(record.qr);
  j["max_abs_difference"] = optional_real(record.max_abs_difference);
  return j;
}

std::string scale_csv(const ScalingReport& report) {
  std::string out = "label,position\n";
  for (std::size_t k = 0; k < report.stimulus_labels.size(); ++k) {
    out += report.stimulus_labels[k] + "," +
           format_real(report.solution.y_hat(static_cast<Eigen::Index>(k))) + "\n";
  }
  return out;
}

std::string bootstrap_csv(const BootstrapResult& result) {
  std::string out = "label,estimate,lower,upper\n";
  for (const auto& iv : result.intervals) {
    out += iv.label + "," + format_real(iv.estimate) + "," + format_real(iv.lower) + "," +
           format_real(iv.upper) + "\n";
  }
  return out;
}

std::string diagnose_csv(const IdentificationReport& diag) {
  std::string out = "key,value\n";
  out += "j_count," + std::to_string(diag.j_count) + "\n";
  out += std::string("min_j_satisfied,") + (diag.min_j_satisfied ? "true" : "false") + "\n";
  out += "rank1," + std::to_string(diag.rank1) + "\n";
  out += "rank2," + std::to_string(diag.rank2) + "\n";
  out += std::string("zero_operator,") + (diag.zero_operator ? "true" : "false") + "\n";
  out += "top_gap," + format_real(diag.top_gap) + "\n";
  return out;
}

std::string truth_csv(const std::vector<std::string>& labels, const Vector& truth) {
  std::string out = "label,position\n";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    out += labels[k] + "," + format_real(truth(static_cast<Eigen::Index>(k))) + "\n";
  }
  return out;
}

std::string comparison_csv(const HeteroRecord& record, const BinReplications* replications) {
  std::string out = replications ? "name,r_truth,bias,information,noise\n" : "name,r_truth\n";
  if (!record.comparison) return out;
  for (const auto& row : record.comparison->rows) {
    out += row.name + "," + csv_real(row.r_truth);
    if (replications) {
      const auto& s = replications->stats.at(row.name);
      out += "," + format_real(s.bias) + "," + format_real(s.information) + "," +
             format_real(s.noise);
    }
    out += "\n";
  }
  return out;
}

std::string comparison_csv(const EstimatorComparison& real_data) {
  return "pair,r\nam-mean," + format_real(real_data.r_am_mean) + "\n";
}

std::string replicate_correlations_csv(const BinReplications& replications) {
  std::string out = "replicate,am,mean,median\n";
  for (std::size_t r = 0; r < replications.replicates; ++r) {
    out += std::to_string(r + 1);
    for (const auto& name : {"am", "mean", "median"}) {
      out += "," + format_real(replications.r_truth.at(name)[r]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace amscale::report
