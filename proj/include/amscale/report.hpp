#pragma once

#include "amscale/am_core.hpp"
#include "amscale/bam.hpp"
#include "amscale/baselines.hpp"
#include "amscale/identification.hpp"
#include "amscale/simharness.hpp"

#include <json.hpp>

#include <string>

namespace amscale::report {

using Json = nlohmann::ordered_json;

// Pretty-printed JSON with a fixed key order and every real rendered with
// 17 significant digits.
std::string render(const Json& doc);

Json to_json(const IdentificationReport& diag);
Json to_json(const ScalingReport& report);
Json to_json(const BamSolution& sol, const std::vector<std::string>& stimulus_labels);
Json to_json(const BootstrapResult& result);
Json to_json(const SimConfig& cfg);
Json to_json(const BinStats& stats);

// Record for one simulated run, optionally with pooled replication results.
Json comparison_json(const HeteroRecord& record, const BinReplications* replications);
Json comparison_json(const EstimatorComparison& real_data);
Json to_json(const RetentionRecord& record);

std::string scale_csv(const ScalingReport& report);
std::string bootstrap_csv(const BootstrapResult& result);
std::string diagnose_csv(const IdentificationReport& diag);
std::string truth_csv(const std::vector<std::string>& labels, const Vector& truth);
// One row per estimator: name, r_truth[, bias, information, noise].
std::string comparison_csv(const HeteroRecord& record, const BinReplications* replications);
std::string comparison_csv(const EstimatorComparison& real_data);
// Per-replicate |Pearson| with the truth, one column per estimator.
std::string replicate_correlations_csv(const BinReplications& replications);

}  // namespace amscale::report
