#include "amscale/cli.hpp"

#include "amscale/am_core.hpp"
#include "amscale/bam.hpp"
#include "amscale/baselines.hpp"
#include "amscale/error.hpp"
#include "amscale/identification.hpp"
#include "amscale/report.hpp"
#include "amscale/simharness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

namespace amscale::cli {

namespace {

struct Options {
  std::string input;
  std::string output;
  std::string format = "json";
  std::string method = "qr";
  std::string polarity;
  bool retain_flag = false;
  bool drop_flag = false;
  std::optional<std::uint64_t> seed;
  std::string id_column;
  std::string self_column;
  std::string delimiter = ",";
  std::string replicate_csv;
  SimConfig sim;
  std::size_t replicates = 0;
  double level = 0.9;
  unsigned threads = 1;
  BamConfig bam;
};

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  if (const char* env = std::getenv("AMSCALE_SEED")) {
    try {
      std::size_t used = 0;
      const auto value = std::stoull(env, &used);
      if (used == std::string(env).size()) return value;
    } catch (const std::exception&) {
    }
    throw ScalingError(ErrorCode::config_error, "AMSCALE_SEED is not an unsigned integer");
  }
  return 1234;
}

IngestOptions ingest_options(const Options& o) {
  if (o.delimiter.size() != 1) {
    throw ScalingError(ErrorCode::config_error, "--delimiter must be a single character");
  }
  IngestOptions opts;
  opts.delimiter = o.delimiter[0];
  const auto header = read_csv_header(o.input, opts.delimiter);
  auto has = [&](const std::string& name) {
    return std::find(header.begin(), header.end(), name) != header.end();
  };
  if (!o.id_column.empty()) {
    opts.id_column = o.id_column;
  } else if (has("id")) {
    opts.id_column = "id";
  }
  if (!o.self_column.empty()) {
    opts.self_column = o.self_column;
  } else if (has("self")) {
    opts.self_column = "self";
  }
  return opts;
}

PlacementMatrix load_input(const Options& o) {
  if (o.input.empty()) throw ScalingError(ErrorCode::config_error, "--input is required");
  return load_csv(o.input, ingest_options(o));
}

std::size_t resolve_polarity(const Options& o, const std::vector<std::string>& labels) {
  if (o.polarity.empty()) return 0;
  auto it = std::find(labels.begin(), labels.end(), o.polarity);
  if (it != labels.end()) return static_cast<std::size_t>(it - labels.begin());
  try {
    std::size_t used = 0;
    const auto index = std::stoull(o.polarity, &used);
    if (used == o.polarity.size() && index < labels.size()) return index;
  } catch (const std::exception&) {
  }
  throw ScalingError(ErrorCode::config_error, "unknown polarity stimulus '" + o.polarity + "'");
}

EstimatorConfig estimator_config(const Options& o, const std::vector<std::string>& labels) {
  EstimatorConfig cfg;
  const auto method = parse_method(o.method);
  if (!method) throw ScalingError(ErrorCode::config_error, "--method must be naive or qr");
  cfg.method = *method;
  if (o.retain_flag && o.drop_flag) {
    throw ScalingError(ErrorCode::config_error,
                       "--retain-degenerate and --drop-degenerate are exclusive");
  }
  if (cfg.method == Method::naive) {
    if (o.retain_flag) {
      throw ScalingError(ErrorCode::config_error,
                         "--retain-degenerate requires --method qr; the naive path cannot "
                         "invert constant-row designs");
    }
    cfg.retain_degenerate = false;
  } else {
    cfg.retain_degenerate = !o.drop_flag;
  }
  cfg.polarity_index = resolve_polarity(o, labels);
  cfg.threads = std::max(o.threads, 1u);
  return cfg;
}

std::vector<std::string> sim_labels(const SimConfig& sim) {
  std::vector<std::string> labels(sim.j);
  for (std::size_t k = 0; k < sim.j; ++k) labels[k] = default_stimulus_label(k);
  return labels;
}

SimConfig sim_config(const Options& o) {
  SimConfig sim = o.sim;
  sim.seed = resolve_seed(o);
  sim.threads = std::max(o.threads, 1u);
  return sim;
}

void require_format(const Options& o) {
  if (o.format != "json" && o.format != "csv") {
    throw ScalingError(ErrorCode::config_error, "--format must be json or csv");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ScalingError(ErrorCode::io_error, "cannot write '" + path + "'");
  f << content;
  if (!f) throw ScalingError(ErrorCode::io_error, "failed writing '" + path + "'");
}

void emit(const Options& o, std::ostream& out, const std::string& content) {
  if (o.output.empty()) {
    out << content;
  } else {
    write_file(o.output, content);
  }
}

int cmd_scale(const Options& o, std::ostream& out) {
  require_format(o);
  const auto data = load_input(o);
  const auto cfg = estimator_config(o, data.stimulus_labels());
  const auto rep = scale(data, cfg);
  emit(o, out, o.format == "csv" ? report::scale_csv(rep) : report::render(report::to_json(rep)));
  return kSuccess;
}

int cmd_diagnose(const Options& o, std::ostream& out) {
  require_format(o);
  const auto data = load_input(o);
  EstimatorConfig cfg;
  cfg.threads = std::max(o.threads, 1u);
  const auto diag = diagnose(data, cfg);
  emit(o, out,
       o.format == "csv" ? report::diagnose_csv(diag) : report::render(report::to_json(diag)));
  return kSuccess;
}

int cmd_bootstrap(const Options& o, std::ostream& out) {
  require_format(o);
  const auto data = load_input(o);
  const auto cfg = estimator_config(o, data.stimulus_labels());
  const std::size_t b = o.replicates == 0 ? 200 : o.replicates;
  const auto result = bootstrap_ci(data, cfg, b, resolve_seed(o), o.level);
  emit(o, out,
       o.format == "csv" ? report::bootstrap_csv(result) : report::render(report::to_json(result)));
  return kSuccess;
}

// Like run_hetero_experiment, but keeps the original exception so the exit
// code and message survive after the record has been written.
std::pair<HeteroRecord, std::exception_ptr> compare_simulated(const SimConfig& sim,
                                                              const SimData& data,
                                                              const EstimatorConfig& cfg) {
  HeteroRecord record;
  record.config = sim;
  std::exception_ptr failure;
  try {
    record.comparison = compare_estimators(data, cfg);
  } catch (const ScalingError& e) {
    if (!e.is_estimation_failure()) throw;
    record.failure = std::string(to_string(e.code())) + ": " + e.what();
    failure = std::current_exception();
  }
  return {std::move(record), failure};
}

int cmd_simulate(const Options& o, std::ostream& out) {
  require_format(o);
  const auto sim = sim_config(o);
  const auto cfg = estimator_config(o, sim_labels(sim));
  const auto data = generate(sim);
  auto [record, failure] = compare_simulated(sim, data, cfg);

  const std::string summary = o.format == "csv"
                                  ? report::comparison_csv(record, nullptr)
                                  : report::render(report::comparison_json(record, nullptr));
  if (o.output.empty()) {
    out << summary;
  } else {
    write_file(o.output + "_placements.csv", to_csv(data.placements));
    write_file(o.output + "_truth.csv",
               report::truth_csv(data.placements.stimulus_labels(), data.truth_y));
    write_file(o.output + (o.format == "csv" ? "_comparison.csv" : "_comparison.json"), summary);
  }
  if (failure) std::rethrow_exception(failure);
  return kSuccess;
}

int cmd_compare(const Options& o, std::ostream& out) {
  require_format(o);
  if (!o.input.empty()) {
    const auto data = load_input(o);
    const auto cfg = estimator_config(o, data.stimulus_labels());
    const auto cmp = compare_without_truth(data, cfg);
    emit(o, out,
         o.format == "csv" ? report::comparison_csv(cmp)
                           : report::render(report::comparison_json(cmp)));
    return kSuccess;
  }

  const auto sim = sim_config(o);
  const auto cfg = estimator_config(o, sim_labels(sim));
  auto [record, failure] = compare_simulated(sim, generate(sim), cfg);
  std::optional<BinReplications> bin;
  const std::size_t replicates = o.replicates == 0 ? 1 : o.replicates;
  if (!record.failure && replicates >= 2) bin = run_bin_replications(sim, replicates, cfg);

  const BinReplications* bin_ptr = bin ? &*bin : nullptr;
  emit(o, out,
       o.format == "csv" ? report::comparison_csv(record, bin_ptr)
                         : report::render(report::comparison_json(record, bin_ptr)));
  if (bin && !o.replicate_csv.empty()) {
    write_file(o.replicate_csv, report::replicate_correlations_csv(*bin));
  }
  if (failure) std::rethrow_exception(failure);
  return kSuccess;
}

int cmd_bam(const Options& o, std::ostream& out) {
  const auto data = load_input(o);
  BamConfig cfg = o.bam;
  cfg.polarity_index = resolve_polarity(o, data.stimulus_labels());
  cfg.threads = std::max(o.threads, 1u);
  const auto sol = bam_als(data, cfg);
  emit(o, out, report::render(report::to_json(sol, data.stimulus_labels())));
  if (!sol.converged) {
    throw ScalingError(ErrorCode::not_identified,
                       "BAM estimation did not converge within " +
                           std::to_string(cfg.max_iterations) + " iterations");
  }
  return kSuccess;
}

void add_estimator_flags(CLI::App* sub, Options& o) {
  sub->add_option("--method", o.method, "Projector computation: naive or qr")
      ->check(CLI::IsMember({"naive", "qr"}));
  sub->add_option("--polarity", o.polarity, "Stimulus (label or index) placed on the negative side");
  sub->add_flag("--retain-degenerate", o.retain_flag,
                "Keep constant-row respondents as rank-1 projectors (qr only, default)");
  sub->add_flag("--drop-degenerate", o.drop_flag, "Drop constant-row respondents");
}

void add_input_flags(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "Placements CSV")->required();
  sub->add_option("--id-column", o.id_column, "Respondent id column (default: 'id' if present)");
  sub->add_option("--self-column", o.self_column,
                  "Self-placement column (default: 'self' if present)");
  sub->add_option("--delimiter", o.delimiter, "Field delimiter");
}

void add_sim_flags(CLI::App* sub, Options& o) {
  sub->add_option("--n", o.sim.n, "Respondents");
  sub->add_option("--j", o.sim.j, "Stimuli");
  sub->add_option("--sd-min", o.sim.sd_min, "Lower bound of respondent error sd");
  sub->add_option("--sd-max", o.sim.sd_max, "Upper bound of respondent error sd");
  sub->add_option("--w-min", o.sim.w_min, "Lower bound of respondent weights");
  sub->add_option("--w-max", o.sim.w_max, "Upper bound of respondent weights");
  sub->add_option("--c-sd", o.sim.c_sd, "Sd of respondent intercepts");
  sub->add_option("--degenerates", o.sim.degenerate_count, "Extra constant-row respondents");
  sub->add_option("--rationalization", o.sim.rationalization_shift,
                  "Exploratory rationalization shift (0 disables)");
}

void add_common_flags(CLI::App* sub, Options& o) {
  sub->add_option("--output", o.output, "Output file (simulate: path prefix); default stdout");
  sub->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--threads", o.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Aldrich-McKelvey scaling, identification diagnostics and simulation"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed_value = 0;

  auto* scale_cmd = app.add_subcommand("scale", "Estimate stimulus positions from a CSV");
  add_input_flags(scale_cmd, o);
  add_estimator_flags(scale_cmd, o);
  add_common_flags(scale_cmd, o);

  auto* sim_cmd = app.add_subcommand("simulate", "Generate data and compare AM with the means");
  add_sim_flags(sim_cmd, o);
  add_estimator_flags(sim_cmd, o);
  add_common_flags(sim_cmd, o);
  sim_cmd->add_option("--seed", seed_value, "Seed (falls back to AMSCALE_SEED, then 1234)");

  auto* cmp_cmd = app.add_subcommand("compare", "AM vs mean vs median with BIN statistics");
  cmp_cmd->add_option("--input", o.input, "Real placements CSV (no truth available)");
  cmp_cmd->add_option("--id-column", o.id_column, "Respondent id column");
  cmp_cmd->add_option("--self-column", o.self_column, "Self-placement column");
  cmp_cmd->add_option("--delimiter", o.delimiter, "Field delimiter");
  add_sim_flags(cmp_cmd, o);
  add_estimator_flags(cmp_cmd, o);
  add_common_flags(cmp_cmd, o);
  cmp_cmd->add_option("--seed", seed_value, "Seed (falls back to AMSCALE_SEED, then 1234)");
  cmp_cmd->add_option("--replicates", o.replicates, "Replications for BIN statistics (>= 2)");
  cmp_cmd->add_option("--replicate-csv", o.replicate_csv,
                      "Also write per-replicate correlations to this CSV");

  auto* diag_cmd = app.add_subcommand("diagnose", "Identification diagnostics for a CSV");
  add_input_flags(diag_cmd, o);
  add_common_flags(diag_cmd, o);

  auto* boot_cmd = app.add_subcommand("bootstrap", "Percentile intervals by resampling respondents");
  add_input_flags(boot_cmd, o);
  add_estimator_flags(boot_cmd, o);
  add_common_flags(boot_cmd, o);
  boot_cmd->add_option("--seed", seed_value, "Seed (falls back to AMSCALE_SEED, then 1234)");
  boot_cmd->add_option("--replicates", o.replicates, "Bootstrap replicates (>= 100, default 200)");
  boot_cmd->add_option("--level", o.level, "Interval level in (0, 1)");

  auto* bam_cmd = app.add_subcommand("bam", "BAM parameterization by alternating least squares");
  add_input_flags(bam_cmd, o);
  bam_cmd->add_option("--polarity", o.polarity, "Stimulus placed on the negative side");
  bam_cmd->add_option("--max-iterations", o.bam.max_iterations, "Iteration cap");
  bam_cmd->add_option("--tolerance", o.bam.convergence_tolerance, "Max position change at stop");
  bam_cmd->add_option("--min-placements", o.bam.min_placements,
                      "Respondents with fewer observed placements are excluded");
  bam_cmd->add_option("--output", o.output, "Output file; default stdout");
  bam_cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  for (auto* sub : {sim_cmd, cmp_cmd, boot_cmd}) {
    if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed_value;
  }

  try {
    if (scale_cmd->parsed()) return cmd_scale(o, out);
    if (sim_cmd->parsed()) return cmd_simulate(o, out);
    if (cmp_cmd->parsed()) return cmd_compare(o, out);
    if (diag_cmd->parsed()) return cmd_diagnose(o, out);
    if (boot_cmd->parsed()) return cmd_bootstrap(o, out);
    if (bam_cmd->parsed()) return cmd_bam(o, out);
  } catch (const ScalingError& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.is_estimation_failure() ? kEstimationFailure : kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}

}  // namespace amscale::cli
