#include "auditplan/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "auditplan/planner.hpp"
#include "auditplan/population.hpp"
#include "auditplan/selector.hpp"
#include "auditplan/simlab.hpp"
#include "auditplan/stratify.hpp"
#include "auditplan/variance.hpp"

namespace auditplan {

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Output rendering

struct Table {
  std::string command;
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
};

std::string full_precision(const json& v) {
  if (v.is_number_float()) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v.get<double>());
    return buffer;
  }
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "NA";
  return v.dump();
}

std::string human_value(const json& v) {
  if (v.is_number_float()) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.6g", v.get<double>());
    return buffer;
  }
  return full_precision(v);
}

void render(const Table& table, const std::string& format, std::ostream& out) {
  if (format == "json") {
    json doc;
    doc["command"] = table.command;
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj;
      for (std::size_t c = 0; c < table.columns.size(); ++c) obj[table.columns[c]] = row[c];
      rows.push_back(std::move(obj));
    }
    doc["rows"] = std::move(rows);
    out << doc.dump(2) << '\n';
    return;
  }
  if (format == "delimited") {
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      out << (c ? "\t" : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "\t" : "") << full_precision(row[c]);
      out << '\n';
    }
    return;
  }
  // human: aligned "name: value" blocks per row
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows.size() > 1) out << "-- " << table.command << " row " << (r + 1) << " --\n";
    std::size_t width = 0;
    for (const auto& name : table.columns) width = std::max(width, name.size());
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << "  " << table.columns[c] << std::string(width - table.columns[c].size() + 1, ' ')
          << human_value(table.rows[r][c]) << '\n';
    }
  }
}

void emit(const Table& table, const std::string& format, const std::string& out_path,
          std::ostream& out) {
  if (out_path.empty()) {
    render(table, format, out);
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ParseError(0, "cannot open output file: " + out_path);
  render(table, format, file);
}

std::string cents_string(Cents cents) {
  char buffer[48];
  std::snprintf(buffer, sizeof buffer, "%lld.%02lld", static_cast<long long>(cents / 100),
                static_cast<long long>(cents % 100));
  return buffer;
}

// ---------------------------------------------------------------------------
// Shared option handling

struct CommonOpts {
  std::string input;
  std::string format = "plain";
  std::uint64_t pop_seed = 1;
  std::string out_path;
  std::string out_format = "human";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--input", opts.input,
                  "claims file, or synth:edwards / synth:neter for a generated population")
      ->required();
  cmd->add_option("--format", opts.format, "input file format")
      ->check(CLI::IsMember({"plain", "run-length"}));
  cmd->add_option("--pop-seed", opts.pop_seed, "seed for synth: inputs");
  cmd->add_option("--out", opts.out_path, "write the report here instead of stdout");
  cmd->add_option("--out-format", opts.out_format, "report rendering")
      ->check(CLI::IsMember({"human", "delimited", "json"}));
}

ClaimPopulation load_input(const CommonOpts& opts) {
  if (opts.input == "synth:edwards") return make_edwards_like(opts.pop_seed);
  if (opts.input == "synth:neter") return make_neter_like(opts.pop_seed);
  const auto format =
      opts.format == "plain" ? ClaimFileFormat::plain : ClaimFileFormat::run_length;
  return ClaimPopulation::load_file(opts.input, format);
}

std::vector<double> parse_grid(const std::string& text) {
  double lo = 0, hi = 0, step = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &extra) != 3)
    throw UsageError("--pi-grid expects lo:hi:step");
  if (!(step > 0) || lo > hi) throw UsageError("--pi-grid needs lo <= hi and step > 0");
  if (lo < 0 || hi > 1) throw UsageError("--pi-grid rates must lie in [0,1]");
  std::vector<double> grid;
  const auto steps = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::int64_t i = 0; i <= steps; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

PartialErrorSpec parse_partial(const std::string& text, std::int64_t population) {
  double pt = 0, pp = 0, q = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &pt, &pp, &q, &extra) != 3)
    throw UsageError("--partial expects totalRate,partialRate,q");
  try {
    return PartialErrorSpec::from_rates(population, pt, pp, q);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
}

struct ScenarioChoice {
  std::string label;
  ScenarioSpec spec;
};

ScenarioChoice parse_scenario(const std::string& text) {
  ScenarioChoice out;
  out.label = text;
  out.spec.fraction = PartialFraction::uniform(0.2, 0.8);
  if (text == "1") { out.spec.full_fraction = 1.0; return out; }
  if (text == "2") { out.spec.full_fraction = 0.2; return out; }
  if (text == "3") { out.spec.full_fraction = 0.5; return out; }
  if (text == "4") { out.spec.full_fraction = 0.8; return out; }

  bool have_full = false;
  std::optional<double> q_fixed, q_lo, q_hi;
  std::stringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw UsageError("bad --scenario field: " + field);
    const std::string key = field.substr(0, eq);
    const double value = std::atof(field.c_str() + eq + 1);
    if (key == "full") { out.spec.full_fraction = value; have_full = true; }
    else if (key == "q") q_fixed = value;
    else if (key == "qlo") q_lo = value;
    else if (key == "qhi") q_hi = value;
    else throw UsageError("unknown --scenario key: " + key);
  }
  if (!have_full) throw UsageError("--scenario needs full=<fraction> (or a preset 1-4)");
  if (q_fixed) out.spec.fraction = PartialFraction::fixed(*q_fixed);
  else if (q_lo && q_hi) out.spec.fraction = PartialFraction::uniform(*q_lo, *q_hi);
  else if (q_lo || q_hi) throw UsageError("--scenario needs both qlo and qhi");
  return out;
}

std::string fraction_label(const PartialFraction& f) {
  char buffer[64];
  if (f.is_fixed()) std::snprintf(buffer, sizeof buffer, "q=%g", f.lo);
  else std::snprintf(buffer, sizeof buffer, "q~U(%g,%g)", f.lo, f.hi);
  return buffer;
}

std::string join_warnings(const std::vector<std::string>& warnings) {
  std::string out;
  for (const auto& w : warnings) {
    if (!out.empty()) out += "; ";
    out += w;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_summarize(const CommonOpts& common, std::ostream& out) {
  const ClaimPopulation pop = load_input(common);
  const PopulationMoments m = moments(pop);
  Table table;
  table.command = "summarize";
  table.columns = {"n", "unique_values", "total", "mean", "variance", "mean_sq",
                   "total_sq", "cov_x_x2", "var_x2", "skewness"};
  table.rows.push_back({m.n, pop.unique_values(), cents_string(pop.total_cents()), m.mean,
                        m.variance, m.mean_sq, m.total_sq, m.cov_x_x2, m.var_x2, m.skewness});
  emit(table, common.out_format, common.out_path, out);
  return kExitOk;
}

struct PlanOpts {
  double margin = 0;
  double confidence = 0.90;
  std::string estimator = "simple_expansion";
  double pi = -1;
  std::string pi_grid;
  bool conservative = false;
  std::string partial;
  bool partial_exact = false;
  bool partial_conservative = false;
};

int cmd_plan(const CommonOpts& common, const PlanOpts& opts, std::ostream& out) {
  const int sources = (opts.pi >= 0) + !opts.pi_grid.empty() + opts.conservative +
                      !opts.partial.empty() + opts.partial_conservative;
  if (sources != 1)
    throw UsageError(
        "choose exactly one of --pi, --pi-grid, --conservative, --partial, "
        "--partial-conservative");
  const EstimatorKind kind = opts.estimator == "ratio" ? EstimatorKind::ratio
                                                       : EstimatorKind::simple_expansion;
  if (kind == EstimatorKind::ratio && (!opts.partial.empty() || opts.partial_conservative))
    throw UsageError(
        "partial-error planning is unavailable under ratio estimation; use `simulate` to study "
        "partial errors");

  const ClaimPopulation pop = load_input(common);

  Table table;
  table.command = "plan";
  table.columns = {"pi", "method", "variance", "n", "achieved_margin", "conservative", "warnings"};
  const auto add_row = [&](const json& pi_cell, const SamplePlan& plan) {
    table.rows.push_back({pi_cell, to_string(plan.variance_used.method),
                          plan.variance_used.value, plan.n, plan.achieved_margin,
                          plan.conservative, join_warnings(plan.warnings)});
  };

  PlanRequest request;
  request.margin = opts.margin;
  request.confidence = opts.confidence;
  request.estimator = kind;

  if (!opts.pi_grid.empty()) {
    for (double pi : parse_grid(opts.pi_grid)) {
      request.source = GivenRate{ErrorRate::of(pi)};
      add_row(pi, plan(pop, request));
    }
    request.source = ConservativeRate{};
    add_row("conservative", plan(pop, request));
  } else if (opts.pi >= 0) {
    request.source = GivenRate{ErrorRate::of(opts.pi)};
    add_row(opts.pi, plan(pop, request));
  } else if (opts.conservative) {
    request.source = ConservativeRate{};
    add_row("conservative", plan(pop, request));
  } else if (opts.partial_conservative) {
    request.source = ConservativePartial{};
    add_row("partial-conservative", plan(pop, request));
  } else {
    request.source = PartialSource{parse_partial(opts.partial, pop.size()), opts.partial_exact};
    add_row(opts.partial, plan(pop, request));
  }
  emit(table, common.out_format, common.out_path, out);
  return kExitOk;
}

struct ChooseOpts {
  double pi = -1;
  std::string pi_grid;
  double threshold = 0.5;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_choose(const CommonOpts& common, const ChooseOpts& opts, std::ostream& out) {
  if ((opts.pi >= 0) == !opts.pi_grid.empty())
    throw UsageError("choose exactly one of --pi, --pi-grid");
  if (opts.replicates > 0 && !opts.seed_given)
    throw UsageError("--seed is required when --replicates is given");

  const ClaimPopulation pop = load_input(common);
  std::vector<double> grid =
      opts.pi_grid.empty() ? std::vector<double>{opts.pi} : parse_grid(opts.pi_grid);

  Table table;
  table.command = "choose";
  table.columns = {"pi", "error_count", "mean_g", "var_g", "prob_normal", "prob_mc",
                   "degenerate", "recommendation"};
  SelectorOptions options;
  options.threshold = opts.threshold;
  options.mc_replicates = opts.replicates;
  options.seed = opts.seed;
  for (double pi : grid) {
    if (pi <= 0) {  // criterion undefined with no errors
      table.rows.push_back({pi, 0, nullptr, nullptr, nullptr, nullptr, true, "undefined"});
      continue;
    }
    const SelectorReport report = select_estimator(pop, ErrorRate::of(pi), options);
    table.rows.push_back({pi, report.error_count, report.mean_g, report.var_g,
                          report.prob_normal,
                          report.prob_mc ? json(*report.prob_mc) : json(nullptr),
                          report.degenerate, to_string(report.recommendation)});
  }
  emit(table, common.out_format, common.out_path, out);
  return kExitOk;
}

struct StratifyOpts {
  double pi = -1;
  std::string pi_grid;
  std::string estimator = "simple_expansion";
  bool no_run_split = false;
  int bins = 100;
  std::int64_t n = 100;
  double margin = 0;
  double confidence = 0.90;
};

int cmd_stratify(const CommonOpts& common, const StratifyOpts& opts, std::ostream& out) {
  if ((opts.pi >= 0) == !opts.pi_grid.empty())
    throw UsageError("choose exactly one of --pi, --pi-grid");
  const EstimatorKind kind = opts.estimator == "ratio" ? EstimatorKind::ratio
                                                       : EstimatorKind::simple_expansion;
  const std::vector<double> grid =
      opts.pi_grid.empty() ? std::vector<double>{opts.pi} : parse_grid(opts.pi_grid);
  for (double pi : grid) {
    if (!(pi > 0) || (kind == EstimatorKind::ratio ? pi >= 1 : pi > 1))
      throw UsageError(kind == EstimatorKind::ratio
                           ? "stratify with the ratio estimator needs rates in (0,1)"
                           : "stratify needs rates in (0,1]");
  }
  const ClaimPopulation pop = load_input(common);

  std::optional<std::vector<Boundary>> rule_boundary;
  try {
    rule_boundary = cum_sqrt_f(pop, 2, opts.bins);
  } catch (const std::domain_error&) {
    rule_boundary = std::nullopt;  // degenerate histogram; comparison column goes NA
  }

  Table table;
  table.command = "stratify";
  table.columns = {"pi",          "boundary_amount", "split_count", "n1_units", "n2_units",
                   "sigma_y1",    "sigma_y2",        "objective",   "n",        "n1",
                   "n2",          "se_optimal",      "se_cum_sqrt_f", "se_srs",
                   "achieved_margin", "degenerate"};
  for (double pi : grid) {
    const ErrorRate rate = ErrorRate::of(pi);
    const Stratification best = optimal_two_strata(pop, rate, kind, !opts.no_run_split);

    std::int64_t n = opts.n;
    json achieved = nullptr;
    Allocation alloc;
    if (opts.margin > 0) {
      const StratifiedPlan sized = stratified_sample_size(best, opts.margin, opts.confidence);
      n = sized.n;
      alloc = sized.allocation;
      achieved = sized.achieved_margin;
    } else {
      alloc = optimal_allocation(best.strata, std::min(n, pop.size()));
      n = std::min(n, pop.size());
    }
    enforce_allocation_floor(alloc, best.strata);

    json se_rule = nullptr;
    if (rule_boundary) {
      const Stratification rule =
          make_stratification(pop, rule_boundary->front(), rate, kind);
      se_rule = n > 0 ? json(rule.se_for(n)) : json(nullptr);
    }
    const double amount =
        dollars(pop.entries()[best.boundary.entry_index].amount_cents);
    table.rows.push_back({pi, amount, best.boundary.take_count, best.strata[0].n_units,
                          best.strata[1].n_units, best.strata[0].sigma_y, best.strata[1].sigma_y,
                          best.objective, n, alloc.n_h[0], alloc.n_h[1],
                          n > 0 ? json(best.se_for(n)) : json(nullptr), se_rule,
                          n > 0 ? json(srs_objective(pop, rate, kind) /
                                       std::sqrt(static_cast<double>(n)))
                                : json(nullptr),
                          achieved, best.degenerate});
  }
  emit(table, common.out_format, common.out_path, out);
  return kExitOk;
}

struct SimulateOpts {
  std::string experiment = "bands";
  std::vector<std::string> scenarios;
  std::string pi_grid;
  double pi = -1;
  std::int64_t n = 0;
  std::string estimator = "simple_expansion";
  double confidence = 0.90;
  std::int64_t replicates = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int cmd_simulate(const CommonOpts& common, const SimulateOpts& opts, std::ostream& out) {
  if (!opts.seed_given) throw UsageError("--seed is required for simulate");
  if (opts.replicates < 1) throw UsageError("--replicates must be at least 1");
  const ClaimPopulation pop = load_input(common);

  if (opts.experiment == "bands") {
    if (opts.pi_grid.empty()) throw UsageError("bands needs --pi-grid with the error rates");
    std::vector<std::string> labels;
    std::vector<ScenarioSpec> specs;
    const std::vector<std::string> wanted =
        opts.scenarios.empty() ? std::vector<std::string>{"1", "2", "3", "4"} : opts.scenarios;
    for (const auto& text : wanted) {
      ScenarioChoice choice = parse_scenario(text);
      labels.push_back(choice.label);
      specs.push_back(choice.spec);
    }
    const std::vector<double> rates = parse_grid(opts.pi_grid);
    const auto rows =
        ratio_variance_bands(pop, specs, rates, opts.replicates, opts.seed);

    Table table;
    table.command = "simulate";
    table.columns = {"scenario", "full_fraction", "partial_q", "rate",
                     "mean_sigma_r2", "p05", "p95", "replicates"};
    for (const BandRow& row : rows) {
      table.rows.push_back({labels[row.scenario], specs[row.scenario].full_fraction,
                            fraction_label(specs[row.scenario].fraction), row.rate, row.mean,
                            row.p05, row.p95, opts.replicates});
    }
    emit(table, common.out_format, common.out_path, out);
    return kExitOk;
  }

  if (opts.experiment != "coverage") throw UsageError("--experiment must be bands or coverage");
  if (opts.n < 2) throw UsageError("coverage needs --n >= 2");
  ErrorModel model = AllOrNothingModel{0};
  std::string model_label;
  if (!opts.scenarios.empty()) {
    if (opts.scenarios.size() != 1 || opts.pi < 0)
      throw UsageError("coverage takes one --scenario plus --pi for the overall rate");
    ScenarioChoice choice = parse_scenario(opts.scenarios.front());
    choice.spec.overall_rate = opts.pi;
    model = choice.spec;
    model_label = "scenario " + choice.label;
  } else {
    if (opts.pi < 0) throw UsageError("coverage needs --pi (and optionally --scenario)");
    model = AllOrNothingModel{opts.pi};
    model_label = "all-or-nothing";
  }
  const EstimatorKind kind = opts.estimator == "ratio" ? EstimatorKind::ratio
                                                       : EstimatorKind::simple_expansion;
  const CoverageResult result = coverage_experiment(pop, model, opts.n, kind, opts.confidence,
                                                    opts.replicates, opts.seed);
  Table table;
  table.command = "simulate";
  table.columns = {"model", "pi", "estimator", "n", "confidence", "replicates",
                   "coverage", "mean_halfwidth"};
  table.rows.push_back({model_label, opts.pi, to_string(kind), opts.n, opts.confidence,
                        result.replicates, result.coverage, result.mean_halfwidth});
  emit(table, common.out_format, common.out_path, out);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Audit sample design toolkit: variance estimates, sample sizes, estimator "
               "choice, two-strata designs, and simulation experiments for claim populations"};
  app.require_subcommand(1);

  CommonOpts common;
  PlanOpts plan_opts;
  ChooseOpts choose_opts;
  StratifyOpts stratify_opts;
  SimulateOpts simulate_opts;

  CLI::App* summarize = app.add_subcommand("summarize", "population size, totals, and moments");
  add_common(summarize, common);

  CLI::App* plan_cmd = app.add_subcommand("plan", "sample size for a target margin of error");
  add_common(plan_cmd, common);
  plan_cmd->add_option("--margin", plan_opts.margin, "target margin of error, dollars")
      ->required()
      ->check(CLI::PositiveNumber);
  plan_cmd->add_option("--confidence", plan_opts.confidence, "confidence level, e.g. 0.90")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  plan_cmd->add_option("--estimator", plan_opts.estimator, "estimator to plan for")
      ->check(CLI::IsMember({"simple_expansion", "ratio"}));
  plan_cmd->add_option("--pi", plan_opts.pi, "known error rate")->check(CLI::Range(0.0, 1.0));
  plan_cmd->add_option("--pi-grid", plan_opts.pi_grid, "error-rate grid lo:hi:step");
  plan_cmd->add_flag("--conservative", plan_opts.conservative,
                     "size for the rate that maximizes the variance");
  plan_cmd->add_option("--partial", plan_opts.partial,
                       "partial-error spec totalRate,partialRate,q");
  plan_cmd->add_flag("--partial-exact", plan_opts.partial_exact,
                     "use the exact partial-error variance instead of its bound");
  plan_cmd->add_flag("--partial-conservative", plan_opts.partial_conservative,
                     "worst case over all partial-error specs");

  CLI::App* choose_cmd =
      app.add_subcommand("choose", "confidence that ratio estimation beats simple expansion");
  add_common(choose_cmd, common);
  choose_cmd->add_option("--pi", choose_opts.pi, "error rate")->check(CLI::Range(0.0, 1.0));
  choose_cmd->add_option("--pi-grid", choose_opts.pi_grid, "error-rate grid lo:hi:step");
  choose_cmd->add_option("--threshold", choose_opts.threshold, "recommendation threshold");
  choose_cmd->add_option("--replicates", choose_opts.replicates,
                         "Monte Carlo replicates (adds the prob_mc column)");
  choose_cmd->add_option("--seed", choose_opts.seed, "Monte Carlo seed")
      ->each([&](const std::string&) { choose_opts.seed_given = true; });

  CLI::App* stratify_cmd = app.add_subcommand("stratify", "optimal two-stratum design");
  add_common(stratify_cmd, common);
  stratify_cmd->add_option("--pi", stratify_opts.pi, "error rate")->check(CLI::Range(0.0, 1.0));
  stratify_cmd->add_option("--pi-grid", stratify_opts.pi_grid, "error-rate grid lo:hi:step");
  stratify_cmd->add_option("--estimator", stratify_opts.estimator, "estimator kind")
      ->check(CLI::IsMember({"simple_expansion", "ratio"}));
  stratify_cmd->add_flag("--no-run-split", stratify_opts.no_run_split,
                         "only place boundaries between distinct amounts");
  stratify_cmd->add_option("--bins", stratify_opts.bins,
                           "histogram bins for the cum sqrt(f) comparison")
      ->check(CLI::PositiveNumber);
  stratify_cmd->add_option("--n", stratify_opts.n, "total sample size for the SE columns")
      ->check(CLI::PositiveNumber);
  stratify_cmd->add_option("--margin", stratify_opts.margin,
                           "size the sample for this margin instead of --n");
  stratify_cmd->add_option("--confidence", stratify_opts.confidence, "confidence level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));

  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Monte Carlo experiments on realized audits");
  add_common(simulate_cmd, common);
  simulate_cmd->add_option("--experiment", simulate_opts.experiment, "bands or coverage")
      ->check(CLI::IsMember({"bands", "coverage"}));
  simulate_cmd->add_option("--scenario", simulate_opts.scenarios,
                           "preset 1-4 or full=F[,q=V|,qlo=A,qhi=B]; repeatable");
  simulate_cmd->add_option("--pi-grid", simulate_opts.pi_grid, "error-rate grid lo:hi:step");
  simulate_cmd->add_option("--pi", simulate_opts.pi, "error rate (coverage model)")
      ->check(CLI::Range(0.0, 1.0));
  simulate_cmd->add_option("--n", simulate_opts.n, "sample size per replicate (coverage)");
  simulate_cmd->add_option("--estimator", simulate_opts.estimator, "estimator kind (coverage)")
      ->check(CLI::IsMember({"simple_expansion", "ratio"}));
  simulate_cmd->add_option("--confidence", simulate_opts.confidence, "confidence level")
      ->check(CLI::Range(1e-6, 1.0 - 1e-6));
  simulate_cmd->add_option("--replicates", simulate_opts.replicates, "replicates per cell");
  simulate_cmd->add_option("--seed", simulate_opts.seed, "experiment seed")
      ->each([&](const std::string&) { simulate_opts.seed_given = true; });

  std::vector<const char*> argv;
  argv.push_back("auditplan");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (summarize->parsed()) return cmd_summarize(common, out);
    if (plan_cmd->parsed()) return cmd_plan(common, plan_opts, out);
    if (choose_cmd->parsed()) return cmd_choose(common, choose_opts, out);
    if (stratify_cmd->parsed()) return cmd_stratify(common, stratify_opts, out);
    if (simulate_cmd->parsed()) return cmd_simulate(common, simulate_opts, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace auditplan
