#include "modsig/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "modsig/error.hpp"
#include "modsig/graph.hpp"
#include "modsig/io.hpp"
#include "modsig/likelihood.hpp"
#include "modsig/modularity.hpp"
#include "modsig/null_model.hpp"
#include "modsig/report.hpp"
#include "modsig/sim.hpp"

namespace modsig {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

struct InputOptions {
  std::string edges;
  std::string gml;
  bool drop_self_loops = false;
};

struct Loaded {
  Graph graph;
  std::optional<CovariateTable> gml_covariates;
  std::vector<std::string> warnings;
};

void add_input_options(CLI::App* cmd, InputOptions& in) {
  auto* edges = cmd->add_option("--edges", in.edges, "Edge list (u<TAB>v[<TAB>weight])");
  auto* gml = cmd->add_option("--gml", in.gml, "Graph in minimal GML");
  edges->excludes(gml);
  cmd->add_flag("--drop-self-loops", in.drop_self_loops, "Discard self-loops instead of failing");
}

Loaded load_graph(const InputOptions& in) {
  const SelfLoopPolicy policy = in.drop_self_loops ? SelfLoopPolicy::drop : SelfLoopPolicy::reject;
  Loaded out;
  if (!in.edges.empty()) {
    out.graph = read_edge_list(in.edges, policy);
  } else if (!in.gml.empty()) {
    GmlDocument doc = read_gml(in.gml, policy);
    out.graph = std::move(doc.graph);
    out.gml_covariates = std::move(doc.covariates);
    out.warnings = std::move(doc.warnings);
  } else {
    throw UsageError("one of --edges or --gml is required");
  }
  return out;
}

Family require_family(const std::string& name, bool clt_only) {
  const auto f = parse_family(name);
  if (!f || (clt_only && *f != Family::bernoulli && *f != Family::poisson && *f != Family::negbin)) {
    throw UsageError("unsupported --model '" + name + "'");
  }
  return *f;
}

ModelBlock model_block(const Graph& g, const FitResult& fit) {
  ModelBlock b;
  b.family = fit.model.family;
  if (fit.model.has_shape()) b.r = fit.model.r;
  if (fit.model.is_zero_inflated()) b.omega = fit.model.omega;
  b.log_likelihood = fit.log_likelihood;
  b.r_at_upper_cap = fit.r_at_upper_cap;
  if (fit.model.family != Family::bernoulli && g.has_integer_weights()) {
    b.deviance = std::max(0.0, 2.0 * (saturated_log_likelihood(g) - fit.log_likelihood));
  }
  return b;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const ReportDocument& doc, const std::string& path, std::ostream& out) {
  const std::string text = serialize_report(doc);
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write '" + path + "'");
  file << text;
}

struct TestCommand {
  InputOptions input;
  std::string covariates;
  std::vector<std::string> columns;
  std::string model = "bernoulli";
  std::optional<double> r;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string csv;
  std::optional<double> bonferroni;
  bool drop_missing = false;
  bool lenient = false;
  bool timestamp = false;
};

void add_test_options(CLI::App* cmd, TestCommand& t, bool bootstrap_required) {
  add_input_options(cmd, t.input);
  cmd->add_option("--covariates", t.covariates, "CSV with header; first column is the node label");
  cmd->add_option("--column", t.columns, "Covariate column defining the groups (repeatable)")
      ->required();
  cmd->add_option("--model", t.model, "bernoulli | poisson | negbin")->capture_default_str();
  cmd->add_option("--r", t.r, "Fixed negative binomial shape (default: maximum likelihood)")
      ->check(CLI::PositiveNumber);
  auto* b = cmd->add_option(bootstrap_required ? "--replicates" : "--bootstrap", t.bootstrap,
                            "Parametric bootstrap replicates");
  if (bootstrap_required) {
    t.bootstrap = 10000;
    b->capture_default_str();
  }
  cmd->add_option("--seed", t.seed, "Random seed")->capture_default_str();
  cmd->add_option("--out", t.out, "Write the JSON report here instead of stdout");
  cmd->add_option("--csv", t.csv, "Also write a CSV summary row per covariate");
  cmd->add_option("--bonferroni", t.bonferroni, "Multiply reported p-values by M (capped at 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--drop-missing", t.drop_missing,
                "Restrict to nodes with a covariate value instead of failing");
  cmd->add_flag("--lenient", t.lenient,
                "Drop isolated nodes and clamp infeasible Bernoulli means, with warnings");
  cmd->add_flag("--timestamp", t.timestamp, "Record the creation time in the report");
}

int run_test(const TestCommand& t, const std::string& command, std::ostream& out) {
  const Family family = require_family(t.model, true);
  Loaded loaded = load_graph(t.input);
  const Graph& g = loaded.graph;

  std::optional<CovariateTable> table;
  if (!t.covariates.empty()) {
    table = read_covariate_table(t.covariates);
  } else if (loaded.gml_covariates) {
    table = std::move(loaded.gml_covariates);
  } else {
    throw UsageError("--covariates is required unless the graph is read from --gml");
  }

  ReportDocument doc;
  doc.command = command;
  doc.graph = summarize_graph(g);
  doc.warnings = loaded.warnings;
  if (t.bootstrap > 0) doc.seed = t.seed;
  if (t.timestamp) doc.created = utc_now();

  TestOptions options;
  options.isolated = t.lenient ? IsolatedPolicy::drop : IsolatedPolicy::strict;
  options.clamp_bernoulli = t.lenient;

  // The edge model is fitted once on the full graph and shared by all covariates.
  const PiEstimate active = estimate_pi(g, options.isolated);
  const Graph fit_graph = active.kept.size() == g.num_nodes() ? g : g.induced(active.kept);
  FitResult fit;
  if (family == Family::negbin && t.r) {
    fit.model = EdgeModel::negbin(*t.r);
    fit.log_likelihood = log_likelihood(fit_graph, fit.model);
  } else {
    FitOptions fit_options;
    fit_options.clamp_bernoulli = t.lenient;
    fit = fit_edge_model(fit_graph, family, fit_options);
  }
  if (family == Family::negbin) options.r = fit.model.r;
  doc.model = model_block(fit_graph, fit);
  doc.diagnostics = to_block(check_assumptions(g, fit.model, nullptr, options.thresholds));

  const MissingPolicy missing = t.drop_missing ? MissingPolicy::drop : MissingPolicy::strict;
  for (const std::string& column : t.columns) {
    AssignmentSelection sel = assign_from_table(*table, column, g, missing);
    const bool restricted = sel.kept.size() != g.num_nodes();
    const Graph sub = restricted ? g.induced(sel.kept) : Graph();
    const Graph& tg = restricted ? sub : g;

    options.covariate_name = column;
    ModularityReport rep = significance_test(tg, sel.assignment, family, options);
    rep.warnings.insert(rep.warnings.begin(), sel.warnings.begin(), sel.warnings.end());
    for (const std::string& w : rep.diagnostics.warnings) {
      if (w.rfind("groups:", 0) == 0) rep.warnings.push_back(w);
    }

    std::optional<BootstrapBlock> boot_block;
    if (t.bootstrap > 0) {
      BootstrapOptions bo;
      bo.replicates = t.bootstrap;
      bo.seed = t.seed;
      bo.test = options;
      const BootstrapResult boot = bootstrap(tg, sel.assignment, rep.model, bo);
      rep.p_bootstrap = boot.bootstrap_p;
      boot_block = BootstrapBlock{boot.replicates, boot.degenerate_replicates, boot.valid,
                                  boot.p_mean,     boot.p_std,                 boot.seed};
      if (!boot.valid) {
        rep.warnings.push_back("bootstrap invalid: " + std::to_string(boot.degenerate_replicates) +
                               " degenerate replicates exceed 1%");
      }
    }

    TestBlock block = to_block(rep);
    block.bootstrap = boot_block;
    if (t.bonferroni) {
      block.bonferroni = *t.bonferroni;
      block.p_normal_adjusted = floor_p_value(bonferroni(rep.p_normal, *t.bonferroni));
      if (rep.p_bootstrap) {
        block.p_bootstrap_adjusted = floor_p_value(bonferroni(*rep.p_bootstrap, *t.bonferroni));
      }
    }
    doc.tests.push_back(std::move(block));
  }

  emit(doc, t.out, out);
  if (!t.csv.empty()) {
    std::ofstream csv(t.csv, std::ios::binary);
    if (!csv) throw DataError("cannot write '" + t.csv + "'");
    write_summary_csv(doc, csv);
  }
  return kExitOk;
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Significance of covariate-defined community structure via modularity", "modsig"};
  app.require_subcommand(1);

  TestCommand test;
  auto* test_cmd = app.add_subcommand("test", "Modularity significance test (normal p-value)");
  add_test_options(test_cmd, test, false);

  TestCommand boot;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Significance test with a parametric bootstrap");
  add_test_options(boot_cmd, boot, true);

  InputOptions fit_in;
  std::string fit_model = "negbin";
  std::string fit_out;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an edge model with the degree plug-in fixed");
  add_input_options(fit_cmd, fit_in);
  fit_cmd->add_option("--model", fit_model, "bernoulli | poisson | negbin | zipoisson | zinegbin")
      ->capture_default_str();
  fit_cmd->add_option("--out", fit_out, "Write the JSON report here instead of stdout");

  InputOptions cmp_in;
  std::string cmp_out;
  auto* cmp_cmd = app.add_subcommand("compare-models", "Deviance and degrees of freedom of four count models");
  add_input_options(cmp_cmd, cmp_in);
  cmp_cmd->add_option("--out", cmp_out, "Write the JSON report here instead of stdout");

  InputOptions diag_in;
  std::string diag_model = "poisson";
  std::string diag_cov;
  std::string diag_column;
  std::string diag_out;
  auto* diag_cmd = app.add_subcommand("diagnose", "Asymptotic-regime diagnostics");
  add_input_options(diag_cmd, diag_in);
  diag_cmd->add_option("--model", diag_model, "Edge model family")->capture_default_str();
  diag_cmd->add_option("--covariates", diag_cov, "CSV of covariates");
  diag_cmd->add_option("--column", diag_column, "Covariate column for the K/n check");
  diag_cmd->add_option("--out", diag_out, "Write the JSON report here instead of stdout");

  std::string sim_model = "poisson";
  std::string sim_pi;
  std::uint64_t sim_seed = 0;
  std::optional<double> sim_r;
  std::optional<double> sim_omega;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "Sample a graph from the null fitted to an edge list");
  sim_cmd->add_option("--model", sim_model, "Edge model family")->capture_default_str();
  sim_cmd->add_option("--pi-from", sim_pi, "Edge list whose degrees define the propensities")
      ->required();
  sim_cmd->add_option("--seed", sim_seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--r", sim_r, "Negative binomial shape (default: fitted)")
      ->check(CLI::PositiveNumber);
  sim_cmd->add_option("--omega", sim_omega, "Zero-inflation mass (default: fitted)")
      ->check(CLI::Range(0.0, 0.999999999));
  sim_cmd->add_option("--out", sim_out, "Write the sampled edge list here instead of stdout");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "modsig: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (test_cmd->parsed()) return run_test(test, "test", out);
    if (boot_cmd->parsed()) {
      if (boot.bootstrap == 0) throw UsageError("--replicates must be at least 1");
      return run_test(boot, "bootstrap", out);
    }
    if (fit_cmd->parsed()) {
      const Family family = require_family(fit_model, false);
      const Loaded loaded = load_graph(fit_in);
      ReportDocument doc;
      doc.command = "fit";
      doc.graph = summarize_graph(loaded.graph);
      doc.warnings = loaded.warnings;
      const FitResult fit = fit_edge_model(loaded.graph, family);
      doc.model = model_block(loaded.graph, fit);
      if (fit.r_at_upper_cap) {
        doc.warnings.push_back("negative binomial shape at its upper bound: effectively Poisson");
      }
      emit(doc, fit_out, out);
      return kExitOk;
    }
    if (cmp_cmd->parsed()) {
      const Loaded loaded = load_graph(cmp_in);
      ReportDocument doc;
      doc.command = "compare-models";
      doc.graph = summarize_graph(loaded.graph);
      doc.warnings = loaded.warnings;
      const ModelComparison cmp = compare_models(loaded.graph);
      for (const ModelComparisonRow& row : cmp.rows) {
        ModelComparisonEntry e;
        e.family = row.family;
        e.parameter_count = row.parameter_count;
        e.log_likelihood = row.log_likelihood;
        e.residual_deviance = row.residual_deviance;
        if (row.model.has_shape()) e.r = row.model.r;
        if (row.model.is_zero_inflated()) e.omega = row.model.omega;
        doc.comparison.push_back(e);
      }
      emit(doc, cmp_out, out);
      return kExitOk;
    }
    if (diag_cmd->parsed()) {
      const Family family = require_family(diag_model, false);
      const Loaded loaded = load_graph(diag_in);
      ReportDocument doc;
      doc.command = "diagnose";
      doc.graph = summarize_graph(loaded.graph);
      doc.warnings = loaded.warnings;
      const FitResult fit = fit_edge_model(loaded.graph, family, FitOptions{.clamp_bernoulli = true});
      doc.model = model_block(loaded.graph, fit);
      std::optional<CommunityAssignment> groups;
      if (!diag_column.empty()) {
        std::optional<CovariateTable> table;
        if (!diag_cov.empty()) {
          table = read_covariate_table(diag_cov);
        } else if (loaded.gml_covariates) {
          table = loaded.gml_covariates;
        } else {
          throw UsageError("--column needs --covariates or a GML input");
        }
        groups = assign_from_table(*table, diag_column, loaded.graph).assignment;
      }
      doc.diagnostics =
          to_block(check_assumptions(loaded.graph, fit.model, groups ? &*groups : nullptr));
      emit(doc, diag_out, out);
      return kExitOk;
    }
    if (sim_cmd->parsed()) {
      const Family family = require_family(sim_model, false);
      const Graph source = read_edge_list(sim_pi);
      PiEstimate estimate = estimate_pi(source, IsolatedPolicy::drop);
      for (const std::string& w : estimate.warnings) err << "modsig: warning: " << w << '\n';
      const Graph active = estimate.kept.size() == source.num_nodes() ? source
                                                                      : source.induced(estimate.kept);
      EdgeModel model;
      const bool needs_fit = (family == Family::negbin && !sim_r) ||
                             (family == Family::zi_poisson && !sim_omega) ||
                             (family == Family::zi_negbin && (!sim_r || !sim_omega));
      if (needs_fit) {
        model = fit_edge_model(active, family, FitOptions{.clamp_bernoulli = true}).model;
      } else {
        model.family = family;
        model.clamp_bernoulli = true;
      }
      if (sim_r) model.r = *sim_r;
      if (sim_omega) model.omega = *sim_omega;
      const Graph sampled = sample_graph(estimate.pi, model, sim_seed, active.labels());
      if (sim_out.empty()) {
        write_edge_list(sampled, out);
      } else {
        std::ofstream file(sim_out, std::ios::binary);
        if (!file) throw DataError("cannot write '" + sim_out + "'");
        write_edge_list(sampled, file);
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "modsig: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateTestError& e) {
    err << "modsig: " << e.what() << '\n';
    return kExitDegenerate;
  } catch (const std::exception& e) {
    err << "modsig: " << e.what() << '\n';
    return kExitData;
  }
  err << "modsig: no subcommand\n";
  return kExitUsage;
}

}  // namespace modsig
