#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "modsig/graph.hpp"
#include "modsig/likelihood.hpp"
#include "modsig/modularity.hpp"
#include "modsig/null_model.hpp"
#include "modsig/sim.hpp"

namespace modsig {

inline constexpr int kReportSchemaVersion = 1;

struct GraphSummary {
  std::size_t n = 0;
  std::size_t m = 0;
  double total_weight = 0.0;
  Quartiles quartiles;

  friend bool operator==(const GraphSummary&, const GraphSummary&) = default;
};

struct ModelBlock {
  Family family = Family::poisson;
  std::optional<double> r;
  std::optional<double> omega;
  std::optional<double> log_likelihood;
  std::optional<double> deviance;
  bool r_at_upper_cap = false;

  friend bool operator==(const ModelBlock&, const ModelBlock&) = default;
};

struct BootstrapBlock {
  std::size_t replicates = 0;
  std::size_t degenerate = 0;
  bool valid = true;
  double p_mean = 0.0;
  double p_std = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const BootstrapBlock&, const BootstrapBlock&) = default;
};

/// p-values below kPValueFloor are stored as 0 and serialized as "<1e-300".
struct TestBlock {
  std::string covariate;
  std::size_t n = 0;
  std::size_t num_groups = 0;
  double q_hat = 0.0;
  double b_hat = 0.0;
  double s_hat = 0.0;
  double z = 0.0;
  double p_normal = 0.0;
  std::optional<double> p_bootstrap;
  /// Multiplier applied by --bonferroni; the adjusted values are min(1, M·p).
  std::optional<double> bonferroni;
  std::optional<double> p_normal_adjusted;
  std::optional<double> p_bootstrap_adjusted;
  std::optional<BootstrapBlock> bootstrap;
  std::vector<std::string> warnings;

  friend bool operator==(const TestBlock&, const TestBlock&) = default;
};

struct DiagnosticsBlock {
  double ratio_star = 0.0;
  double ratio_sparse = 0.0;
  double ratio_dense = 0.0;
  double quartile_star = 0.0;
  double quartile_sparse = 0.0;
  double quartile_dense = 0.0;
  double dispersion_min = 0.0;
  double dispersion_max = 0.0;
  double skewness_min = 0.0;
  double skewness_max = 0.0;
  std::optional<double> k_over_n;
  std::vector<std::string> warnings;

  friend bool operator==(const DiagnosticsBlock&, const DiagnosticsBlock&) = default;
};

struct ModelComparisonEntry {
  Family family = Family::poisson;
  std::size_t parameter_count = 0;
  double log_likelihood = 0.0;
  double residual_deviance = 0.0;
  std::optional<double> r;
  std::optional<double> omega;

  friend bool operator==(const ModelComparisonEntry&, const ModelComparisonEntry&) = default;
};

struct ReportDocument {
  int schema_version = kReportSchemaVersion;
  std::string command;
  GraphSummary graph;
  std::optional<ModelBlock> model;
  std::vector<TestBlock> tests;
  std::optional<DiagnosticsBlock> diagnostics;
  std::vector<ModelComparisonEntry> comparison;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> created;
  std::vector<std::string> warnings;

  friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

GraphSummary summarize_graph(const Graph& g);
DiagnosticsBlock to_block(const DiagnosticsReport& d);
TestBlock to_block(const ModularityReport& r);
double bonferroni(double p, double multiplier);
/// Values below kPValueFloor become 0, the stored form of "<1e-300".
double floor_p_value(double p);

/// Pretty-printed JSON text with a trailing newline.
std::string serialize_report(const ReportDocument& doc);
/// Throws DataError on malformed input or a schema_version mismatch.
ReportDocument parse_report(const std::string& text);

/// One CSV row per test block, preceded by a header row.
void write_summary_csv(const ReportDocument& doc, std::ostream& out);

}  // namespace modsig
