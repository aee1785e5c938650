#include "modsig/report.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "modsig/error.hpp"

namespace modsig {

using nlohmann::json;

namespace {

constexpr const char* kBelowFloor = "<1e-300";

json p_to_json(double p) { return p < kPValueFloor ? json(kBelowFloor) : json(p); }

double p_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() != kBelowFloor) throw DataError("unrecognized p-value string");
    return 0.0;
  }
  return j.get<double>();
}

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

Family family_from_json(const json& j) {
  const auto f = parse_family(j.get<std::string>());
  if (!f) throw DataError("unknown model family '" + j.get<std::string>() + "'");
  return *f;
}

json to_json(const GraphSummary& s) {
  return {{"n", s.n},
          {"m", s.m},
          {"total_weight", s.total_weight},
          {"degree_quartiles", {s.quartiles.q1, s.quartiles.q2, s.quartiles.q3}}};
}

GraphSummary graph_from_json(const json& j) {
  GraphSummary s;
  s.n = j.at("n").get<std::size_t>();
  s.m = j.at("m").get<std::size_t>();
  s.total_weight = j.at("total_weight").get<double>();
  const json& q = j.at("degree_quartiles");
  s.quartiles = {q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>()};
  return s;
}

json to_json(const ModelBlock& m) {
  json j{{"family", std::string(to_string(m.family))}, {"r_at_upper_cap", m.r_at_upper_cap}};
  put_optional(j, "r", m.r);
  put_optional(j, "omega", m.omega);
  put_optional(j, "log_likelihood", m.log_likelihood);
  put_optional(j, "deviance", m.deviance);
  return j;
}

ModelBlock model_from_json(const json& j) {
  ModelBlock m;
  m.family = family_from_json(j.at("family"));
  m.r_at_upper_cap = j.at("r_at_upper_cap").get<bool>();
  m.r = get_optional<double>(j, "r");
  m.omega = get_optional<double>(j, "omega");
  m.log_likelihood = get_optional<double>(j, "log_likelihood");
  m.deviance = get_optional<double>(j, "deviance");
  return m;
}

json to_json(const BootstrapBlock& b) {
  return {{"replicates", b.replicates}, {"degenerate", b.degenerate}, {"valid", b.valid},
          {"p_mean", b.p_mean},         {"p_std", b.p_std},           {"seed", b.seed}};
}

BootstrapBlock bootstrap_from_json(const json& j) {
  BootstrapBlock b;
  b.replicates = j.at("replicates").get<std::size_t>();
  b.degenerate = j.at("degenerate").get<std::size_t>();
  b.valid = j.at("valid").get<bool>();
  b.p_mean = j.at("p_mean").get<double>();
  b.p_std = j.at("p_std").get<double>();
  b.seed = j.at("seed").get<std::uint64_t>();
  return b;
}

json to_json(const TestBlock& t) {
  json j{{"covariate", t.covariate}, {"n", t.n},         {"K", t.num_groups},
         {"q_hat", t.q_hat},         {"b_hat", t.b_hat}, {"s_hat", t.s_hat},
         {"z", t.z},                 {"p_normal", p_to_json(t.p_normal)}};
  if (t.p_bootstrap) j["p_bootstrap"] = p_to_json(*t.p_bootstrap);
  put_optional(j, "bonferroni", t.bonferroni);
  if (t.p_normal_adjusted) j["p_normal_adjusted"] = p_to_json(*t.p_normal_adjusted);
  if (t.p_bootstrap_adjusted) j["p_bootstrap_adjusted"] = p_to_json(*t.p_bootstrap_adjusted);
  if (t.bootstrap) j["bootstrap"] = to_json(*t.bootstrap);
  j["warnings"] = t.warnings;
  return j;
}

TestBlock test_from_json(const json& j) {
  TestBlock t;
  t.covariate = j.at("covariate").get<std::string>();
  t.n = j.at("n").get<std::size_t>();
  t.num_groups = j.at("K").get<std::size_t>();
  t.q_hat = j.at("q_hat").get<double>();
  t.b_hat = j.at("b_hat").get<double>();
  t.s_hat = j.at("s_hat").get<double>();
  t.z = j.at("z").get<double>();
  t.p_normal = p_from_json(j.at("p_normal"));
  if (j.contains("p_bootstrap")) t.p_bootstrap = p_from_json(j.at("p_bootstrap"));
  t.bonferroni = get_optional<double>(j, "bonferroni");
  if (j.contains("p_normal_adjusted")) t.p_normal_adjusted = p_from_json(j.at("p_normal_adjusted"));
  if (j.contains("p_bootstrap_adjusted")) {
    t.p_bootstrap_adjusted = p_from_json(j.at("p_bootstrap_adjusted"));
  }
  if (j.contains("bootstrap")) t.bootstrap = bootstrap_from_json(j.at("bootstrap"));
  t.warnings = j.at("warnings").get<std::vector<std::string>>();
  return t;
}

json to_json(const DiagnosticsBlock& d) {
  json j{{"ratio_star", d.ratio_star},
         {"ratio_sparse", d.ratio_sparse},
         {"ratio_dense", d.ratio_dense},
         {"quartile_star", d.quartile_star},
         {"quartile_sparse", d.quartile_sparse},
         {"quartile_dense", d.quartile_dense},
         {"dispersion_range", {d.dispersion_min, d.dispersion_max}},
         {"skewness_range", {d.skewness_min, d.skewness_max}},
         {"warnings", d.warnings}};
  put_optional(j, "k_over_n", d.k_over_n);
  return j;
}

DiagnosticsBlock diagnostics_from_json(const json& j) {
  DiagnosticsBlock d;
  d.ratio_star = j.at("ratio_star").get<double>();
  d.ratio_sparse = j.at("ratio_sparse").get<double>();
  d.ratio_dense = j.at("ratio_dense").get<double>();
  d.quartile_star = j.at("quartile_star").get<double>();
  d.quartile_sparse = j.at("quartile_sparse").get<double>();
  d.quartile_dense = j.at("quartile_dense").get<double>();
  d.dispersion_min = j.at("dispersion_range").at(0).get<double>();
  d.dispersion_max = j.at("dispersion_range").at(1).get<double>();
  d.skewness_min = j.at("skewness_range").at(0).get<double>();
  d.skewness_max = j.at("skewness_range").at(1).get<double>();
  d.k_over_n = get_optional<double>(j, "k_over_n");
  d.warnings = j.at("warnings").get<std::vector<std::string>>();
  return d;
}

json to_json(const ModelComparisonEntry& e) {
  json j{{"family", std::string(to_string(e.family))},
         {"parameters", e.parameter_count},
         {"log_likelihood", e.log_likelihood},
         {"residual_deviance", e.residual_deviance}};
  put_optional(j, "r", e.r);
  put_optional(j, "omega", e.omega);
  return j;
}

ModelComparisonEntry comparison_from_json(const json& j) {
  ModelComparisonEntry e;
  e.family = family_from_json(j.at("family"));
  e.parameter_count = j.at("parameters").get<std::size_t>();
  e.log_likelihood = j.at("log_likelihood").get<double>();
  e.residual_deviance = j.at("residual_deviance").get<double>();
  e.r = get_optional<double>(j, "r");
  e.omega = get_optional<double>(j, "omega");
  return e;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_p(double p) { return p < kPValueFloor ? kBelowFloor : csv_number(p); }

}  // namespace

GraphSummary summarize_graph(const Graph& g) {
  GraphSummary s;
  s.n = g.num_nodes();
  s.m = g.num_edges();
  s.total_weight = g.total_weight();
  if (g.num_nodes() > 0) s.quartiles = degree_quartiles(g);
  return s;
}

DiagnosticsBlock to_block(const DiagnosticsReport& d) {
  DiagnosticsBlock b;
  b.ratio_star = d.ratio_star;
  b.ratio_sparse = d.ratio_sparse;
  b.ratio_dense = d.ratio_dense;
  b.quartile_star = d.quartile_star;
  b.quartile_sparse = d.quartile_sparse;
  b.quartile_dense = d.quartile_dense;
  b.dispersion_min = d.dispersion_range[0];
  b.dispersion_max = d.dispersion_range[1];
  b.skewness_min = d.skewness_range[0];
  b.skewness_max = d.skewness_range[1];
  b.k_over_n = d.k_over_n;
  b.warnings = d.warnings;
  return b;
}

TestBlock to_block(const ModularityReport& r) {
  TestBlock t;
  t.covariate = r.covariate_name;
  t.n = r.n;
  t.num_groups = r.num_groups;
  t.q_hat = r.q_hat;
  t.b_hat = r.b_hat;
  t.s_hat = r.s_hat;
  t.z = r.z;
  t.p_normal = floor_p_value(r.p_normal);
  if (r.p_bootstrap) t.p_bootstrap = floor_p_value(*r.p_bootstrap);
  t.warnings = r.warnings;
  return t;
}

double bonferroni(double p, double multiplier) { return std::min(1.0, p * multiplier); }

double floor_p_value(double p) { return p < kPValueFloor ? 0.0 : p; }

std::string serialize_report(const ReportDocument& doc) {
  json j;
  j["schema_version"] = doc.schema_version;
  j["command"] = doc.command;
  j["graph"] = to_json(doc.graph);
  if (doc.model) j["model"] = to_json(*doc.model);
  json tests = json::array();
  for (const TestBlock& t : doc.tests) tests.push_back(to_json(t));
  j["tests"] = std::move(tests);
  if (doc.diagnostics) j["diagnostics"] = to_json(*doc.diagnostics);
  json rows = json::array();
  for (const ModelComparisonEntry& e : doc.comparison) rows.push_back(to_json(e));
  j["model_comparison"] = std::move(rows);
  put_optional(j, "seed", doc.seed);
  put_optional(j, "created", doc.created);
  j["warnings"] = doc.warnings;
  return j.dump(2) + "\n";
}

ReportDocument parse_report(const std::string& text) {
  try {
    const json j = json::parse(text);
    ReportDocument doc;
    doc.schema_version = j.at("schema_version").get<int>();
    if (doc.schema_version != kReportSchemaVersion) {
      throw DataError("unsupported report schema_version " + std::to_string(doc.schema_version));
    }
    doc.command = j.at("command").get<std::string>();
    doc.graph = graph_from_json(j.at("graph"));
    if (j.contains("model")) doc.model = model_from_json(j.at("model"));
    for (const json& t : j.at("tests")) doc.tests.push_back(test_from_json(t));
    if (j.contains("diagnostics")) doc.diagnostics = diagnostics_from_json(j.at("diagnostics"));
    for (const json& e : j.at("model_comparison")) doc.comparison.push_back(comparison_from_json(e));
    doc.seed = get_optional<std::uint64_t>(j, "seed");
    doc.created = get_optional<std::string>(j, "created");
    doc.warnings = j.at("warnings").get<std::vector<std::string>>();
    return doc;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

void write_summary_csv(const ReportDocument& doc, std::ostream& out) {
  out << "covariate,n,K,q_hat,b_hat,s_hat,z,p_normal,p_bootstrap,bonferroni,p_normal_adjusted\n";
  for (const TestBlock& t : doc.tests) {
    out << csv_field(t.covariate) << ',' << t.n << ',' << t.num_groups << ','
        << csv_number(t.q_hat) << ',' << csv_number(t.b_hat) << ',' << csv_number(t.s_hat) << ','
        << csv_number(t.z) << ',' << csv_p(t.p_normal) << ','
        << (t.p_bootstrap ? csv_p(*t.p_bootstrap) : "") << ','
        << (t.bonferroni ? csv_number(*t.bonferroni) : "") << ','
        << (t.p_normal_adjusted ? csv_p(*t.p_normal_adjusted) : "") << '\n';
  }
}

}  // namespace modsig
