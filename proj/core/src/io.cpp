#include "modsig/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>

#include "modsig/error.hpp"

namespace modsig {

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return in;
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line) + ": "; }

std::optional<double> parse_number(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

Graph parse_edge_list(std::istream& in, SelfLoopPolicy self_loops) {
  std::vector<EdgeRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty()) {
      throw DataError(at_line(line_no) + "expected 'u<TAB>v[<TAB>weight]'");
    }
    EdgeRecord rec{fields[0], fields[1], 1.0};
    if (fields.size() == 3) {
      const auto w = parse_number(fields[2]);
      if (!w) throw DataError(at_line(line_no) + "malformed weight '" + fields[2] + "'");
      if (!std::isfinite(*w)) throw DataError(at_line(line_no) + "non-finite weight");
      if (*w < 0.0) throw DataError(at_line(line_no) + "negative weight " + fields[2]);
      rec.weight = *w;
    }
    if (rec.source == rec.target) {
      if (self_loops == SelfLoopPolicy::drop) continue;
      throw DataError(at_line(line_no) + "self-loop at node '" + rec.source + "'");
    }
    records.push_back(std::move(rec));
  }
  return build_graph(records, self_loops);
}

Graph read_edge_list(const std::filesystem::path& path, SelfLoopPolicy self_loops) {
  std::ifstream in = open_input(path);
  return parse_edge_list(in, self_loops);
}

void write_edge_list(const Graph& g, std::ostream& out) {
  for (const Edge& e : g.edges()) {
    out << g.label(e.u) << '\t' << g.label(e.v) << '\t' << format_double(e.weight) << '\n';
  }
}

CovariateTable::CovariateTable(std::vector<std::string> node_labels,
                               std::vector<std::string> column_names,
                               std::vector<std::vector<std::string>> columns)
    : labels_(std::move(node_labels)), names_(std::move(column_names)), columns_(std::move(columns)) {
  if (columns_.size() != names_.size()) throw DataError("column count mismatch");
  for (const auto& col : columns_) {
    if (col.size() != labels_.size()) throw DataError("column length mismatch");
  }
  for (std::size_t r = 0; r < labels_.size(); ++r) {
    if (!row_.emplace(labels_[r], r).second) {
      throw DataError("duplicate node '" + labels_[r] + "' in covariate table");
    }
  }
}

bool CovariateTable::has_column(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::optional<std::string> CovariateTable::value(std::string_view column,
                                                 std::string_view label) const {
  const auto it = std::find(names_.begin(), names_.end(), column);
  if (it == names_.end()) throw DataError("no covariate column '" + std::string(column) + "'");
  const auto row = row_.find(std::string(label));
  if (row == row_.end()) return std::nullopt;
  const std::string& cell = columns_[static_cast<std::size_t>(it - names_.begin())][row->second];
  if (cell.empty()) return std::nullopt;
  return cell;
}

namespace {

/// Splits RFC 4180 records: quoted fields may contain commas, doubled quotes
/// and line breaks.
std::vector<std::vector<std::string>> parse_csv_records(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  char c = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) throw DataError(at_line(line) + "stray quote inside unquoted field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw DataError(at_line(line) + "unterminated quoted field");
  if (field_started || !record.empty()) end_record();
  return records;
}

}  // namespace

CovariateTable parse_covariate_csv(std::istream& in) {
  auto records = parse_csv_records(in);
  if (records.empty()) throw DataError("covariate file has no header row");
  const std::vector<std::string>& header = records.front();
  if (header.size() < 2) throw DataError("covariate header needs a label column and one covariate");
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<std::vector<std::string>> columns(names.size());
  std::vector<std::string> labels;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() != header.size()) {
      throw DataError("covariate row " + std::to_string(r + 1) + " has " +
                      std::to_string(rec.size()) + " fields, header has " +
                      std::to_string(header.size()));
    }
    labels.push_back(rec[0]);
    for (std::size_t c = 0; c < names.size(); ++c) columns[c].push_back(rec[c + 1]);
  }
  return CovariateTable(std::move(labels), std::move(names), std::move(columns));
}

CovariateTable read_covariate_table(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_covariate_csv(in);
}

AssignmentSelection assign_from_table(const CovariateTable& table, std::string_view column,
                                      const Graph& g, MissingPolicy policy) {
  if (!table.has_column(column)) {
    throw DataError("no covariate column '" + std::string(column) + "'");
  }
  AssignmentSelection out;
  std::vector<std::string> values;
  for (NodeIndex i = 0; i < g.num_nodes(); ++i) {
    auto v = table.value(column, g.label(i));
    if (!v) {
      if (policy == MissingPolicy::strict) {
        throw DataError("node '" + g.label(i) + "' has no value in column '" + std::string(column) +
                        "'");
      }
      continue;
    }
    out.kept.push_back(i);
    values.push_back(std::move(*v));
  }
  const std::size_t missing = g.num_nodes() - out.kept.size();
  if (missing > 0) {
    out.warnings.push_back("column '" + std::string(column) + "': dropped " +
                           std::to_string(missing) + " node(s) without a value");
  }
  out.assignment = CommunityAssignment::from_labels(values);
  return out;
}

AssignmentSelection read_covariates(const std::filesystem::path& path, std::string_view column,
                                    const Graph& g, MissingPolicy policy) {
  return assign_from_table(read_covariate_table(path), column, g, policy);
}

namespace {

struct GmlList;

struct GmlValue {
  std::string scalar;
  std::unique_ptr<GmlList> list;
};

struct GmlList {
  std::vector<std::pair<std::string, GmlValue>> items;
};

class GmlParser {
 public:
  explicit GmlParser(std::istream& in) : in_(in) {}

  GmlList parse_document() {
    GmlList top = parse_items(/*nested=*/false);
    return top;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;

  void skip_space() {
    while (true) {
      const int c = in_.peek();
      if (c == EOF) return;
      if (c == '\n') ++line_;
      if (c == '#') {
        std::string ignored;
        std::getline(in_, ignored);
        ++line_;
        continue;
      }
      if (!std::isspace(c)) return;
      in_.get();
    }
  }

  /// Next token; quoted strings are returned without quotes and flagged.
  bool next_token(std::string& token, bool& was_quoted) {
    skip_space();
    token.clear();
    was_quoted = false;
    int c = in_.peek();
    if (c == EOF) return false;
    if (c == '[' || c == ']') {
      token.push_back(static_cast<char>(in_.get()));
      return true;
    }
    if (c == '"') {
      in_.get();
      was_quoted = true;
      const std::size_t start_line = line_;
      while ((c = in_.get()) != EOF && c != '"') {
        if (c == '\n') ++line_;
        token.push_back(static_cast<char>(c));
      }
      if (c == EOF) throw DataError(at_line(start_line) + "unterminated string in GML");
      return true;
    }
    while ((c = in_.peek()) != EOF && !std::isspace(c) && c != '[' && c != ']') {
      token.push_back(static_cast<char>(in_.get()));
    }
    return true;
  }

  GmlList parse_items(bool nested) {
    GmlList list;
    const std::size_t open_line = line_;
    std::string key;
    bool quoted = false;
    while (next_token(key, quoted)) {
      if (key == "]" && !quoted) {
        if (!nested) throw DataError(at_line(line_) + "unbalanced ']' in GML");
        return list;
      }
      if (key == "[" && !quoted) throw DataError(at_line(line_) + "list without a key in GML");
      std::string value;
      bool value_quoted = false;
      if (!next_token(value, value_quoted)) {
        throw DataError(at_line(line_) + "key '" + key + "' without a value in GML");
      }
      GmlValue v;
      if (value == "[" && !value_quoted) {
        v.list = std::make_unique<GmlList>(parse_items(/*nested=*/true));
      } else if (value == "]" && !value_quoted) {
        throw DataError(at_line(line_) + "key '" + key + "' without a value in GML");
      } else {
        v.scalar = std::move(value);
      }
      list.items.emplace_back(std::move(key), std::move(v));
    }
    if (nested) throw DataError(at_line(open_line) + "unterminated list in GML");
    return list;
  }
};

}  // namespace

GmlDocument parse_gml(std::istream& in, SelfLoopPolicy self_loops) {
  GmlParser parser(in);
  const GmlList top = parser.parse_document();
  GmlDocument doc;

  const GmlList* graph = nullptr;
  for (const auto& [key, value] : top.items) {
    if (key == "graph" && value.list) {
      if (graph != nullptr) throw DataError("GML contains more than one graph");
      graph = value.list.get();
    } else if (key != "Creator" && key != "Version" && key != "version") {
      doc.warnings.push_back("GML: skipped top-level key '" + key + "'");
    }
  }
  if (graph == nullptr) throw DataError("GML has no 'graph [ ... ]' block");

  std::vector<std::string> ids;
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeIndex> by_id;
  std::vector<std::string> attr_names;
  std::vector<std::unordered_map<std::string, std::string>> attrs;
  std::vector<Edge> edges;
  std::size_t skipped_keys = 0;
  std::size_t skipped_lists = 0;

  for (const auto& [key, value] : graph->items) {
    if (key == "node" && value.list) {
      std::optional<std::string> id;
      std::optional<std::string> label;
      std::unordered_map<std::string, std::string> node_attrs;
      for (const auto& [k, v] : value.list->items) {
        if (v.list) {
          ++skipped_lists;
        } else if (k == "id") {
          id = v.scalar;
        } else if (k == "label") {
          label = v.scalar;
        } else {
          if (std::find(attr_names.begin(), attr_names.end(), k) == attr_names.end()) {
            attr_names.push_back(k);
          }
          node_attrs[k] = v.scalar;
        }
      }
      if (!id) throw DataError("GML node without an id");
      if (!by_id.emplace(*id, ids.size()).second) {
        throw DataError("GML: duplicate node id " + *id);
      }
      ids.push_back(*id);
      labels.push_back(label.value_or(*id));
      attrs.push_back(std::move(node_attrs));
    } else if (key == "edge" && value.list) {
      std::optional<std::string> source;
      std::optional<std::string> target;
      double weight = 1.0;
      for (const auto& [k, v] : value.list->items) {
        if (v.list) {
          ++skipped_lists;
        } else if (k == "source") {
          source = v.scalar;
        } else if (k == "target") {
          target = v.scalar;
        } else if (k == "value" || k == "weight") {
          const auto w = parse_number(v.scalar);
          if (!w || !std::isfinite(*w)) throw DataError("GML: malformed edge value '" + v.scalar + "'");
          if (*w < 0.0) throw DataError("GML: negative edge value " + v.scalar);
          weight = *w;
        } else {
          ++skipped_keys;
        }
      }
      if (!source || !target) throw DataError("GML edge without source or target");
      const auto s = by_id.find(*source);
      const auto t = by_id.find(*target);
      if (s == by_id.end()) throw DataError("GML edge references unknown node id " + *source);
      if (t == by_id.end()) throw DataError("GML edge references unknown node id " + *target);
      if (s->second == t->second && self_loops == SelfLoopPolicy::reject) {
        throw DataError("GML: self-loop at node id " + *source);
      }
      edges.push_back({s->second, t->second, weight});
    } else if (key == "directed") {
      if (value.scalar != "0") doc.warnings.push_back("GML: directed graph read as undirected");
    } else {
      ++skipped_keys;
    }
  }
  if (skipped_keys > 0) {
    doc.warnings.push_back("GML: skipped " + std::to_string(skipped_keys) + " unknown key(s)");
  }
  if (skipped_lists > 0) {
    doc.warnings.push_back("GML: skipped " + std::to_string(skipped_lists) + " nested list(s)");
  }

  std::unordered_map<std::string, std::size_t> seen;
  for (const std::string& l : labels) {
    if (++seen[l] > 1) {
      doc.warnings.push_back("GML: node labels are not unique; using node ids as labels");
      labels = ids;
      break;
    }
  }

  std::vector<std::vector<std::string>> columns(attr_names.size());
  for (std::size_t c = 0; c < attr_names.size(); ++c) {
    for (const auto& a : attrs) {
      const auto it = a.find(attr_names[c]);
      columns[c].push_back(it == a.end() ? std::string() : it->second);
    }
  }
  const std::size_t n = ids.size();
  doc.covariates = CovariateTable(labels, attr_names, std::move(columns));
  doc.graph = Graph::from_edges(n, std::move(edges), std::move(labels), self_loops);
  return doc;
}

GmlDocument read_gml(const std::filesystem::path& path, SelfLoopPolicy self_loops) {
  std::ifstream in = open_input(path);
  return parse_gml(in, self_loops);
}

}  // namespace modsig
