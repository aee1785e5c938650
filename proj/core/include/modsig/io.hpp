#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "modsig/graph.hpp"

namespace modsig {

/// Parses "u<TAB>v[<TAB>weight]" lines. '#' comment lines and blank lines
/// are skipped; a missing weight is 1. Errors carry the 1-based line number.
Graph parse_edge_list(std::istream& in, SelfLoopPolicy self_loops = SelfLoopPolicy::reject);
Graph read_edge_list(const std::filesystem::path& path,
                     SelfLoopPolicy self_loops = SelfLoopPolicy::reject);

/// Writes one line per aggregated edge; weights with 17 significant digits.
void write_edge_list(const Graph& g, std::ostream& out);

/// Node labels with named categorical columns. Missing cells are empty.
class CovariateTable {
 public:
  CovariateTable() = default;
  CovariateTable(std::vector<std::string> node_labels, std::vector<std::string> column_names,
                 std::vector<std::vector<std::string>> columns);

  std::size_t num_rows() const { return labels_.size(); }
  std::span<const std::string> node_labels() const { return labels_; }
  std::span<const std::string> column_names() const { return names_; }
  bool has_column(std::string_view name) const;
  /// Value for `label` in `column`, or nullopt when the row is absent or the
  /// cell is empty. Throws DataError for an unknown column.
  std::optional<std::string> value(std::string_view column, std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> names_;
  std::vector<std::vector<std::string>> columns_;
  std::unordered_map<std::string, std::size_t> row_;
};

/// RFC 4180 CSV with a header row; the first column holds node labels.
CovariateTable parse_covariate_csv(std::istream& in);
CovariateTable read_covariate_table(const std::filesystem::path& path);

enum class MissingPolicy { strict, drop };

struct AssignmentSelection {
  CommunityAssignment assignment;
  /// Node indices of the graph covered by `assignment`, increasing.
  std::vector<NodeIndex> kept;
  std::vector<std::string> warnings;
};

/// Maps each graph node to its value in `column`. Under MissingPolicy::strict
/// a node without a value is a DataError naming the node; under drop the
/// node is excluded and counted in a warning.
AssignmentSelection assign_from_table(const CovariateTable& table, std::string_view column,
                                      const Graph& g, MissingPolicy policy = MissingPolicy::strict);

/// read_covariate_table followed by assign_from_table.
AssignmentSelection read_covariates(const std::filesystem::path& path, std::string_view column,
                                    const Graph& g, MissingPolicy policy = MissingPolicy::strict);

struct GmlDocument {
  Graph graph;
  CovariateTable covariates;
  std::vector<std::string> warnings;
};

/// Minimal GML: graph [ node [ id … label … attrs ] edge [ source … target …
/// value … ] ]. Scalar node attributes become covariate columns; node labels
/// default to the id. Unknown keys and nested lists are skipped with a
/// warning. Throws DataError on an unterminated list, a duplicate node id or
/// an edge referencing an unknown id.
GmlDocument parse_gml(std::istream& in, SelfLoopPolicy self_loops = SelfLoopPolicy::reject);
GmlDocument read_gml(const std::filesystem::path& path,
                     SelfLoopPolicy self_loops = SelfLoopPolicy::reject);

}  // namespace modsig
