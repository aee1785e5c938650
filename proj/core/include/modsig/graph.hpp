#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace modsig {

using NodeIndex = std::size_t;
using GroupIndex = std::size_t;

/// One input edge record before aggregation.
struct EdgeRecord {
  std::string source;
  std::string target;
  double weight = 1.0;
};

/// Aggregated undirected edge, always stored with `u < v`.
struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class SelfLoopPolicy { reject, drop };

/// Immutable undirected multigraph with aggregated non-negative weights.
///
/// Node indices are dense and follow first appearance in the input. Edges
/// are sorted by (u, v) with u < v, one entry per unordered pair; parallel
/// records are summed on construction. Degrees are real-valued so that
/// weighted and multi-edge graphs share one code path.
class Graph {
 public:
  Graph() = default;

  /// Builds from dense-index edges. Entries need not be sorted or unique;
  /// `num_nodes` fixes n so isolated nodes can be represented.
  static Graph from_edges(std::size_t num_nodes, std::vector<Edge> edges,
                          std::vector<std::string> labels = {},
                          SelfLoopPolicy self_loops = SelfLoopPolicy::reject);

  std::size_t num_nodes() const { return degree_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const double> degrees() const { return degree_; }
  double degree(NodeIndex i) const { return degree_[i]; }
  /// ‖d‖₁ = Σ d_i = 2 Σ_e w_e.
  double total_degree() const { return total_degree_; }
  double total_weight() const { return total_degree_ / 2.0; }

  std::span<const std::string> labels() const { return labels_; }
  const std::string& label(NodeIndex i) const { return labels_[i]; }
  /// Index of a label, or `num_nodes()` when absent.
  NodeIndex find(std::string_view label) const;

  /// True when every weight is a non-negative integer.
  bool has_integer_weights() const;

  /// Subgraph induced by `keep` (strictly increasing node indices).
  Graph induced(std::span<const NodeIndex> keep) const;

 private:
  std::vector<Edge> edges_;
  std::vector<double> degree_;
  double total_degree_ = 0.0;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeIndex> index_;
};

/// Interns labels in first-appearance order, sums parallel records.
/// Throws DataError on a negative or non-finite weight, and on a self-loop
/// unless `self_loops == SelfLoopPolicy::drop`.
Graph build_graph(std::span<const EdgeRecord> records,
                  SelfLoopPolicy self_loops = SelfLoopPolicy::reject);

/// Fixed node → group map with dense group indices in [0, K).
class CommunityAssignment {
 public:
  CommunityAssignment() = default;

  /// Groups are numbered in order of first appearance of each label.
  static CommunityAssignment from_labels(std::span<const std::string> node_labels);
  /// Arbitrary integer codes; renumbered densely in first-appearance order.
  static CommunityAssignment from_codes(std::span<const std::size_t> codes);

  std::size_t size() const { return group_of_.size(); }
  std::size_t num_groups() const { return labels_.size(); }
  GroupIndex group_of(NodeIndex i) const { return group_of_[i]; }
  std::span<const GroupIndex> groups() const { return group_of_; }
  std::span<const std::string> group_labels() const { return labels_; }

  /// Restriction to `keep`, with groups renumbered densely.
  CommunityAssignment restricted(std::span<const NodeIndex> keep) const;

 private:
  std::vector<GroupIndex> group_of_;
  std::vector<std::string> labels_;
};

/// d_i = d_i^w + d_i^b, split by same-group and other-group neighbors.
struct DegreeDecomposition {
  std::vector<double> within;
  std::vector<double> between;
};

/// Throws DataError when the assignment does not cover exactly n nodes.
DegreeDecomposition within_between_degrees(const Graph& g, const CommunityAssignment& a);

struct Quartiles {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;

  friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

/// Type-7 (linear interpolation) percentile of unsorted data; `prob` in [0,1].
double percentile(std::span<const double> values, double prob);

/// 25/50/75 percentiles of the degree vector. Throws DataError on n = 0.
Quartiles degree_quartiles(const Graph& g);

}  // namespace modsig
