#include "modsig/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "modsig/error.hpp"

namespace modsig {

namespace {

void check_weight(double w) {
  if (!std::isfinite(w)) throw DataError("non-finite edge weight");
  if (w < 0.0) throw DataError("negative edge weight " + std::to_string(w));
}

}  // namespace

Graph Graph::from_edges(std::size_t num_nodes, std::vector<Edge> edges,
                        std::vector<std::string> labels, SelfLoopPolicy self_loops) {
  Graph g;
  if (labels.empty()) {
    labels.reserve(num_nodes);
    for (std::size_t i = 0; i < num_nodes; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != num_nodes) throw DataError("label count does not match node count");

  std::vector<Edge> clean;
  clean.reserve(edges.size());
  for (Edge e : edges) {
    check_weight(e.weight);
    if (e.u >= num_nodes || e.v >= num_nodes) throw DataError("edge endpoint out of range");
    if (e.u == e.v) {
      if (self_loops == SelfLoopPolicy::drop) continue;
      throw DataError("self-loop at node '" + labels[e.u] + "'");
    }
    if (e.u > e.v) std::swap(e.u, e.v);
    clean.push_back(e);
  }
  // Stable so that parallel records are summed in input order.
  std::stable_sort(clean.begin(), clean.end(), [](const Edge& a, const Edge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  for (const Edge& e : clean) {
    if (!g.edges_.empty() && g.edges_.back().u == e.u && g.edges_.back().v == e.v) {
      g.edges_.back().weight += e.weight;
    } else {
      g.edges_.push_back(e);
    }
  }

  g.degree_.assign(num_nodes, 0.0);
  double weight_sum = 0.0;
  for (const Edge& e : g.edges_) {
    g.degree_[e.u] += e.weight;
    g.degree_[e.v] += e.weight;
    weight_sum += e.weight;
  }
  g.total_degree_ = 2.0 * weight_sum;
  g.labels_ = std::move(labels);
  g.index_.reserve(num_nodes);
  for (NodeIndex i = 0; i < num_nodes; ++i) {
    if (!g.index_.emplace(g.labels_[i], i).second) {
      throw DataError("duplicate node label '" + g.labels_[i] + "'");
    }
  }
  return g;
}

NodeIndex Graph::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  return it == index_.end() ? num_nodes() : it->second;
}

bool Graph::has_integer_weights() const {
  return std::all_of(edges_.begin(), edges_.end(),
                     [](const Edge& e) { return e.weight == std::floor(e.weight); });
}

Graph Graph::induced(std::span<const NodeIndex> keep) const {
  std::vector<NodeIndex> remap(num_nodes(), num_nodes());
  std::vector<std::string> labels;
  labels.reserve(keep.size());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] >= num_nodes() || (k > 0 && keep[k] <= keep[k - 1])) {
      throw DataError("induced subgraph indices must be increasing and in range");
    }
    remap[keep[k]] = k;
    labels.push_back(labels_[keep[k]]);
  }
  std::vector<Edge> edges;
  for (const Edge& e : edges_) {
    if (remap[e.u] != num_nodes() && remap[e.v] != num_nodes()) {
      edges.push_back({remap[e.u], remap[e.v], e.weight});
    }
  }
  return from_edges(keep.size(), std::move(edges), std::move(labels));
}

Graph build_graph(std::span<const EdgeRecord> records, SelfLoopPolicy self_loops) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeIndex> index;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    return it->second;
  };
  std::vector<Edge> edges;
  edges.reserve(records.size());
  for (const EdgeRecord& rec : records) {
    check_weight(rec.weight);
    if (rec.source == rec.target) {
      if (self_loops == SelfLoopPolicy::drop) continue;
      throw DataError("self-loop at node '" + rec.source + "'");
    }
    NodeIndex u = intern(rec.source);
    NodeIndex v = intern(rec.target);
    edges.push_back({u, v, rec.weight});
  }
  const std::size_t n = labels.size();
  return Graph::from_edges(n, std::move(edges), std::move(labels), self_loops);
}

CommunityAssignment CommunityAssignment::from_labels(std::span<const std::string> node_labels) {
  CommunityAssignment a;
  std::unordered_map<std::string, GroupIndex> index;
  a.group_of_.reserve(node_labels.size());
  for (const std::string& label : node_labels) {
    auto [it, inserted] = index.emplace(label, a.labels_.size());
    if (inserted) a.labels_.push_back(label);
    a.group_of_.push_back(it->second);
  }
  return a;
}

CommunityAssignment CommunityAssignment::from_codes(std::span<const std::size_t> codes) {
  std::vector<std::string> labels;
  labels.reserve(codes.size());
  for (std::size_t c : codes) labels.push_back(std::to_string(c));
  return from_labels(labels);
}

CommunityAssignment CommunityAssignment::restricted(std::span<const NodeIndex> keep) const {
  std::vector<std::string> labels;
  labels.reserve(keep.size());
  for (NodeIndex i : keep) {
    if (i >= size()) throw DataError("restricted assignment index out of range");
    labels.push_back(labels_[group_of_[i]]);
  }
  return from_labels(labels);
}

namespace {

/// b ≥ 0 with w + b == d exactly in floating point when such a b exists;
/// otherwise the b whose sum lands closest to d (one ulp away). The exact
/// case fails only for non-integer weights where every candidate sum is a
/// rounding tie that resolves away from d.
double complement(double d, double w) {
  if (w >= d) return 0.0;
  double b = d - w;
  for (int step = 0; step < 8 && w + b != d; ++step) b += d - (w + b);
  if (w + b == d) return b;
  // fl(w + ·) is monotone: bracket d, then bisect.
  double lo = b;
  double hi = b;
  while (w + lo > d) lo = std::nextafter(lo - std::abs(lo) * 0x1p-40, -INFINITY);
  while (w + hi < d) hi = std::nextafter(hi + std::abs(hi) * 0x1p-40, INFINITY);
  while (true) {
    const double mid = lo + (hi - lo) / 2;
    if (mid == lo || mid == hi) break;
    const double sum = w + mid;
    if (sum == d) return mid;
    if (sum < d) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (w + hi == d) return hi;
  if (w + lo == d) return std::max(lo, 0.0);
  return std::max(std::abs(w + lo - d) <= std::abs(w + hi - d) ? lo : hi, 0.0);
}

}  // namespace

DegreeDecomposition within_between_degrees(const Graph& g, const CommunityAssignment& a) {
  if (a.size() != g.num_nodes()) {
    throw DataError("assignment covers " + std::to_string(a.size()) + " nodes, graph has " +
                    std::to_string(g.num_nodes()));
  }
  const std::size_t n = g.num_nodes();
  DegreeDecomposition out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (const Edge& e : g.edges()) {
    if (a.group_of(e.u) == a.group_of(e.v)) {
      out.within[e.u] += e.weight;
      out.within[e.v] += e.weight;
    }
  }
  // between = d − within, corrected until within + between reproduces the
  // stored degree bit for bit.
  for (std::size_t i = 0; i < n; ++i) {
    out.between[i] = complement(g.degree(i), out.within[i]);
  }
  return out;
}

double percentile(std::span<const double> values, double prob) {
  if (values.empty()) throw DataError("percentile of an empty vector");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles degree_quartiles(const Graph& g) {
  if (g.num_nodes() == 0) throw DataError("degree quartiles of an empty graph");
  return {percentile(g.degrees(), 0.25), percentile(g.degrees(), 0.5),
          percentile(g.degrees(), 0.75)};
}

}  // namespace modsig
