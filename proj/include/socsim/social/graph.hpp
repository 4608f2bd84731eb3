#pragma once

#include <algorithm>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "socsim/contracts.hpp"

namespace socsim {

// Undirected social graph with per-node cluster labels. Edges are kept
// sorted so that edge indices are stable across runs.
class SocialGraph {
 public:
  SocialGraph(int node_count, std::set<std::pair<int, int>> edge_set,
              std::vector<int> clusters)
      : node_count_(node_count), clusters_(std::move(clusters)) {
    require(node_count >= 2, "graph: need at least two nodes");
    require(static_cast<int>(clusters_.size()) == node_count,
            "graph: cluster labels must cover all nodes");
    adjacency_.resize(node_count);
    for (const auto& [a, b] : edge_set) {
      require(a != b, "graph: self-loops are not allowed");
      require(a >= 0 && b >= 0 && a < node_count && b < node_count,
              "graph: edge endpoint out of range");
      require(a < b, "graph: edges must be stored as (min, max)");
      edges_.emplace_back(a, b);
      adjacency_[a].push_back(b);
      adjacency_[b].push_back(a);
    }
    for (auto& n : adjacency_) std::sort(n.begin(), n.end());
    require(connected(), "graph: must be connected");
  }

  // Two (or more) complete cliques bridged by rewired edges. For the default
  // (2, 7) layout the rewiring removes the intra-clique edges (0,1) and
  // (7,8) and adds (0,7) and (0,13), making agents 0, 7 and 13 the
  // inter-cluster bridge endpoints.
  static SocialGraph connected_caveman(int n_cliques = 2, int clique_size = 7) {
    require(n_cliques >= 2, "caveman: need at least two cliques");
    require(clique_size >= 2, "caveman: cliques need at least two nodes");

    const int n = n_cliques * clique_size;
    std::set<std::pair<int, int>> edges;
    std::vector<int> clusters(n);
    for (int c = 0; c < n_cliques; ++c) {
      const int first = c * clique_size;
      for (int i = 0; i < clique_size; ++i) {
        clusters[first + i] = c;
        for (int j = i + 1; j < clique_size; ++j)
          edges.insert({first + i, first + j});
      }
      // Two-node cliques keep their only edge; removal would disconnect.
      if (clique_size > 2) edges.erase({first, first + 1});
    }
    for (int c = 0; c + 1 < n_cliques; ++c) {
      const int a = c * clique_size;
      const int b = (c + 1) * clique_size;
      edges.insert({std::min(a, b), std::max(a, b)});
    }
    edges.insert({0, n - 1});  // closure through the last clique's tail

    return SocialGraph(n, std::move(edges), std::move(clusters));
  }

  int node_count() const { return node_count_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int k) const {
    require(k >= 0 && k < node_count_, "graph: node out of range");
    return adjacency_[k];
  }
  int degree(int k) const { return static_cast<int>(neighbors(k).size()); }
  int cluster_of(int k) const {
    require(k >= 0 && k < node_count_, "graph: node out of range");
    return clusters_[k];
  }
  int cluster_count() const {
    return *std::max_element(clusters_.begin(), clusters_.end()) + 1;
  }
  bool has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(a, b));
  }

 private:
  bool connected() const {
    std::vector<bool> seen(node_count_, false);
    std::queue<int> q;
    q.push(0);
    seen[0] = true;
    int visited = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adjacency_[v]) {
        if (!seen[w]) {
          seen[w] = true;
          ++visited;
          q.push(w);
        }
      }
    }
    return visited == node_count_;
  }

  int node_count_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> clusters_;
};

}  // namespace socsim
