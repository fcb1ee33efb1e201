#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "tbrw/rng.hpp"
#include "json.hpp"

namespace tbrw {

/// Dense vertex index, stable for the lifetime of a run. 0 is always the root.
using VertexId = std::uint32_t;
inline constexpr VertexId kRoot = 0;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

struct MoveOutcome {
  enum class Kind { ToParent, ToChild, ToFreshLeaf, SelfLoop };
  Kind kind;
  /// Destination vertex; for ToFreshLeaf the leaf materialized by this move,
  /// for SelfLoop the (unchanged) source vertex.
  VertexId target;
};

/// Rooted growing tree with an optional self-loop at the root.
///
/// Leaves that have never been visited and never grown are exchangeable, so
/// they are stored per parent as a counter ("pristine" leaves) rather than as
/// records; uniform edge choice materializes one on demand. This keeps
/// add_leaves O(1) in the leaf count, which heavy-tailed environments need.
/// Pristine leaves are real vertices: they count toward vertex_count, height
/// and degrees, merely have no id yet.
///
/// The self-loop contributes exactly one edge to the root's degree, so a root
/// carrying a loop and `l` leaves has degree l + 1. Only the root may carry a
/// self-loop.
class GrowingTree {
 public:
  static GrowingTree single_vertex_with_loop();
  static GrowingTree star_with_loop(std::uint32_t leaves);
  /// Path of `length` edges; vertex i sits at depth i, the walker-facing end
  /// is vertex `length`.
  static GrowingTree path(std::uint32_t length, bool loop_at_root);
  /// Explicit edge list over vertices 0..n-1 with root 0. Throws
  /// std::invalid_argument if the edges do not form a tree.
  static GrowingTree from_edges(
      const std::vector<std::pair<VertexId, VertexId>>& edges,
      bool root_self_loop);

  /// Attach `count` new (pristine) leaves to v. O(1).
  void add_leaves(VertexId v, std::uint64_t count);

  /// Choose one of v's incident edges uniformly (the self-loop counts once);
  /// a pristine slot materializes exactly one fresh leaf with birth time
  /// `now`.
  MoveOutcome uniform_neighbor(VertexId v, Rng& rng, std::uint64_t now);

  std::uint64_t degree(VertexId v) const;
  /// Number of neighboring leaves: pristine plus materialized children that
  /// are currently leaves. O(1).
  std::uint64_t leaf_count(VertexId v) const;
  /// leaf_count(v) >= 1 and exactly one non-leaf neighbor.
  bool is_quasi_star(VertexId v) const;

  std::uint32_t depth(VertexId v) const { return verts_[v].depth; }
  std::uint32_t height() const { return height_; }
  /// All vertices, pristine leaves included.
  std::uint64_t vertex_count() const { return vertex_count_; }
  std::uint32_t materialized_count() const {
    return static_cast<std::uint32_t>(verts_.size());
  }
  VertexId parent(VertexId v) const { return verts_[v].parent; }
  const std::vector<VertexId>& children(VertexId v) const {
    return verts_[v].children;
  }
  std::uint64_t pristine_count(VertexId v) const { return verts_[v].pristine; }
  std::uint64_t birth_time(VertexId v) const { return verts_[v].birth_time; }
  bool root_self_loop() const { return root_self_loop_; }
  bool is_leaf(VertexId v) const {
    return verts_[v].children.empty() && verts_[v].pristine == 0;
  }

  /// Graph distance via the lowest common ancestor.
  std::uint32_t dist(VertexId u, VertexId v) const;
  /// True if anc lies on the path from v to the root (v itself included).
  bool is_ancestor(VertexId anc, VertexId v) const;

  /// Histogram of degrees over all vertices, pristine leaves included
  /// (they have degree 1). Returned as sorted (degree, count) pairs.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> degree_histogram() const;

  nlohmann::json snapshot() const;

 private:
  struct Vertex {
    VertexId parent = kNoVertex;
    std::uint32_t depth = 0;
    std::uint64_t birth_time = 0;
    std::uint64_t pristine = 0;
    std::uint64_t leaf_children = 0;  // materialized children that are leaves
    std::vector<VertexId> children;
  };

  VertexId materialize_leaf(VertexId parent, std::uint64_t now);

  std::vector<Vertex> verts_;
  bool root_self_loop_ = false;
  std::uint64_t vertex_count_ = 0;
  std::uint32_t height_ = 0;
};

}  // namespace tbrw
