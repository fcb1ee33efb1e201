#include "tbrw/tree.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace tbrw {

namespace {

std::uint64_t sat_add_u64(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t sum = a + b;
  return sum < a ? std::numeric_limits<std::uint64_t>::max() : sum;
}

}  // namespace

GrowingTree GrowingTree::single_vertex_with_loop() {
  GrowingTree t;
  t.verts_.resize(1);
  t.root_self_loop_ = true;
  t.vertex_count_ = 1;
  return t;
}

GrowingTree GrowingTree::star_with_loop(std::uint32_t leaves) {
  GrowingTree t = single_vertex_with_loop();
  for (VertexId i = 0; i < leaves; ++i) {
    Vertex leaf;
    leaf.parent = kRoot;
    leaf.depth = 1;
    t.verts_.push_back(leaf);
    t.verts_[kRoot].children.push_back(static_cast<VertexId>(i + 1));
  }
  t.verts_[kRoot].leaf_children = leaves;
  t.vertex_count_ = 1 + leaves;
  t.height_ = leaves > 0 ? 1 : 0;
  return t;
}

GrowingTree GrowingTree::path(std::uint32_t length, bool loop_at_root) {
  GrowingTree t;
  t.verts_.resize(length + 1);
  t.root_self_loop_ = loop_at_root;
  for (VertexId i = 1; i <= length; ++i) {
    t.verts_[i].parent = i - 1;
    t.verts_[i].depth = i;
    t.verts_[i - 1].children.push_back(i);
  }
  if (length > 0) t.verts_[length - 1].leaf_children = 1;
  t.vertex_count_ = length + 1;
  t.height_ = length;
  return t;
}

GrowingTree GrowingTree::from_edges(
    const std::vector<std::pair<VertexId, VertexId>>& edges,
    bool root_self_loop) {
  const std::size_t n = edges.size() + 1;
  std::vector<std::vector<VertexId>> adj(n);
  for (const auto& [a, b] : edges) {
    if (a >= n || b >= n || a == b)
      throw std::invalid_argument("explicit tree: invalid edge");
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  GrowingTree t;
  t.verts_.resize(n);
  t.root_self_loop_ = root_self_loop;
  t.vertex_count_ = n;
  // BFS from the root assigns parents and depths and detects cycles or
  // disconnected input.
  std::vector<bool> seen(n, false);
  std::vector<VertexId> queue{kRoot};
  seen[kRoot] = true;
  std::size_t head = 0;
  while (head < queue.size()) {
    const VertexId v = queue[head++];
    for (VertexId w : adj[v]) {
      if (w == t.verts_[v].parent) continue;
      if (seen[w])
        throw std::invalid_argument("explicit tree: input contains a cycle");
      seen[w] = true;
      t.verts_[w].parent = v;
      t.verts_[w].depth = t.verts_[v].depth + 1;
      t.verts_[v].children.push_back(w);
      t.height_ = std::max(t.height_, t.verts_[w].depth);
      queue.push_back(w);
    }
  }
  if (queue.size() != n)
    throw std::invalid_argument("explicit tree: input is disconnected");
  for (VertexId v = 0; v < t.verts_.size(); ++v)
    for (VertexId c : t.verts_[v].children)
      if (t.verts_[c].children.empty()) ++t.verts_[v].leaf_children;
  return t;
}

void GrowingTree::add_leaves(VertexId v, std::uint64_t count) {
  if (v >= verts_.size())
    throw std::invalid_argument("add_leaves: vertex not materialized");
  if (count == 0) return;
  Vertex& rec = verts_[v];
  const bool was_leaf = rec.children.empty() && rec.pristine == 0;
  rec.pristine = sat_add_u64(rec.pristine, count);
  if (was_leaf && rec.parent != kNoVertex) --verts_[rec.parent].leaf_children;
  vertex_count_ = sat_add_u64(vertex_count_, count);
  height_ = std::max(height_, rec.depth + 1);
}

VertexId GrowingTree::materialize_leaf(VertexId parent, std::uint64_t now) {
  const auto id = static_cast<VertexId>(verts_.size());
  Vertex leaf;
  leaf.parent = parent;
  leaf.depth = verts_[parent].depth + 1;
  leaf.birth_time = now;
  verts_.push_back(leaf);
  Vertex& p = verts_[parent];
  --p.pristine;
  p.children.push_back(id);
  ++p.leaf_children;
  return id;
}

MoveOutcome GrowingTree::uniform_neighbor(VertexId v, Rng& rng,
                                          std::uint64_t now) {
  if (v >= verts_.size())
    throw std::invalid_argument("uniform_neighbor: vertex not materialized");
  const Vertex& rec = verts_[v];
  const std::uint64_t deg = degree(v);
  std::uint64_t idx = rng.below(deg);
  if (idx < rec.pristine)
    return {MoveOutcome::Kind::ToFreshLeaf, materialize_leaf(v, now)};
  idx -= rec.pristine;
  if (idx < rec.children.size())
    return {MoveOutcome::Kind::ToChild, rec.children[idx]};
  idx -= rec.children.size();
  if (rec.parent != kNoVertex) {
    if (idx == 0) return {MoveOutcome::Kind::ToParent, rec.parent};
    --idx;
  }
  return {MoveOutcome::Kind::SelfLoop, v};
}

std::uint64_t GrowingTree::degree(VertexId v) const {
  const Vertex& rec = verts_[v];
  std::uint64_t deg = rec.pristine;
  deg = sat_add_u64(deg, rec.children.size());
  if (rec.parent != kNoVertex) deg = sat_add_u64(deg, 1);
  if (v == kRoot && root_self_loop_) deg = sat_add_u64(deg, 1);
  return deg;
}

std::uint64_t GrowingTree::leaf_count(VertexId v) const {
  return sat_add_u64(verts_[v].pristine, verts_[v].leaf_children);
}

bool GrowingTree::is_quasi_star(VertexId v) const {
  const std::uint64_t leaves = leaf_count(v);
  return leaves >= 1 && degree(v) == sat_add_u64(leaves, 1);
}

std::uint32_t GrowingTree::dist(VertexId u, VertexId v) const {
  if (u >= verts_.size() || v >= verts_.size())
    throw std::invalid_argument("dist: vertex not materialized");
  std::uint32_t d = 0;
  while (verts_[u].depth > verts_[v].depth) {
    u = verts_[u].parent;
    ++d;
  }
  while (verts_[v].depth > verts_[u].depth) {
    v = verts_[v].parent;
    ++d;
  }
  while (u != v) {
    u = verts_[u].parent;
    v = verts_[v].parent;
    d += 2;
  }
  return d;
}

bool GrowingTree::is_ancestor(VertexId anc, VertexId v) const {
  while (verts_[v].depth > verts_[anc].depth) v = verts_[v].parent;
  return v == anc;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>>
GrowingTree::degree_histogram() const {
  std::map<std::uint64_t, std::uint64_t> hist;
  std::uint64_t pristine_total = 0;
  for (VertexId v = 0; v < verts_.size(); ++v) {
    ++hist[degree(v)];
    pristine_total = sat_add_u64(pristine_total, verts_[v].pristine);
  }
  if (pristine_total > 0) hist[1] = sat_add_u64(hist[1], pristine_total);
  return {hist.begin(), hist.end()};
}

nlohmann::json GrowingTree::snapshot() const {
  nlohmann::json verts = nlohmann::json::array();
  for (VertexId v = 0; v < verts_.size(); ++v) {
    const Vertex& rec = verts_[v];
    verts.push_back({{"id", v},
                     {"parent", rec.parent == kNoVertex
                                    ? nlohmann::json(nullptr)
                                    : nlohmann::json(rec.parent)},
                     {"depth", rec.depth},
                     {"birth_time", rec.birth_time},
                     {"pristine", rec.pristine}});
  }
  return {{"vertices", std::move(verts)},
          {"root_self_loop", root_self_loop_},
          {"vertex_count", vertex_count_},
          {"height", height_}};
}

}  // namespace tbrw
