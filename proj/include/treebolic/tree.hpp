#pragma once

#include <cstdint>
#include <deque>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace treebolic {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Homogeneous tree T_p with horocycle index h, materialized lazily.
///
/// Every vertex has one predecessor (h decreases by 1) and p successors.
/// The reference vertex "o" sits at h = 0. Predecessors o-, o--, ... and
/// children are allocated on first access, so the infinite tree is backed by
/// the finite neighbourhood a computation actually touches. By convention
/// the extended spine keeps the previous top as child 0 of its new parent.
///
/// Accessors take a shared lock; materialization upgrades to an exclusive
/// lock. NodeIds stay valid for the lifetime of the tree.
class Tree {
 public:
  explicit Tree(int branching);

  int branching() const { return p_; }
  NodeId root() const { return 0; }

  int height(NodeId v) const;
  NodeId parent(NodeId v);
  NodeId child(NodeId v, int index);
  int child_index(NodeId v) const;
  bool has_parent(NodeId v) const;

  /// Minimal-height vertex on the geodesic between v and w.
  NodeId confluent(NodeId v, NodeId w);

  /// Graph distance between vertices.
  int distance(NodeId v, NodeId w);

  /// Address serialization: "o", "o-" (k-fold predecessor "o--..."), child
  /// words "o.0.1.0", combined "o-.1".
  std::string address(NodeId v);
  NodeId resolve(std::string_view address);

  std::size_t node_count() const;

 private:
  struct Node {
    int height;
    NodeId parent;
    int child_index;
    std::vector<NodeId> children;
  };

  void check(NodeId v) const {
    if (v < 0 || static_cast<std::size_t>(v) >= nodes_.size()) throw std::invalid_argument("tree: bad node id");
  }

  mutable std::shared_mutex mu_;
  std::deque<Node> nodes_;
  int p_;
};

/// A point of the metric tree. It lies on the closed edge
/// [parent(upper), upper], parametrised by its horocycle index
/// offset in [h(upper)-1, h(upper)]. Canonical form represents a point with
/// integral offset by the vertex itself (offset == h(upper)).
struct TreePoint {
  NodeId upper = kNoNode;
  double offset = 0.0;
};

TreePoint vertex_point(const Tree& t, NodeId v);
bool is_vertex(const Tree& t, const TreePoint& w);
TreePoint canonicalize(Tree& t, TreePoint w);
/// Lowest vertex at or below the point.
NodeId base_vertex(Tree& t, const TreePoint& w);

struct insufficient_end_prefix : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A boundary end of the tree. varpi is the unique downward end; an upper
/// end is the ray of strictly increasing height from an anchor vertex along
/// a child-index word. Periodic ends repeat their word forever; finite
/// prefixes throw insufficient_end_prefix when a deeper ray vertex is
/// required.
class TreeEnd {
 public:
  enum class Kind { varpi, upper };

  static TreeEnd varpi() { return TreeEnd(Kind::varpi, kNoNode, {}, false); }
  static TreeEnd upper(NodeId anchor, std::vector<int> word, bool periodic = true) {
    if (word.empty()) throw std::invalid_argument("tree end: upper end needs a non-empty word");
    return TreeEnd(Kind::upper, anchor, std::move(word), periodic);
  }

  Kind kind() const { return kind_; }
  NodeId anchor() const { return anchor_; }
  const std::vector<int>& word() const { return word_; }
  bool periodic() const { return periodic_; }

  int word_at(std::size_t i) const {
    if (i < word_.size()) return word_[i];
    if (!periodic_) throw insufficient_end_prefix("tree end: prefix too short; extend the end word");
    return word_[i % word_.size()];
  }

  /// Vertex at the given ray depth above the anchor (depth 0 = anchor).
  NodeId ray_vertex(Tree& t, int depth) const;

 private:
  TreeEnd(Kind k, NodeId a, std::vector<int> w, bool per) : kind_(k), anchor_(a), word_(std::move(w)), periodic_(per) {}

  Kind kind_;
  NodeId anchor_;
  std::vector<int> word_;
  bool periodic_;
};

/// Confluent v ^ xi of a vertex with an upper end.
NodeId confluent_with_end(Tree& t, NodeId v, const TreeEnd& end);

/// Checks that the vertex set is a full subtree (each vertex has all or
/// exactly one of its neighbours inside) and is connected. Fills interior
/// with the vertices whose whole neighbourhood is inside.
void validate_full_subtree(Tree& t, const std::vector<NodeId>& verts, std::unordered_set<NodeId>* interior);

}  // namespace treebolic
