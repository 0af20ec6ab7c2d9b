#include "treebolic/tree.hpp"

#include <cmath>
#include <cstdlib>
#include <deque>

namespace treebolic {

Tree::Tree(int branching) : p_(branching) {
  if (branching < 1) throw std::domain_error("tree: branching must be >= 1");
  nodes_.push_back(Node{0, kNoNode, 0, std::vector<NodeId>(static_cast<std::size_t>(p_), kNoNode)});
}

int Tree::height(NodeId v) const {
  std::shared_lock lock(mu_);
  check(v);
  return nodes_[v].height;
}

bool Tree::has_parent(NodeId v) const {
  std::shared_lock lock(mu_);
  check(v);
  return nodes_[v].parent != kNoNode;
}

NodeId Tree::parent(NodeId v) {
  {
    std::shared_lock lock(mu_);
    check(v);
    if (nodes_[v].parent != kNoNode) return nodes_[v].parent;
  }
  std::unique_lock lock(mu_);
  if (nodes_[v].parent != kNoNode) return nodes_[v].parent;
  // Only the current top of the ancestor spine lacks a parent; extend it.
  const NodeId id = static_cast<NodeId>(nodes_.size());
  const int h = nodes_[v].height;
  nodes_.push_back(Node{h - 1, kNoNode, 0, std::vector<NodeId>(static_cast<std::size_t>(p_), kNoNode)});
  nodes_[id].children[0] = v;
  nodes_[v].parent = id;
  nodes_[v].child_index = 0;
  return id;
}

NodeId Tree::child(NodeId v, int index) {
  if (index < 0 || index >= p_) throw std::invalid_argument("tree: child index out of range");
  {
    std::shared_lock lock(mu_);
    check(v);
    const NodeId c = nodes_[v].children[static_cast<std::size_t>(index)];
    if (c != kNoNode) return c;
  }
  std::unique_lock lock(mu_);
  NodeId c = nodes_[v].children[static_cast<std::size_t>(index)];
  if (c != kNoNode) return c;
  c = static_cast<NodeId>(nodes_.size());
  const int h = nodes_[v].height;
  nodes_.push_back(Node{h + 1, v, index, std::vector<NodeId>(static_cast<std::size_t>(p_), kNoNode)});
  nodes_[v].children[static_cast<std::size_t>(index)] = c;
  return c;
}

int Tree::child_index(NodeId v) const {
  std::shared_lock lock(mu_);
  check(v);
  return nodes_[v].child_index;
}

NodeId Tree::confluent(NodeId v, NodeId w) {
  while (height(v) > height(w)) v = parent(v);
  while (height(w) > height(v)) w = parent(w);
  while (v != w) {
    v = parent(v);
    w = parent(w);
  }
  return v;
}

int Tree::distance(NodeId v, NodeId w) {
  const NodeId c = confluent(v, w);
  return (height(v) - height(c)) + (height(w) - height(c));
}

std::string Tree::address(NodeId v) {
  const NodeId c = confluent(root(), v);
  const int ups = -height(c);
  std::vector<int> word;
  for (NodeId x = v; x != c; x = parent(x)) word.push_back(child_index(x));
  std::string s = "o";
  s.append(static_cast<std::size_t>(ups), '-');
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    s += '.';
    s += std::to_string(*it);
  }
  return s;
}

NodeId Tree::resolve(std::string_view addr) {
  if (addr.empty() || addr[0] != 'o') throw std::invalid_argument("tree address must start with 'o'");
  std::size_t i = 1;
  NodeId node = root();
  while (i < addr.size() && addr[i] == '-') {
    node = parent(node);
    ++i;
  }
  while (i < addr.size()) {
    if (addr[i] != '.') throw std::invalid_argument("malformed tree address");
    ++i;
    std::size_t j = i;
    while (j < addr.size() && addr[j] >= '0' && addr[j] <= '9') ++j;
    if (j == i) throw std::invalid_argument("malformed tree address");
    const int idx = std::atoi(std::string(addr.substr(i, j - i)).c_str());
    node = child(node, idx);
    i = j;
  }
  return node;
}

std::size_t Tree::node_count() const {
  std::shared_lock lock(mu_);
  return nodes_.size();
}

TreePoint vertex_point(const Tree& t, NodeId v) { return TreePoint{v, static_cast<double>(t.height(v))}; }

bool is_vertex(const Tree& t, const TreePoint& w) { return w.offset == static_cast<double>(t.height(w.upper)); }

TreePoint canonicalize(Tree& t, TreePoint w) {
  const double hu = static_cast<double>(t.height(w.upper));
  if (std::abs(w.offset - hu) <= 1e-12) return TreePoint{w.upper, hu};
  if (std::abs(w.offset - (hu - 1.0)) <= 1e-12) return vertex_point(t, t.parent(w.upper));
  if (w.offset < hu - 1.0 || w.offset > hu) throw std::domain_error("tree point: offset outside its edge");
  return w;
}

NodeId base_vertex(Tree& t, const TreePoint& w) { return is_vertex(t, w) ? w.upper : t.parent(w.upper); }

NodeId TreeEnd::ray_vertex(Tree& t, int depth) const {
  if (kind_ != Kind::upper) throw std::invalid_argument("tree end: varpi has no upward ray");
  NodeId node = anchor_;
  for (int i = 0; i < depth; ++i) node = t.child(node, word_at(static_cast<std::size_t>(i)));
  return node;
}

NodeId confluent_with_end(Tree& t, NodeId v, const TreeEnd& end) {
  if (end.kind() != TreeEnd::Kind::upper) throw std::invalid_argument("confluent_with_end: needs an upper end");
  // The confluent stabilizes once the ray outgrows the anchor-to-v span.
  const int depth = t.distance(end.anchor(), v) + 2;
  return t.confluent(v, end.ray_vertex(t, depth));
}

void validate_full_subtree(Tree& t, const std::vector<NodeId>& verts, std::unordered_set<NodeId>* interior) {
  if (verts.empty()) throw std::invalid_argument("subtree: empty vertex set");
  std::unordered_set<NodeId> set(verts.begin(), verts.end());
  if (interior) interior->clear();
  bool any_interior = false;
  for (const NodeId v : verts) {
    int inside = set.count(t.parent(v)) ? 1 : 0;
    for (int i = 0; i < t.branching(); ++i)
      if (set.count(t.child(v, i))) ++inside;
    if (inside == 1 + t.branching()) {
      any_interior = true;
      if (interior) interior->insert(v);
    } else if (inside != 1) {
      throw std::invalid_argument("subtree is not full: vertex " + t.address(v) + " has " + std::to_string(inside) +
                                  " neighbours inside");
    }
  }
  if (!any_interior) throw std::invalid_argument("subtree has no interior vertex");
  // Connectivity by BFS over in-set neighbours.
  std::unordered_set<NodeId> seen;
  std::deque<NodeId> queue{verts.front()};
  seen.insert(verts.front());
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    auto visit = [&](NodeId u) {
      if (set.count(u) && !seen.count(u)) {
        seen.insert(u);
        queue.push_back(u);
      }
    };
    visit(t.parent(v));
    for (int i = 0; i < t.branching(); ++i) visit(t.child(v, i));
  }
  if (seen.size() != set.size()) throw std::invalid_argument("subtree is not connected");
}

}  // namespace treebolic
