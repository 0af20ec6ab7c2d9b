#pragma once

#include <functional>
#include <optional>
#include <string>

#include "treebolic/geometry.hpp"
#include "treebolic/params.hpp"
#include "treebolic/tree.hpp"

namespace treebolic {

/// Transition law of the random walk induced on the vertex set: one step
/// down with probability 1/(1+a), up to each of the p children with
/// probability a/((1+a)p).
struct TreeWalkLaw {
  double down_prob;
  double up_prob_per_child;

  static TreeWalkLaw from(const Params& prm) {
    return TreeWalkLaw{1.0 / (1.0 + prm.a), prm.a / ((1.0 + prm.a) * prm.p)};
  }
};

/// Constants of the tree Martin kernels: b = max(a, 1), c = min(a, 1/a)/p.
struct MartinConstants {
  double b;
  double c;

  static MartinConstants from(const Params& prm) {
    return MartinConstants{std::max(prm.a, 1.0), std::min(prm.a, 1.0 / prm.a) / prm.p};
  }
};

/// Boundary parameter of a harmonic kernel: a tree end (varpi or an upper
/// end), a real boundary point zeta of the half plane, the point at
/// infinity, or the constant function 1.
struct BoundaryParam {
  enum class Kind { varpi, tree_end, real, infinity, one };

  Kind kind = Kind::one;
  std::optional<TreeEnd> end;
  double zeta = 0.0;

  static BoundaryParam varpi() { return BoundaryParam{Kind::varpi, std::nullopt, 0.0}; }
  static BoundaryParam tree_end(TreeEnd e) { return BoundaryParam{Kind::tree_end, std::move(e), 0.0}; }
  static BoundaryParam real(double zeta) { return BoundaryParam{Kind::real, std::nullopt, zeta}; }
  static BoundaryParam infinity() { return BoundaryParam{Kind::infinity, std::nullopt, 0.0}; }
  static BoundaryParam one() { return BoundaryParam{Kind::one, std::nullopt, 0.0}; }

  std::string label() const;
};

/// One-step probability of the induced vertex walk; 0 for non-adjacent pairs.
double rw_transition(Tree& t, NodeId v, NodeId u, const Params& prm);

/// Interpolation weight of the harmonic extension along an edge,
/// s = h(v) - h(w) in [0, 1]: (q^((alpha-1)s) - 1)/(q^(alpha-1) - 1), with
/// the linear branch s at alpha = 1.
double lambda_interp(double s, const Params& prm);

/// d lambda / ds, used for closed-form Kirchhoff residuals.
double lambda_interp_derivative(double s, const Params& prm);

/// Harmonic extension of vertex data to a metric tree point:
/// lambda * f(parent) + (1 - lambda) * f(upper).
double extend_tree_harmonic(Tree& t, const std::function<double(NodeId)>& f, TreePoint w, const Params& prm);

/// Martin kernel at a vertex: k(v, varpi) = b^(-h(v)),
/// k(v, xi) = b^(-h(v)) c^(h(o^xi) - h(v^xi)). Normalized to 1 at the root.
double martin_kernel_tree(Tree& t, NodeId v, const BoundaryParam& xi, const Params& prm);

/// Martin kernel harmonically extended to the metric tree.
double martin_kernel_tree_point(Tree& t, const TreePoint& w, const BoundaryParam& xi, const Params& prm);

/// Extended Poisson kernels of the half-plane operator with drift alpha
/// (the beta*p = 1 projection): P(z, infinity) = y^max(1-alpha, 0) and
/// P(z, zeta) = y^max(1-alpha,0) ((zeta^2+1)/((zeta-x)^2+y^2))^max(alpha/2, 1-alpha/2).
double poisson_kernel_half_plane(double x, double y, const BoundaryParam& zeta, double alpha);

/// Harmonic function on HT for the classified case beta * p = 1: tree-end
/// parameters lift the tree Martin kernel, real/infinity parameters lift the
/// half-plane Poisson kernel, and "one" (alpha = 1 only) is the constant 1.
/// Throws std::domain_error when beta * p != 1.
double minimal_harmonic_ht(Tree& t, const HtPoint& z, const BoundaryParam& xi, const Params& prm);

/// Whether the kernel with this parameter is minimal (varpi and infinity
/// are harmonic but not minimal; "one" is minimal only at alpha = 1).
bool is_minimal_parameter(const BoundaryParam& xi, const Params& prm);

using HtFunction = std::function<double(const HtPoint&)>;

/// Closure evaluating minimal_harmonic_ht for a fixed boundary parameter.
HtFunction ht_kernel_function(Tree& t, const BoundaryParam& xi, const Params& prm);

/// Pointwise sum of a half-plane harmonic lift and a tree harmonic lift.
HtFunction decompose_sum(std::function<double(double, double)> h_plane, std::function<double(const TreePoint&)> h_tree);

struct LiouvilleVerdict {
  bool weak_liouville;
  int ell_sign;  // sign of a - 1
};

/// Weak Liouville property holds iff a = beta p q^(alpha-1) = 1.
LiouvilleVerdict liouville_predicate(const Params& prm);

}  // namespace treebolic
