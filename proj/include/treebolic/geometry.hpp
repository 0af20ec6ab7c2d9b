#pragma once

#include "treebolic/params.hpp"
#include "treebolic/tree.hpp"

namespace treebolic {

/// Point of the hyperbolic upper half plane, y > 0.
struct PlanePoint {
  double x = 0.0;
  double y = 1.0;
};

/// Point of treebolic space in log-vertical coordinates: z = (x + i e^u, w)
/// with the defining constraint h(w) = u / ln q.
struct HtPoint {
  double x = 0.0;
  double u = 0.0;
  TreePoint w;
};

/// Half-plane distance arccosh(1 + (dx^2 + dy^2) / (2 y1 y2)).
double hyperbolic_distance(const PlanePoint& z1, const PlanePoint& z2);

/// Validates the h(w) = u / ln q constraint (tolerance 1e-12) and
/// canonicalizes the tree coordinate.
HtPoint make_ht_point(Tree& t, const Params& prm, double x, double u, TreePoint w);

/// The origin (i, o).
HtPoint origin_point(Tree& t);

/// Treebolic distance. Points on a common descending chain of strips are at
/// plain hyperbolic distance; otherwise the connecting path passes through
/// the line at the height of the tree confluent, and the crossing abscissa
/// is found by a bracketed golden-section search (tolerance 1e-10).
double ht_distance(Tree& t, const Params& prm, const HtPoint& p1, const HtPoint& p2);

/// Reference measure density beta^h(v) * y^alpha, where S_v is the strip
/// containing the point; points on a bifurcation line use the strip below.
double phi_density(Tree& t, const Params& prm, const HtPoint& z);

/// Horizontal translation z -> z + b, an isometry.
HtPoint horizontal_translate(const HtPoint& z, double b);

/// Do the two tree points lie on a common descending chain (one on the
/// geodesic from the other toward varpi)? Such point pairs share a
/// half-plane copy inside HT.
bool on_common_chain(Tree& t, TreePoint a, TreePoint b);

}  // namespace treebolic
