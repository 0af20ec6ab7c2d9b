#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "treebolic/geometry.hpp"
#include "treebolic/params.hpp"
#include "treebolic/tree.hpp"

namespace treebolic {

/// Finite-difference grid over a union of strips spanned by a full subtree,
/// truncated at |x| <= r. Each strip is a uniform (nx+1) x (nu+1) band in
/// (x, u); the row on each bifurcation line is shared between the strip
/// below and the p strips above it, so every interface grid point is a
/// single unknown.
struct StripGrid {
  struct LineRow {
    NodeId v = kNoNode;
    int height = 0;
    bool interior = false;  // all neighbours of v inside the subtree
    int first_node = 0;
    int below_strip = -1;            // strip with upper vertex v
    std::vector<int> above_strips;   // strips whose lower line is L_v
  };
  struct StripBand {
    NodeId upper = kNoNode;
    int height = 0;       // h(upper): band spans u in [(h-1) ln q, h ln q]
    int first_node = 0;   // rows j = 1..nu-1
    int line_below = -1;  // index into lines (L_{parent})
    int line_above = -1;  // index into lines (L_upper)
  };

  double r = 0.0;
  int nx = 0, nu = 0;
  double hx = 0.0, hu = 0.0;
  double log_q = 0.0;
  std::vector<LineRow> lines;
  std::vector<StripBand> strips;
  int total_nodes = 0;

  static StripGrid build(Tree& t, const Params& prm, const std::vector<NodeId>& subtree_vertices, double r, int nx,
                         int nu);

  /// Node id of grid point (i, j) of a strip; j = 0 and j = nu address the
  /// shared line rows below/above.
  int node_id(int strip, int i, int j) const;

  double x_of(int i) const { return -r + hx * i; }
  double u_of(int strip, int j) const { return (strips[strip].height - 1) * log_q + hu * j; }

  /// Grid point as a point of HT (vertex tree coordinate on line rows).
  HtPoint point_of(int strip, int i, int j) const;

  bool is_dirichlet(int strip, int i, int j) const;
};

struct solver_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RowKind : unsigned char { dirichlet, interior, interface };

struct AssembledSystem {
  Eigen::SparseMatrix<double> A;
  std::vector<RowKind> kind;
};

/// Interior rows get the 5-point stencil of e^(2u) dxx + duu + (alpha-1) du
/// (second-order central); interface rows get the one-sided second-order
/// Kirchhoff condition D-f = beta * sum over children of D+f; boundary rows
/// are identity. Corners take Dirichlet values.
AssembledSystem assemble(const StripGrid& grid, const Params& prm);

struct DiscreteSolution {
  StripGrid grid;
  Eigen::VectorXd values;
  double residual = 0.0;
  int iterations = 0;

  double at(int strip, int i, int j) const { return values[grid.node_id(strip, i, j)]; }
  /// Bilinear interpolation at a point of the covered region.
  double interpolate(Tree& t, const HtPoint& z) const;
};

/// Direct sparse solve of the Dirichlet problem; the achieved relative
/// residual must meet tol or solver_error is thrown.
DiscreteSolution solve_dirichlet(const StripGrid& grid, const Params& prm,
                                 const std::function<double(const HtPoint&)>& boundary_f, double tol = 1e-10,
                                 long max_iterations = 100000);

/// Interior range of a solution against its Dirichlet data range
/// (discrete maximum principle check).
bool max_principle_holds(const DiscreteSolution& sol, const Params& prm,
                         const std::function<double(const HtPoint&)>& boundary_f, double tol = 1e-10);

struct GreenColumn {
  DiscreteSolution solution;
  /// Exit density against dx on each boundary line (by line index), and
  /// against du on each strip side; trapezoid masses per part.
  std::vector<std::vector<double>> line_density;
  std::vector<double> line_mass;
  double side_mass = 0.0;
  double mass = 0.0;
};

/// Column of the discrete Green function: unit mass at the source node
/// under the measure weight beta^h e^((alpha-1)u) hx hu, zero boundary
/// data. Boundary normal differences weighted by the boundary measure give
/// a discrete Poisson kernel; its total mass tends to 1 as h -> 0.
GreenColumn discrete_green_column(const StripGrid& grid, const Params& prm, int strip, int i, int j);

}  // namespace treebolic
