#include "treebolic/fdsolver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include <Eigen/SparseLU>

namespace treebolic {

StripGrid StripGrid::build(Tree& t, const Params& prm, const std::vector<NodeId>& verts, double r, int nx, int nu) {
  if (nx < 4 || nu < 4) throw std::invalid_argument("grid: need nx >= 4 and nu >= 4");
  if (!(r > 0)) throw std::invalid_argument("grid: need r > 0");
  std::unordered_set<NodeId> interior;
  validate_full_subtree(t, verts, &interior);

  StripGrid g;
  g.r = r;
  g.nx = nx;
  g.nu = nu;
  g.hx = 2.0 * r / nx;
  g.hu = prm.log_q / nu;
  g.log_q = prm.log_q;

  // Deterministic vertex order: by (height, address).
  std::vector<NodeId> order(verts.begin(), verts.end());
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const int ha = t.height(a), hb = t.height(b);
    if (ha != hb) return ha < hb;
    return t.address(a) < t.address(b);
  });

  std::unordered_map<NodeId, int> line_of;
  int next = 0;
  for (const NodeId v : order) {
    LineRow row;
    row.v = v;
    row.height = t.height(v);
    row.interior = interior.count(v) > 0;
    row.first_node = next;
    next += nx + 1;
    line_of[v] = static_cast<int>(g.lines.size());
    g.lines.push_back(row);
  }
  std::unordered_set<NodeId> set(verts.begin(), verts.end());
  for (const NodeId v : order) {
    if (!set.count(t.parent(v))) continue;  // no strip below the lowest vertex
    StripBand band;
    band.upper = v;
    band.height = t.height(v);
    band.first_node = next;
    next += (nu - 1) * (nx + 1);
    band.line_below = line_of.at(t.parent(v));
    band.line_above = line_of.at(v);
    const int s = static_cast<int>(g.strips.size());
    g.lines[band.line_above].below_strip = s;
    g.lines[band.line_below].above_strips.push_back(s);
    g.strips.push_back(band);
  }
  g.total_nodes = next;
  if (g.strips.empty()) throw std::invalid_argument("grid: subtree spans no strip");
  return g;
}

int StripGrid::node_id(int strip, int i, int j) const {
  const StripBand& band = strips[strip];
  if (j == 0) return lines[band.line_below].first_node + i;
  if (j == nu) return lines[band.line_above].first_node + i;
  return band.first_node + (j - 1) * (nx + 1) + i;
}

HtPoint StripGrid::point_of(int strip, int i, int j) const {
  const double x = x_of(i);
  const double u = u_of(strip, j);
  if (j == 0) return HtPoint{x, u, TreePoint{lines[strips[strip].line_below].v, u / log_q}};
  // j == nu and band rows both carry the strip's upper vertex; on the top
  // line the offset is integral, i.e. the vertex itself.
  return HtPoint{x, u, TreePoint{strips[strip].upper, u / log_q}};
}

bool StripGrid::is_dirichlet(int strip, int i, int j) const {
  if (i == 0 || i == nx) return true;
  if (j == 0) return !lines[strips[strip].line_below].interior;
  if (j == nu) return !lines[strips[strip].line_above].interior;
  return false;
}

AssembledSystem assemble(const StripGrid& g, const Params& prm) {
  AssembledSystem sys;
  sys.kind.assign(static_cast<std::size_t>(g.total_nodes), RowKind::dirichlet);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(g.total_nodes) * 6);

  // Line rows.
  for (const auto& line : g.lines) {
    for (int i = 0; i <= g.nx; ++i) {
      const int row = line.first_node + i;
      if (!line.interior || i == 0 || i == g.nx) {
        trip.emplace_back(row, row, 1.0);
        continue;
      }
      // Kirchhoff flux matching with 3-point one-sided derivatives in u:
      //   (3 f0 - 4 f_b1 + f_b2)/(2hu) = beta * sum (-3 f0 + 4 f_a1 - f_a2)/(2hu)
      sys.kind[static_cast<std::size_t>(row)] = RowKind::interface;
      const double w = 1.0 / (2.0 * g.hu);
      const int sb = line.below_strip;
      double diag = 3.0 * w;
      trip.emplace_back(row, g.node_id(sb, i, g.nu - 1), -4.0 * w);
      trip.emplace_back(row, g.node_id(sb, i, g.nu - 2), 1.0 * w);
      for (const int sa : line.above_strips) {
        diag += 3.0 * prm.beta * w;
        trip.emplace_back(row, g.node_id(sa, i, 1), -4.0 * prm.beta * w);
        trip.emplace_back(row, g.node_id(sa, i, 2), 1.0 * prm.beta * w);
      }
      trip.emplace_back(row, row, diag);
    }
  }

  // Strip interior rows.
  for (int s = 0; s < static_cast<int>(g.strips.size()); ++s) {
    for (int j = 1; j <= g.nu - 1; ++j) {
      const double u = g.u_of(s, j);
      const double cx = std::exp(2.0 * u) / (g.hx * g.hx);
      const double cu = 1.0 / (g.hu * g.hu);
      const double cd = (prm.alpha - 1.0) / (2.0 * g.hu);
      for (int i = 0; i <= g.nx; ++i) {
        const int row = g.node_id(s, i, j);
        if (i == 0 || i == g.nx) {
          trip.emplace_back(row, row, 1.0);
          continue;
        }
        sys.kind[static_cast<std::size_t>(row)] = RowKind::interior;
        trip.emplace_back(row, row, -2.0 * cx - 2.0 * cu);
        trip.emplace_back(row, g.node_id(s, i - 1, j), cx);
        trip.emplace_back(row, g.node_id(s, i + 1, j), cx);
        trip.emplace_back(row, g.node_id(s, i, j + 1), cu + cd);
        trip.emplace_back(row, g.node_id(s, i, j - 1), cu - cd);
      }
    }
  }

  sys.A.resize(g.total_nodes, g.total_nodes);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();
  return sys;
}

namespace {

Eigen::VectorXd solve_system(const AssembledSystem& sys, const Eigen::VectorXd& rhs, double tol, double rhs_scale) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
  solver.analyzePattern(sys.A);
  solver.factorize(sys.A);
  if (solver.info() != Eigen::Success) throw solver_error("fd: factorization failed");
  Eigen::VectorXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) throw solver_error("fd: solve failed");
  const double denom = std::max(rhs_scale, rhs.norm());
  const double rel = denom > 0 ? (sys.A * x - rhs).norm() / denom : 0.0;
  if (rel > tol) throw solver_error("fd: residual " + std::to_string(rel) + " above tolerance");
  return x;
}

}  // namespace

DiscreteSolution solve_dirichlet(const StripGrid& g, const Params& prm,
                                 const std::function<double(const HtPoint&)>& boundary_f, double tol,
                                 long /*max_iterations*/) {
  const AssembledSystem sys = assemble(g, prm);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.total_nodes);
  for (int s = 0; s < static_cast<int>(g.strips.size()); ++s) {
    for (int j = 0; j <= g.nu; ++j) {
      for (int i = 0; i <= g.nx; ++i) {
        if (!g.is_dirichlet(s, i, j)) continue;
        rhs[g.node_id(s, i, j)] = boundary_f(g.point_of(s, i, j));
      }
    }
  }
  DiscreteSolution sol;
  sol.grid = g;
  sol.values = solve_system(sys, rhs, tol, 1.0);
  sol.residual = (sys.A * sol.values - rhs).norm() / std::max(1.0, rhs.norm());
  sol.iterations = 1;  // direct factorization
  return sol;
}

double DiscreteSolution::interpolate(Tree& t, const HtPoint& z) const {
  const TreePoint w = canonicalize(t, z.w);
  // Locate the strip: a vertex point sits on a line; use the strip below it
  // when that strip is in the grid, otherwise a strip above.
  int strip = -1;
  if (is_vertex(t, w)) {
    for (int s = 0; s < static_cast<int>(grid.strips.size()); ++s) {
      const auto& band = grid.strips[s];
      if (band.upper == w.upper || grid.lines[band.line_below].v == w.upper) {
        strip = s;
        break;
      }
    }
  } else {
    for (int s = 0; s < static_cast<int>(grid.strips.size()); ++s)
      if (grid.strips[s].upper == w.upper) {
        strip = s;
        break;
      }
  }
  if (strip < 0) throw std::invalid_argument("interpolate: point outside the grid");
  const double u_lo = (grid.strips[strip].height - 1) * grid.log_q;
  double fi = (z.x + grid.r) / grid.hx;
  double fj = (z.u - u_lo) / grid.hu;
  fi = std::min(std::max(fi, 0.0), static_cast<double>(grid.nx));
  fj = std::min(std::max(fj, 0.0), static_cast<double>(grid.nu));
  const int i0 = std::min(static_cast<int>(fi), grid.nx - 1);
  const int j0 = std::min(static_cast<int>(fj), grid.nu - 1);
  const double ax = fi - i0, au = fj - j0;
  return (1 - ax) * (1 - au) * at(strip, i0, j0) + ax * (1 - au) * at(strip, i0 + 1, j0) +
         (1 - ax) * au * at(strip, i0, j0 + 1) + ax * au * at(strip, i0 + 1, j0 + 1);
}

bool max_principle_holds(const DiscreteSolution& sol, const Params& prm,
                         const std::function<double(const HtPoint&)>& boundary_f, double tol) {
  const StripGrid& g = sol.grid;
  double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
  double imin = bmin, imax = -bmin;
  // Shared line nodes are visited once per adjacent strip; min/max updates
  // are idempotent so no dedup is needed.
  for (int s = 0; s < static_cast<int>(g.strips.size()); ++s) {
    for (int j = 0; j <= g.nu; ++j) {
      for (int i = 0; i <= g.nx; ++i) {
        const double v = sol.at(s, i, j);
        if (g.is_dirichlet(s, i, j)) {
          const double fb = boundary_f(g.point_of(s, i, j));
          bmin = std::min(bmin, fb);
          bmax = std::max(bmax, fb);
        } else {
          imin = std::min(imin, v);
          imax = std::max(imax, v);
        }
      }
    }
  }
  (void)prm;
  return imin >= bmin - tol && imax <= bmax + tol;
}

GreenColumn discrete_green_column(const StripGrid& g, const Params& prm, int strip, int i, int j) {
  if (strip < 0 || strip >= static_cast<int>(g.strips.size())) throw std::invalid_argument("green: bad strip");
  if (i <= 0 || i >= g.nx || j <= 0 || j >= g.nu) throw std::invalid_argument("green: source must be strictly interior");
  const AssembledSystem sys = assemble(g, prm);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(g.total_nodes);
  const double u_src = g.u_of(strip, j);
  const double c_src = std::pow(prm.beta, g.strips[strip].height);
  const double w_src = c_src * std::exp((prm.alpha - 1.0) * u_src) * g.hx * g.hu;
  rhs[g.node_id(strip, i, j)] = -1.0 / w_src;

  GreenColumn col;
  col.solution.grid = g;
  col.solution.values = solve_system(sys, rhs, 1e-8, 1.0 / w_src);
  col.solution.residual = (sys.A * col.solution.values - rhs).norm() / rhs.norm();
  col.solution.iterations = 1;
  const Eigen::VectorXd& G = col.solution.values;

  col.line_density.assign(g.lines.size(), {});
  col.line_mass.assign(g.lines.size(), 0.0);
  const double w2 = 1.0 / (2.0 * g.hu);
  for (std::size_t l = 0; l < g.lines.size(); ++l) {
    const auto& line = g.lines[l];
    if (line.interior) continue;
    std::vector<double> dens(static_cast<std::size_t>(g.nx) + 1, 0.0);
    if (line.below_strip >= 0) {
      // Top boundary line, approached from the strip below it.
      const int s = line.below_strip;
      const double c = std::pow(prm.beta, g.strips[s].height);
      const double rho = c * std::exp((prm.alpha - 1.0) * g.u_of(s, g.nu));
      for (int ii = 0; ii <= g.nx; ++ii) {
        const double d_minus =
            (3.0 * G[g.node_id(s, ii, g.nu)] - 4.0 * G[g.node_id(s, ii, g.nu - 1)] + G[g.node_id(s, ii, g.nu - 2)]) * w2;
        dens[static_cast<std::size_t>(ii)] = -rho * d_minus;
      }
    } else {
      // Bottom boundary line, approached from the strip above it.
      const int s = line.above_strips.at(0);
      const double c = std::pow(prm.beta, g.strips[s].height);
      const double rho = c * std::exp((prm.alpha - 1.0) * g.u_of(s, 0));
      for (int ii = 0; ii <= g.nx; ++ii) {
        const double d_plus =
            (-3.0 * G[g.node_id(s, ii, 0)] + 4.0 * G[g.node_id(s, ii, 1)] - G[g.node_id(s, ii, 2)]) * w2;
        dens[static_cast<std::size_t>(ii)] = rho * d_plus;
      }
    }
    double mass = 0.0;
    for (int ii = 0; ii <= g.nx; ++ii) {
      const double wgt = (ii == 0 || ii == g.nx) ? 0.5 : 1.0;
      mass += wgt * dens[static_cast<std::size_t>(ii)] * g.hx;
    }
    col.line_density[l] = std::move(dens);
    col.line_mass[l] = mass;
  }

  // Vertical sides, per strip sheet.
  const double wx = 1.0 / (2.0 * g.hx);
  double side = 0.0;
  for (int s = 0; s < static_cast<int>(g.strips.size()); ++s) {
    const double c = std::pow(prm.beta, g.strips[s].height);
    for (int jj = 0; jj <= g.nu; ++jj) {
      const double rho = c * std::exp((prm.alpha + 1.0) * g.u_of(s, jj));
      const double right =
          -(3.0 * G[g.node_id(s, g.nx, jj)] - 4.0 * G[g.node_id(s, g.nx - 1, jj)] + G[g.node_id(s, g.nx - 2, jj)]) * wx;
      const double left =
          (-3.0 * G[g.node_id(s, 0, jj)] + 4.0 * G[g.node_id(s, 1, jj)] - G[g.node_id(s, 2, jj)]) * wx;
      const double wgt = (jj == 0 || jj == g.nu) ? 0.5 : 1.0;
      side += wgt * rho * (right + left) * g.hu;
    }
  }
  col.side_mass = side;
  col.mass = side;
  for (const double m : col.line_mass) col.mass += m;
  return col;
}

}  // namespace treebolic
