#pragma once

#include <cmath>
#include <stdexcept>

namespace treebolic {

/// Model parameters for the drifted Laplacian on treebolic space HT(q, p).
///
/// q > 1 scales the strip heights (bifurcation lines sit at y = q^k), p is
/// the tree branching number, alpha is the vertical drift exponent and beta
/// the Kirchhoff weight at bifurcation lines. The derived quantity
/// a = beta * p * q^(alpha-1) governs the vertical behaviour of the
/// diffusion; a = 1 is the zero-drift (weak Liouville) threshold.
struct Params {
  double q = 2.0;
  int p = 2;
  double alpha = 1.0;
  double beta = 1.0;
  double a = 2.0;      // beta * p * q^(alpha - 1)
  double log_q = 0.0;  // cached ln q
};

inline Params make_params(double q, int p, double alpha, double beta) {
  if (!(q > 1.0)) throw std::domain_error("params: q must be > 1");
  if (p < 1) throw std::domain_error("params: p must be >= 1");
  if (!(beta > 0.0)) throw std::domain_error("params: beta must be > 0");
  Params prm;
  prm.q = q;
  prm.p = p;
  prm.alpha = alpha;
  prm.beta = beta;
  prm.a = beta * static_cast<double>(p) * std::pow(q, alpha - 1.0);
  prm.log_q = std::log(q);
  return prm;
}

}  // namespace treebolic
