#pragma once

#include <optional>
#include <vector>

#include "finitegap/curve.hpp"
#include "finitegap/paths.hpp"
#include "finitegap/types.hpp"

namespace finitegap {

// One branch cut: a pair of consecutive (sorted) branch points.  For the odd
// model the last cut runs from the last branch point toward infinity and is
// represented by a finite direction ray.
struct Cut {
  cplx e0, e1;     // endpoints (e1 meaningful only when finite)
  bool to_infinity = false;
  cplx mid;        // crossing station used by a-cycles (midpoint)
  double length;   // |e1 - e0| for finite cuts, a scale otherwise
};

// Base point specification: a finite point (x, sheet) or the single point at
// infinity of an odd-degree model.
struct BasePoint {
  bool at_infinity = false;
  cplx x = 0.0;
  int sheet = +1;
};

// Homology data realized as explicit paths: a-cycles are doubled traversals
// of the first g cuts; the canonical b-cycle through cut k is the telescoping
// sum of "bridge" loops joining consecutive cuts, each small enough to
// enclose no third cut, which keeps the basis symplectic by construction.
struct Homology {
  std::vector<Cut> cuts;                            // g+1 entries
  std::vector<std::vector<cplx>> bridges;           // g waypoint loops
  std::vector<cplx> bridge_seed_y;                  // tracked y at waypoint 0
};

// Periods, Abel map and Riemann constants of a hyperelliptic curve with a
// marked base point.  All downstream theta arguments are produced through
// this frame so that path conventions stay consistent.
class CurveFrame {
 public:
  CurveFrame(CurveModel curve, BasePoint base);

  const CurveModel& curve() const { return curve_; }
  int genus() const { return curve_.genus(); }
  const BasePoint& base() const { return base_; }
  const Homology& homology() const { return hom_; }

  const CMat& period_matrix() const { return B_; }       // normalized, symmetric
  const CMat& a_periods_raw() const { return A_per_; }   // of x^j dx / y
  const CMat& normalization() const { return C_; }       // omega_l = sum_j C(l,j) x^j dx/y
  const CVec& riemann_constants() const { return K_; }

  // Value vector of the normalized holomorphic differentials at (x,y):
  // omega_l = h_l dx with h_l = sum_j C(l,j) x^j / y.
  CVec omega_values(cplx x, cplx y) const;

  // Integrals of an arbitrary differential h(x,y) dx over the realized
  // cycles.  dim is the number of components h returns.
  CVec a_cycle(int k, const Integrand& h, int dim) const;
  CVec bridge_cycle(int j, const Integrand& h, int dim) const;
  CVec b_cycle(int k, const Integrand& h, int dim) const;

  // Abel map: integral of the normalized basis from the base point (routed
  // deterministically, sheet-exact: ends exactly at p including its sheet).
  CVec abel(const CurvePoint& p) const;
  // Abel integral between two explicit points.
  CVec abel_between(const CurvePoint& p, const CurvePoint& q) const;
  // Abel map of a divisor (sum over points).
  CVec abel_divisor(const std::vector<CurvePoint>& d) const;

  // Reduce modulo the period lattice Z^g + B Z^g.
  CVec reduce(const CVec& z) const;

  // Continue y from p along a routed path to x1.
  CurvePoint transport(const CurvePoint& p, cplx x1) const;
  // Routed waypoints from x0 to x1 clear of branch points.
  std::vector<cplx> route(cplx x0, cplx x1) const;
  double route_margin() const { return margin_; }

  // Anchor data for an infinity base (odd model): x(kappa) = kappa^{-2} with
  // anchor at kappa0 real positive; abel() of the anchor equals the radial
  // tail integral from infinity.
  double far_radius() const { return far_radius_; }

 private:
  void build_cuts();
  void build_bridges();
  void compute_bridge_composition();
  void compute_periods();
  void compute_riemann_constants();
  CVec abel_from_anchor(const CurvePoint& q) const;

  CurveModel curve_;
  BasePoint base_;
  Homology hom_;
  // b_k = sum_j comp_(k,j) * bridge_j: integer composition determined from
  // the numerically computed intersection numbers bridge_j . a_l so that
  // b_k . a_l = delta_{kl} exactly.
  RMat comp_;
  CMat A_per_, Btilde_, B_;
  CMat C_;
  RMat Yinv_;
  CVec K_;
  double margin_;
  double far_radius_ = 0.0;
  CurvePoint anchor_;   // finite anchor: base itself, or chart anchor for infinity
  CVec anchor_abel_;    // Abel value of the anchor (zero for finite base)
};

}  // namespace finitegap
