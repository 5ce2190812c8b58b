#pragma once

#include <vector>

#include "finitegap/types.hpp"

namespace finitegap {

// A point on the two-sheeted curve y^2 = f(x).
struct CurvePoint {
  cplx x;
  cplx y;
};

// Hyperelliptic curve y^2 = f(x) with simple roots, deg f = 2g+1 (one branch
// point at infinity) or 2g+2.  Coefficients are listed by ascending power.
class CurveModel {
 public:
  explicit CurveModel(CVec coeffs);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  int genus() const { return (degree() - 1) / 2; }
  bool odd_model() const { return degree() % 2 == 1; }
  const CVec& coeffs() const { return coeffs_; }
  cplx leading() const { return coeffs_[coeffs_.size() - 1]; }

  cplx f(cplx x) const;
  cplx df(cplx x) const;

  // Branch points, sorted by (Re, Im).  For the odd model the branch point at
  // infinity is implicit and not listed.
  const std::vector<cplx>& branch_points() const { return roots_; }

  // Principal square root of f(x): the deterministic reference sheet.
  cplx y_principal(cplx x) const { return std::sqrt(f(x)); }

  // Resolve a point from (x, sheet sign relative to the principal root).
  CurvePoint point(cplx x, int sheet) const;

  // Whether the point lies on the curve to the stated tolerance.
  bool contains(const CurvePoint& p, double tol = 1e-9) const;

  // True when f is even: f(-x) = f(x), so (x,y) -> (-x,y) maps the curve to
  // itself.  Used by the involution module.
  bool x_negation_symmetric(double tol = 1e-12) const;

  // Diameter of the branch-point cloud (length scale for path construction).
  double scale() const { return scale_; }

  cplx hyperelliptic_conjugate_y(cplx y) const { return -y; }

 private:
  CVec coeffs_;
  std::vector<cplx> roots_;
  double scale_;
};

}  // namespace finitegap
