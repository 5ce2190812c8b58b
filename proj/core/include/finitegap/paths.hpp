#pragma once

#include <functional>
#include <vector>

#include "finitegap/curve.hpp"
#include "finitegap/types.hpp"

namespace finitegap {

// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const QuadratureRule& gauss_legendre(int n);

// Analytic continuation of y = sqrt(f(x)) along a straight segment: from a
// known value y0 at x0, select the nearer square root at each step and halve
// the step whenever the relative jump exceeds 1/2.  Throws PrecisionError if
// the recursion does not settle (e.g. a branch point sits on the path).
cplx track_y(const CurveModel& curve, cplx x0, cplx y0, cplx x1, int depth = 0);

// One smooth piece of an integration path in the x-plane.  The optional
// branch flag marks an endpoint that IS a branch point; the integration
// variable is then substituted x = e + (other-e) s^2 so that 1/y integrands
// stay bounded.  Such an endpoint must not be used as the tracking seed.
struct Segment {
  cplx from;
  cplx to;
  enum class BranchEnd { none, at_from, at_to } branch = BranchEnd::none;
};

// Vector-valued differential h(x, y) with ω = h dx; dim() components.
using Integrand = std::function<CVec(cplx x, cplx y)>;

struct SegmentResult {
  CVec integral;
  cplx y_end;
};

// Integrate h(x,y) dx along the segment, continuing y from y_from at the
// 'from' end.  Adaptive: compares n and 2n point results, bisects on failure.
SegmentResult integrate_segment(const CurveModel& curve, const Segment& seg,
                                cplx y_from, const Integrand& h, int dim,
                                double rel_tol = 1e-12);

// A chain of segments traversed in order with continuous y.
struct PathResult {
  CVec integral;
  CurvePoint end;
};
PathResult integrate_path(const CurveModel& curve, const std::vector<Segment>& segs,
                          cplx y_start, const Integrand& h, int dim,
                          double rel_tol = 1e-12);

// Straight-line polyline through the waypoints (no branch endpoints).
std::vector<Segment> polyline(const std::vector<cplx>& waypoints);

// Waypoints from x0 to x1 that keep a safe distance from every branch point,
// inserting perpendicular detours where the direct segment passes too close.
// Deterministic: the detour side is chosen by which clears the remaining
// branch points better, ties toward +i.
std::vector<cplx> route_avoiding(const std::vector<cplx>& obstacles, cplx x0,
                                 cplx x1, double margin, int depth = 0);

// Closed octagonal loop around the point e with radius r, starting and
// ending at e + r*unit(from - e).  Traversing it flips the sheet.
std::vector<cplx> loop_around(cplx e, double r, cplx from);

}  // namespace finitegap
