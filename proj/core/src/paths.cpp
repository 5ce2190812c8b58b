#include "finitegap/paths.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace finitegap {

const QuadratureRule& gauss_legendre(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Newton iteration on P_n with the Chebyshev initial guess; standard
  // three-term recurrence for P_n and its derivative.
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  auto [pos, inserted] = cache.emplace(n, std::move(rule));
  return pos->second;
}

cplx track_y(const CurveModel& curve, cplx x0, cplx y0, cplx x1, int depth) {
  if (depth > 60)
    throw PrecisionError("sheet tracking did not settle (branch point on or near path?)");
  const cplx yp = curve.y_principal(x1);
  const cplx y1 = (std::abs(yp - y0) <= std::abs(-yp - y0)) ? yp : -yp;
  const double jump = std::abs(y1 - y0);
  const double scale = std::max(std::abs(y0), std::abs(y1));
  if (jump <= 0.5 * scale || scale == 0.0) return y1;
  const cplx xm = 0.5 * (x0 + x1);
  const cplx ym = track_y(curve, x0, y0, xm, depth + 1);
  return track_y(curve, xm, ym, x1, depth + 1);
}

namespace {

// Parametrization of a segment by sigma in [0,1]: x(sigma) and dx/dsigma.
struct Param {
  const Segment& seg;
  cplx x(double s) const {
    switch (seg.branch) {
      case Segment::BranchEnd::none:
        return seg.from + (seg.to - seg.from) * s;
      case Segment::BranchEnd::at_from:
        return seg.from + (seg.to - seg.from) * (s * s);
      case Segment::BranchEnd::at_to: {
        const double u = 1.0 - s;
        return seg.to + (seg.from - seg.to) * (u * u);
      }
    }
    return {};
  }
  cplx dx(double s) const {
    switch (seg.branch) {
      case Segment::BranchEnd::none:
        return seg.to - seg.from;
      case Segment::BranchEnd::at_from:
        return 2.0 * s * (seg.to - seg.from);
      case Segment::BranchEnd::at_to:
        return 2.0 * (1.0 - s) * (seg.to - seg.from);
    }
    return {};
  }
};

// Integral over sigma in [s0, s1] with GL(n); y tracked from (x(s0), y0).
// Returns the integral and y at x(s1).
std::pair<CVec, cplx> quad_once(const CurveModel& curve, const Param& par,
                                double s0, double s1, cplx y0,
                                const Integrand& h, int dim, int n) {
  const auto& rule = gauss_legendre(n);
  CVec acc = CVec::Zero(dim);
  cplx y = y0;
  cplx xprev = par.x(s0);
  std::vector<cplx> vals;
  std::vector<std::pair<double, double>> nw(n);
  for (int i = 0; i < n; ++i)
    nw[i] = {s0 + (s1 - s0) * 0.5 * (rule.nodes[i] + 1.0),
             rule.weights[i] * 0.5 * (s1 - s0)};
  std::vector<std::vector<cplx>> terms(dim);
  for (auto [s, w] : nw) {
    const cplx x = par.x(s);
    y = track_y(curve, xprev, y, x);
    xprev = x;
    const CVec hv = h(x, y);
    for (int d = 0; d < dim; ++d) terms[d].push_back(w * hv[d] * par.dx(s));
  }
  for (int d = 0; d < dim; ++d) acc[d] = pairwise_sum(terms[d]);
  // The 'to' end of an at_to segment IS a branch point, where y = 0 exactly;
  // tracking into it never settles, so short-circuit that case.
  const bool ends_at_branch =
      par.seg.branch == Segment::BranchEnd::at_to && s1 >= 1.0;
  const cplx y_end = ends_at_branch ? cplx(0.0)
                                    : track_y(curve, xprev, y, par.x(s1));
  return {acc, y_end};
}

std::pair<CVec, cplx> quad_adaptive(const CurveModel& curve, const Param& par,
                                    double s0, double s1, cplx y0,
                                    const Integrand& h, int dim, double tol,
                                    int depth) {
  auto [i1, ye1] = quad_once(curve, par, s0, s1, y0, h, dim, 24);
  auto [i2, ye2] = quad_once(curve, par, s0, s1, y0, h, dim, 48);
  const double err = (i2 - i1).cwiseAbs().maxCoeff();
  const double scale = 1.0 + i2.cwiseAbs().maxCoeff();
  if (err <= tol * scale) return {i2, ye2};
  if (depth >= 14)
    throw PrecisionError("path quadrature did not converge");
  const double sm = 0.5 * (s0 + s1);
  auto [left, ym] = quad_adaptive(curve, par, s0, sm, y0, h, dim, tol, depth + 1);
  auto [right, ye] = quad_adaptive(curve, par, sm, s1, ym, h, dim, tol, depth + 1);
  return {CVec(left + right), ye};
}

}  // namespace

SegmentResult integrate_segment(const CurveModel& curve, const Segment& seg,
                                cplx y_from, const Integrand& h, int dim,
                                double rel_tol) {
  // Tracking cannot be seeded at a branch point (y = 0 leaves the sheet
  // ambiguous); callers integrate such pieces in the opposite direction and
  // negate, so only the at_to substitution is ever integrated directly.
  if (seg.branch == Segment::BranchEnd::at_from)
    throw InputError("segments seeded at a branch point are not supported; reverse the segment");
  Param par{seg};
  auto [acc, y_end] = quad_adaptive(curve, par, 0.0, 1.0, y_from, h, dim, rel_tol, 0);
  return {acc, y_end};
}

PathResult integrate_path(const CurveModel& curve, const std::vector<Segment>& segs,
                          cplx y_start, const Integrand& h, int dim,
                          double rel_tol) {
  CVec acc = CVec::Zero(dim);
  cplx y = y_start;
  cplx x = segs.empty() ? cplx(0.0) : segs.front().from;
  for (const auto& seg : segs) {
    if (std::abs(seg.from - x) > 1e-12 * (1.0 + std::abs(x)))
      throw InputError("path segments are not contiguous");
    auto r = integrate_segment(curve, seg, y, h, dim, rel_tol);
    acc += r.integral;
    y = r.y_end;
    x = seg.to;
  }
  return {acc, CurvePoint{x, y}};
}

std::vector<Segment> polyline(const std::vector<cplx>& waypoints) {
  std::vector<Segment> segs;
  for (size_t i = 0; i + 1 < waypoints.size(); ++i) {
    if (std::abs(waypoints[i + 1] - waypoints[i]) == 0.0) continue;
    segs.push_back({waypoints[i], waypoints[i + 1], Segment::BranchEnd::none});
  }
  return segs;
}

namespace {

double point_segment_distance(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const double len2 = std::norm(ab);
  if (len2 == 0.0) return std::abs(p - a);
  double t = ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return std::abs(p - (a + t * ab));
}

}  // namespace

std::vector<cplx> route_avoiding(const std::vector<cplx>& obstacles, cplx x0,
                                 cplx x1, double margin, int depth) {
  double worst = std::numeric_limits<double>::infinity();
  cplx offender = 0.0;
  for (cplx e : obstacles) {
    const double d = point_segment_distance(e, x0, x1);
    if (d < worst) {
      worst = d;
      offender = e;
    }
  }
  if (worst >= margin || depth >= 8) {
    if (worst < 0.2 * margin)
      throw PrecisionError("cannot route a path clear of the branch points");
    return {x0, x1};
  }
  const cplx dir = (x1 - x0) / std::abs(x1 - x0);
  const cplx normal = dir * kI;
  // Project the offender onto the segment and step off perpendicular on the
  // side that keeps the detour point farther from all branch points.
  const double t = ((offender - x0).real() * dir.real() +
                    (offender - x0).imag() * dir.imag());
  const cplx foot = x0 + t * dir;
  auto clearance = [&](cplx w) {
    double c = std::numeric_limits<double>::infinity();
    for (cplx e : obstacles) c = std::min(c, std::abs(w - e));
    return c;
  };
  const cplx wp = foot + 2.0 * margin * normal;
  const cplx wm = foot - 2.0 * margin * normal;
  const cplx w = (clearance(wp) >= clearance(wm)) ? wp : wm;
  auto left = route_avoiding(obstacles, x0, w, margin, depth + 1);
  auto right = route_avoiding(obstacles, w, x1, margin, depth + 1);
  left.insert(left.end(), right.begin() + 1, right.end());
  return left;
}

std::vector<cplx> loop_around(cplx e, double r, cplx from) {
  const cplx u = (from - e) / std::abs(from - e);
  std::vector<cplx> pts;
  for (int k = 0; k <= 8; ++k)
    pts.push_back(e + r * u * std::polar(1.0, 2.0 * kPi * k / 8.0));
  return pts;
}

}  // namespace finitegap
