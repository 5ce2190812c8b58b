#include "finitegap/periods.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "finitegap/theta.hpp"

namespace finitegap {

namespace {

double nearest_branch_distance(const std::vector<cplx>& roots, cplx x) {
  double d = std::numeric_limits<double>::infinity();
  for (cplx e : roots) d = std::min(d, std::abs(x - e));
  return d;
}

}  // namespace

CurveFrame::CurveFrame(CurveModel curve, BasePoint base)
    : curve_(std::move(curve)), base_(base) {
  const auto& roots = curve_.branch_points();
  double min_gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < roots.size(); ++i)
    for (size_t j = i + 1; j < roots.size(); ++j)
      min_gap = std::min(min_gap, std::abs(roots[i] - roots[j]));
  margin_ = 0.25 * min_gap;

  if (base_.at_infinity) {
    if (!curve_.odd_model())
      throw InputError("base point at infinity requires an odd-degree model");
  } else {
    if (nearest_branch_distance(roots, base_.x) < 1e-8 * curve_.scale())
      throw InputError("base point must not be a branch point");
  }

  build_cuts();
  build_bridges();
  compute_bridge_composition();
  compute_periods();

  if (base_.at_infinity) {
    // Anchor on the chart x = kappa^{-2} at real positive kappa0, with the
    // Abel tail integral from infinity to the anchor along the radial path.
    double max_abs = 0.0;
    for (cplx e : roots) max_abs = std::max(max_abs, std::abs(e));
    far_radius_ = 2.2 * std::max(max_abs, 1.0);
    anchor_ = CurvePoint{far_radius_, curve_.y_principal(far_radius_)};
    anchor_abel_ = abel_from_anchor(anchor_);
  } else {
    anchor_ = curve_.point(base_.x, base_.sheet);
    anchor_abel_ = CVec::Zero(genus());
  }

  compute_riemann_constants();
}

void CurveFrame::build_cuts() {
  const auto& roots = curve_.branch_points();
  const int g = genus();
  hom_.cuts.clear();
  for (int k = 0; k + 1 < static_cast<int>(roots.size()); k += 2) {
    Cut c;
    c.e0 = roots[k];
    c.e1 = roots[k + 1];
    c.mid = 0.5 * (c.e0 + c.e1);
    c.length = std::abs(c.e1 - c.e0);
    hom_.cuts.push_back(c);
  }
  if (curve_.odd_model()) {
    // Virtual cut from the last branch point toward infinity, directed away
    // from the centroid of the remaining branch points.
    Cut c;
    c.e0 = roots.back();
    cplx centroid = 0.0;
    for (size_t i = 0; i + 1 < roots.size(); ++i) centroid += roots[i];
    centroid /= static_cast<double>(roots.size() - 1);
    cplx t = c.e0 - centroid;
    if (std::abs(t) < 1e-12) t = 1.0;
    t /= std::abs(t);
    c.to_infinity = true;
    c.e1 = c.e0 + 2.0 * curve_.scale() * t;  // finite stand-in for stations
    c.mid = c.e0 + 0.5 * curve_.scale() * t;
    c.length = curve_.scale();
    hom_.cuts.push_back(c);
  }
  if (static_cast<int>(hom_.cuts.size()) != g + 1)
    throw PrecisionError("unexpected number of branch cuts");
}

void CurveFrame::build_bridges() {
  const auto& roots = curve_.branch_points();
  const int g = genus();
  double max_im = 0.0;
  for (cplx e : roots) max_im = std::max(max_im, std::abs(e.imag()));
  const double H = max_im + 0.6 * curve_.scale();

  // Reference sheet seed: a point high above the branch cloud, from which
  // every bridge start (also at height H) is reachable along a straight
  // obstacle-free segment.  Using one common reference keeps the loop
  // orientations mutually consistent.
  cplx centroid = 0.0;
  for (cplx e : roots) centroid += e;
  centroid /= static_cast<double>(roots.size());
  const cplx ref_x = cplx(centroid.real(), H);
  const cplx ref_y = curve_.y_principal(ref_x);

  auto clearance = [&](cplx p) { return nearest_branch_distance(roots, p); };

  hom_.bridges.clear();
  hom_.bridge_seed_y.clear();
  for (int j = 0; j < g; ++j) {
    const Cut& cl = hom_.cuts[j];
    const Cut& cr = hom_.cuts[j + 1];
    // Left crossing at the midpoint of cut j, right crossing at the 1/3
    // station of cut j+1 (staggered from the midpoint crossing of the next
    // bridge so the realized loops stay disjoint).
    const cplx ml = cl.mid;
    const cplx mr = cr.e0 + (cr.e1 - cr.e0) / 3.0;
    cplx tl = cl.e1 - cl.e0;
    tl /= std::abs(tl);
    cplx tr = cr.e1 - cr.e0;
    tr /= std::abs(tr);
    const cplx nl = kI * tl;
    const cplx nr = kI * tr;
    const double dl = 0.3 * clearance(ml), wl = 0.62 * clearance(ml);
    const double dr = 0.3 * clearance(mr), wr = 0.62 * clearance(mr);

    const cplx s_minus = ml - dl * nl;
    const cplx s_plus = ml + dl * nl;
    const cplx r_plus = ml + wl * nl;
    const cplx r_minus = ml - wl * nl;
    const cplx a_plus = mr + wr * nr;
    const cplx a_jog1 = mr + dr * nr;
    const cplx a_jog2 = mr - dr * nr;
    const cplx a_minus = mr - wr * nr;

    // Loop starting at the top corridor: descend to the right cut, jog down
    // through it, return under everything, ascend, jog up through the left
    // cut, and climb back to the start.
    std::vector<cplx> w = {
        cplx(r_plus.real(), H),  cplx(a_plus.real(), H),  a_plus,
        a_jog1,                  a_jog2,                  a_minus,
        cplx(a_minus.real(), -H), cplx(r_minus.real(), -H), r_minus,
        s_minus,                 s_plus,                  r_plus,
        cplx(r_plus.real(), H)};
    // Drop consecutive duplicates.
    std::vector<cplx> wp;
    for (cplx p : w)
      if (wp.empty() || std::abs(p - wp.back()) > 1e-14) wp.push_back(p);

    // Seed the sheet at the first waypoint from the common reference.
    cplx y = ref_y;
    y = track_y(curve_, ref_x, y, wp.front());
    hom_.bridges.push_back(std::move(wp));
    hom_.bridge_seed_y.push_back(y);
  }
}

namespace {

double cross2(cplx u, cplx v) { return u.real() * v.imag() - u.imag() * v.real(); }

}  // namespace

// Intersection numbers of the realized bridge loops with the a-cycles, and
// the integer composition turning bridges into canonical b-cycles.
//
// Each bridge is a simple loop enclosing exactly two branch points (adjacent
// ends of consecutive cuts), so its class is a pure "dumbbell" with no
// a-cycle content; the only freedom is which integer combination of bridges
// gives b_k . a_l = delta_{kl}.  That combination is read off from the
// intersection matrix J(j,l) = bridge_j . a_l: a crossing of cut l counts
// with the sign of the 2D cross product between the a_l strand direction at
// the crossing (which depends on the sheet the bridge is on) and the bridge
// direction.  The plain sum of consecutive bridges is wrong in general
// because a bridge reaches its left cut after passing through its right cut,
// i.e. on the flipped sheet, so shared-cut crossings of consecutive bridges
// need not cancel; solving J restores the cancellation exactly.
void CurveFrame::compute_bridge_composition() {
  const int g = genus();
  const int ncuts = g + 1;
  RMat J = RMat::Zero(g, ncuts);

  for (int j = 0; j < g; ++j) {
    const auto& wp = hom_.bridges[j];
    cplx y = hom_.bridge_seed_y[j];
    for (size_t i = 0; i + 1 < wp.size(); ++i) {
      const cplx p = wp[i];
      const cplx q = wp[i + 1];
      for (int l = 0; l < ncuts; ++l) {
        const Cut& c = hom_.cuts[l];
        // Cut support: the finite segment, or a long ray stand-in for the
        // cut running to infinity.
        const cplx c0 = c.e0;
        const cplx c1 = c.to_infinity
                            ? c.e0 + (c.e1 - c.e0) * (50.0 * curve_.scale() / std::abs(c.e1 - c.e0))
                            : c.e1;
        const cplx d_path = q - p;
        const cplx d_cut = c1 - c0;
        const double denom = cross2(d_path, d_cut);
        if (std::abs(denom) < 1e-14 * std::abs(d_path) * std::abs(d_cut))
          continue;  // parallel: transversal crossings only by construction
        const double t = cross2(c0 - p, d_cut) / denom;
        const double u = cross2(c0 - p, d_path) / denom;
        if (t <= 0.0 || t >= 1.0 || u <= 0.0 || u >= 1.0) continue;
        if (t < 1e-9 || t > 1.0 - 1e-9 || u < 1e-9 || u > 1.0 - 1e-9)
          throw PrecisionError("homology crossing degenerately close to an endpoint");
        const cplx xc = p + t * d_path;
        // Sheet of the bridge at the crossing.
        const cplx y_br = track_y(curve_, p, y, xc);
        // Sheet and direction of the a_l strand there: the a-loop runs from
        // e0 to e1 on the sheet continued from y_principal at the midpoint,
        // and back on the opposite sheet.
        const cplx y_a = track_y(curve_, c.mid, curve_.y_principal(c.mid), xc);
        const cplx t_cut = d_cut / std::abs(d_cut);
        const cplx strand =
            (std::abs(y_br - y_a) <= std::abs(y_br + y_a)) ? t_cut : -t_cut;
        J(j, l) += (cross2(strand, d_path) > 0.0) ? 1.0 : -1.0;
      }
      y = track_y(curve_, p, y, q);
    }
  }

  // Validate the expected pattern: bridge_j meets only cuts j and j+1, once
  // each transversally.
  for (int j = 0; j < g; ++j)
    for (int l = 0; l < ncuts; ++l) {
      const double want = (l == j || l == j + 1) ? 1.0 : 0.0;
      if (std::abs(std::abs(J(j, l)) - want) > 1e-12)
        throw PrecisionError("realized homology bridges are not consecutive dumbbells");
    }

  // Solve comp * J_restricted = I over the integers (J restricted to the
  // first g cuts is upper bidiagonal with unit diagonal magnitudes).
  comp_ = RMat::Zero(g, g);
  for (int k = 0; k < g; ++k) {
    comp_(k, k) = J(k, k);  // = 1/J(k,k) since J(k,k) = +-1
    for (int l = k + 1; l < g; ++l)
      comp_(k, l) = -comp_(k, l - 1) * J(l - 1, l) * J(l, l);
  }
}

CVec CurveFrame::a_cycle(int k, const Integrand& h, int dim) const {
  if (k < 0 || k >= genus()) throw InputError("a-cycle index out of range");
  const Cut& c = hom_.cuts[k];
  const cplx y_mid = curve_.y_principal(c.mid);
  // Both sheets in one pass: the loop around the cut contributes
  // int_{m->e1}[h(y) - h(-y)] + int_{m->e0}[h(-y) - h(y)].
  Integrand both = [&](cplx x, cplx y) {
    CVec v(2 * dim);
    v.head(dim) = h(x, y);
    v.tail(dim) = h(x, -y);
    return v;
  };
  const Segment to_e1{c.mid, c.e1, Segment::BranchEnd::at_to};
  const Segment to_e0{c.mid, c.e0, Segment::BranchEnd::at_to};
  auto r1 = integrate_segment(curve_, to_e1, y_mid, both, 2 * dim);
  auto r0 = integrate_segment(curve_, to_e0, y_mid, both, 2 * dim);
  return (r1.integral.head(dim) - r1.integral.tail(dim)) -
         (r0.integral.head(dim) - r0.integral.tail(dim));
}

CVec CurveFrame::bridge_cycle(int j, const Integrand& h, int dim) const {
  if (j < 0 || j >= genus()) throw InputError("bridge index out of range");
  const auto segs = polyline(hom_.bridges[j]);
  auto r = integrate_path(curve_, segs, hom_.bridge_seed_y[j], h, dim);
  const double yscale = std::max(1.0, std::abs(hom_.bridge_seed_y[j]));
  if (std::abs(r.end.y - hom_.bridge_seed_y[j]) > 1e-6 * yscale)
    throw PrecisionError("b-cycle loop does not close on the curve");
  return r.integral;
}

CVec CurveFrame::b_cycle(int k, const Integrand& h, int dim) const {
  if (k < 0 || k >= genus()) throw InputError("b-cycle index out of range");
  CVec acc = CVec::Zero(dim);
  for (int j = 0; j < genus(); ++j)
    if (comp_(k, j) != 0.0) acc += comp_(k, j) * bridge_cycle(j, h, dim);
  return acc;
}

void CurveFrame::compute_periods() {
  const int g = genus();
  Integrand mono = [&](cplx x, cplx y) {
    CVec v(g);
    cplx p = 1.0;
    for (int j = 0; j < g; ++j) {
      v[j] = p / y;
      p *= x;
    }
    return v;
  };
  A_per_.resize(g, g);
  Btilde_.resize(g, g);
  for (int k = 0; k < g; ++k) A_per_.row(k) = a_cycle(k, mono, g).transpose();
  for (int j = 0; j < g; ++j) Btilde_.row(j) = bridge_cycle(j, mono, g).transpose();

  // Normalization: sum_j C(l,j) A_per(k,j) = delta_{kl}, i.e. C = (A^T)^{-1}.
  Eigen::PartialPivLU<CMat> lu(A_per_.transpose());
  C_ = lu.solve(CMat::Identity(g, g));
  if (!(C_.array().isFinite().all()))
    throw PrecisionError("a-period matrix is numerically singular");

  CMat Bper(g, g);
  for (int k = 0; k < g; ++k) {
    CVec acc = CVec::Zero(g);
    for (int j = 0; j < g; ++j) acc += comp_(k, j) * Btilde_.row(j).transpose();
    Bper.row(k) = acc.transpose();
  }
  B_ = Bper * C_.transpose();

  const double bscale = std::max(1.0, B_.cwiseAbs().maxCoeff());
  if ((B_ - B_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * bscale)
    throw PrecisionError("computed period matrix is not symmetric");
  B_ = 0.5 * (B_ + B_.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<RMat> es(B_.imag());
  if (es.info() != Eigen::Success)
    throw PrecisionError("cannot factor the imaginary part of the period matrix");
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo > 0.0) {
    // orientation already correct
  } else if (hi < 0.0) {
    // The realized symplectic basis has the opposite b-orientation; reverse
    // every bridge loop.  Reversing a closed loop exactly negates its
    // integrals, so the stored rows are negated rather than recomputed.
    for (auto& wp : hom_.bridges) std::reverse(wp.begin(), wp.end());
    Btilde_ = -Btilde_;
    B_ = -B_;
  } else {
    throw PrecisionError("imaginary part of the period matrix is indefinite");
  }
  Eigen::LLT<RMat> llt(B_.imag());
  if (llt.info() != Eigen::Success)
    throw PrecisionError("imaginary part of the period matrix is not positive definite");
  Yinv_ = llt.solve(RMat::Identity(g, g));
}

CVec CurveFrame::omega_values(cplx x, cplx y) const {
  const int g = genus();
  CVec mono(g);
  cplx p = 1.0;
  for (int j = 0; j < g; ++j) {
    mono[j] = p;
    p *= x;
  }
  return (C_ * mono) / y;
}

std::vector<cplx> CurveFrame::route(cplx x0, cplx x1) const {
  const auto& roots = curve_.branch_points();
  const double d0 = nearest_branch_distance(roots, x0);
  const double d1 = nearest_branch_distance(roots, x1);
  if (std::min(d0, d1) < 1e-6 * curve_.scale())
    throw InputError("path endpoint is (numerically) a branch point");
  const double m = std::min({margin_, 0.4 * d0, 0.4 * d1});
  return route_avoiding(roots, x0, x1, m);
}

CurvePoint CurveFrame::transport(const CurvePoint& p, cplx x1) const {
  const auto wp = route(p.x, x1);
  cplx y = p.y;
  for (size_t i = 0; i + 1 < wp.size(); ++i) y = track_y(curve_, wp[i], y, wp[i + 1]);
  return {x1, y};
}

CVec CurveFrame::abel_between(const CurvePoint& p, const CurvePoint& q) const {
  if (!curve_.contains(p) || !curve_.contains(q))
    throw InputError("Abel map endpoint does not lie on the curve");
  const int g = genus();
  Integrand om = [&](cplx x, cplx y) { return omega_values(x, y); };
  auto segs = polyline(route(p.x, q.x));
  CVec acc = CVec::Zero(g);
  cplx y = p.y;
  if (!segs.empty()) {
    auto r = integrate_path(curve_, segs, p.y, om, g);
    acc = r.integral;
    y = r.end.y;
  }
  const double yscale = std::max(1.0, std::abs(q.y));
  if (std::abs(y - q.y) <= 1e-6 * yscale) return acc;
  if (std::abs(y + q.y) > 1e-6 * yscale)
    throw PrecisionError("sheet tracking arrived off the curve");

  // Arrived on the opposite sheet: append a loop around the branch point
  // nearest to q, which flips the sheet and returns to the same x.
  const auto& roots = curve_.branch_points();
  cplx e = roots[0];
  for (cplx r : roots)
    if (std::abs(r - q.x) < std::abs(e - q.x)) e = r;
  auto loop = loop_around(e, margin_, q.x);
  std::vector<cplx> wp = {q.x};
  wp.insert(wp.end(), loop.begin(), loop.end());
  wp.push_back(q.x);
  auto r2 = integrate_path(curve_, polyline(wp), y, om, g);
  acc += r2.integral;
  if (std::abs(r2.end.y - q.y) > 1e-6 * yscale)
    throw PrecisionError("sheet correction loop failed to reach the target sheet");
  return acc;
}

CVec CurveFrame::abel_from_anchor(const CurvePoint& q) const {
  // Radial tail: integral of the normalized basis from infinity (kappa = 0)
  // to the anchor along x = kappa^{-2}, kappa in (0, kappa0].  The integrand
  // is analytic in kappa at 0; y is tracked inward from the anchor.
  const double kappa0 = 1.0 / std::sqrt(far_radius_);
  const int g = genus();
  auto eval_nodes = [&](int n) {
    const auto& rule = gauss_legendre(n);
    std::vector<double> ks(n);
    for (int i = 0; i < n; ++i) ks[i] = kappa0 * 0.5 * (rule.nodes[i] + 1.0);
    // Track y from the anchor down through the nodes (descending kappa =
    // ascending |x|).
    std::vector<cplx> ys(n);
    cplx y = q.y;
    cplx xprev = q.x;
    for (int i = n - 1; i >= 0; --i) {
      const cplx x = 1.0 / (ks[i] * ks[i]);
      y = track_y(curve_, xprev, y, x);
      ys[i] = y;
      xprev = x;
    }
    CVec acc = CVec::Zero(g);
    for (int i = 0; i < n; ++i) {
      const double k = ks[i];
      const cplx x = 1.0 / (k * k);
      const cplx dxdk = -2.0 / (k * k * k);
      acc += (rule.weights[i] * 0.5 * kappa0) * dxdk * omega_values(x, ys[i]);
    }
    return acc;
  };
  const CVec i1 = eval_nodes(64);
  const CVec i2 = eval_nodes(128);
  if ((i2 - i1).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + i2.cwiseAbs().maxCoeff()))
    throw PrecisionError("radial tail integral did not converge");
  return i2;
}

CVec CurveFrame::abel(const CurvePoint& p) const {
  return anchor_abel_ + abel_between(anchor_, p);
}

CVec CurveFrame::abel_divisor(const std::vector<CurvePoint>& d) const {
  CVec acc = CVec::Zero(genus());
  for (const auto& p : d) acc += abel(p);
  return acc;
}

CVec CurveFrame::reduce(const CVec& z) const {
  const int g = genus();
  if (z.size() != g) throw InputError("lattice reduction argument has wrong size");
  RVec m2 = Yinv_ * z.imag();
  CVec out = z;
  for (int i = 0; i < g; ++i) m2[i] = std::round(m2[i]);
  out -= B_ * m2.cast<cplx>();
  for (int i = 0; i < g; ++i) out[i] -= std::round(out[i].real());
  return out;
}

void CurveFrame::compute_riemann_constants() {
  const int g = genus();
  // The Riemann constant vector K is pinned down (mod the period lattice) by
  // its defining property: theta(A(D) + K) = 0 for every degree-(g-1)
  // effective divisor D, which also fixes the class identity
  // A(canonical divisor) = -2K.  When the base point sits at a branch point
  // W the vector is one of the 4^g half-periods (2K is then a lattice
  // vector, so the sign of the half-period is immaterial), and it can be
  // isolated by scanning the half-periods against a few random divisors.
  // The result is carried back to the frame's own base point through
  // K = K_W - (g - 1) A(W); the same branch of A(W) is used on both sides,
  // which keeps the construction independent of all path choices.

  // Abel image of W = the first cut end, reached from the cut midpoint with
  // the quadratic substitution x(s) = e + (mid - e)(1 - s)^2 that absorbs
  // the square-root endpoint singularity of dx/y.
  const Cut& c0 = hom_.cuts[0];
  const cplx mid = c0.mid;
  const cplx y_mid = curve_.y_principal(mid);
  CVec AW = abel(CurvePoint{mid, y_mid});
  {
    const int panels = 12;
    const auto& rule = gauss_legendre(24);
    cplx y_walk = y_mid;
    cplx x_walk = mid;
    CVec acc = CVec::Zero(g);
    for (int p = 0; p < panels; ++p) {
      const double s0 = static_cast<double>(p) / panels;
      const double s1 = static_cast<double>(p + 1) / panels;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double s = s0 + (s1 - s0) * 0.5 * (rule.nodes[i] + 1.0);
        const double u = 1.0 - s;
        const cplx x = c0.e0 + (mid - c0.e0) * (u * u);
        y_walk = track_y(curve_, x_walk, y_walk, x);
        x_walk = x;
        const cplx dxds = 2.0 * u * (c0.e0 - mid);
        acc += (rule.weights[i] * 0.5 * (s1 - s0) * dxds) *
               omega_values(x, y_walk);
      }
    }
    AW += acc;
  }

  // Shifted divisor sums  sum_i [A(P_i) - A(W)]  for a few random
  // degree-(g-1) divisors (deterministic seed; empty sums at genus 1).
  std::mt19937_64 rng(0x52edc0417ULL + 97u * static_cast<unsigned>(g));
  std::uniform_real_distribution<double> u01(-1.0, 1.0);
  const auto& roots = curve_.branch_points();
  auto sample_point = [&]() {
    for (int tries = 0; tries < 256; ++tries) {
      const cplx x = 1.5 * curve_.scale() * cplx(u01(rng), u01(rng));
      if (nearest_branch_distance(roots, x) < 0.18 * curve_.scale()) continue;
      const int sheet = (rng() & 1u) ? 1 : -1;
      return curve_.point(x, sheet);
    }
    throw PrecisionError("could not sample points away from branch points");
  };
  const int trials = 4;
  std::vector<CVec> shifted;
  for (int t = 0; t < trials; ++t) {
    CVec s = CVec::Zero(g);
    for (int i = 0; i + 1 < g; ++i) s += abel(sample_point()) - AW;
    shifted.push_back(std::move(s));
  }

  // Scan the half-periods (n + B m)/2, n, m in {0,1}^g; exactly one of them
  // must annihilate theta on every shifted divisor sum.
  ThetaEngine theta(B_);
  double best = std::numeric_limits<double>::infinity();
  double second = best;
  CVec best_h = CVec::Zero(g);
  for (unsigned code = 0; code < (1u << (2 * g)); ++code) {
    CVec n(g), m(g);
    for (int j = 0; j < g; ++j) {
      n[j] = static_cast<double>((code >> j) & 1u);
      m[j] = static_cast<double>((code >> (g + j)) & 1u);
    }
    const CVec h = 0.5 * (n + B_ * m);
    double worst = 0.0;
    for (const CVec& s : shifted)
      worst = std::max(worst, std::abs(theta.value(reduce(CVec(h - s)))));
    if (worst < best) {
      second = best;
      best = worst;
      best_h = h;
    } else {
      second = std::min(second, worst);
    }
  }
  if (!(best < 1e-4 * second))
    throw PrecisionError(
        "the Riemann constant search did not isolate a unique vanishing "
        "half-period");
  K_ = reduce(CVec(best_h - static_cast<double>(g - 1) * AW));
}

}  // namespace finitegap
