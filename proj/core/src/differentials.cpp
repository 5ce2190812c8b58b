#include "finitegap/differentials.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>

namespace finitegap {

namespace {

cplx pow_int(cplx x, int n) {
  if (n < 0) return 1.0 / pow_int(x, -n);
  cplx r = 1.0, b = x;
  while (n > 0) {
    if (n & 1) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

double min_distance(const std::vector<cplx>& pts, cplx x) {
  double d = std::numeric_limits<double>::infinity();
  for (cplx p : pts) d = std::min(d, std::abs(x - p));
  return d;
}

// Distance from p to the segment [a, b].
double seg_distance(cplx p, cplx a, cplx b) {
  const cplx d = b - a;
  const double L2 = std::norm(d);
  if (L2 == 0.0) return std::abs(p - a);
  const double t = std::clamp(((p - a) * std::conj(d)).real() / L2, 0.0, 1.0);
  return std::abs(p - (a + t * d));
}

double segseg_distance(cplx a0, cplx a1, cplx b0, cplx b1) {
  auto orient = [](cplx p, cplx q, cplx r) {
    return (q - p).real() * (r - p).imag() - (q - p).imag() * (r - p).real();
  };
  const double o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
  const double o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
  if ((o1 > 0.0) != (o2 > 0.0) && (o3 > 0.0) != (o4 > 0.0)) return 0.0;
  return std::min({seg_distance(b0, a0, a1), seg_distance(b1, a0, a1),
                   seg_distance(a0, b0, b1), seg_distance(a1, b0, b1)});
}

// Laurent coefficients c_n, n = lo..hi, of a function sampled at the M
// points w_j = r e^{2 pi i j / M}:  c_n = (1/M) sum_j v_j e^{-2 pi i j n / M} / r^n.
std::vector<cplx> dft_laurent(const std::vector<cplx>& vals, double r, int lo,
                              int hi) {
  const int M = static_cast<int>(vals.size());
  std::vector<cplx> out;
  out.reserve(static_cast<size_t>(hi - lo + 1));
  std::vector<cplx> terms(vals.size());
  for (int n = lo; n <= hi; ++n) {
    for (int j = 0; j < M; ++j)
      terms[static_cast<size_t>(j)] =
          vals[static_cast<size_t>(j)] *
          std::polar(1.0, -2.0 * kPi * static_cast<double>(j) * n / M);
    out.push_back(pairwise_sum(terms) /
                  (static_cast<double>(M) * std::pow(r, n)));
  }
  return out;
}

// Samples of dOmega/dw on the chart circle |w| = r.
std::vector<cplx> chart_values(const PunctureChart& ch,
                               const RationalDifferential& form, double r,
                               int M) {
  const auto pts = ch.circle(r, M);
  std::vector<cplx> vals(static_cast<size_t>(M));
  for (int j = 0; j < M; ++j) {
    const cplx w = std::polar(r, 2.0 * kPi * j / M);
    const auto& p = pts[static_cast<size_t>(j)];
    vals[static_cast<size_t>(j)] = form.eval(p.x, p.y) * ch.dx_dw(w);
  }
  return vals;
}

ChartSeries make_series(const PunctureChart& ch,
                        const RationalDifferential& form, double r, int M,
                        int lo, int hi) {
  ChartSeries s;
  s.lowest = lo;
  s.radius = r;
  const std::vector<cplx> vals = chart_values(ch, form, r, M);
  for (const cplx& v : vals) s.peak = std::max(s.peak, std::abs(v));
  s.c = dft_laurent(vals, r, lo, hi);
  return s;
}

// Laurent coefficient rows (orders lo..hi) of several differentials in one
// chart, sharing a single tracked circle.
CMat laurent_rows_of(const PunctureChart& ch,
                     const std::vector<const RationalDifferential*>& forms,
                     double r, int M, int lo, int hi) {
  const auto pts = ch.circle(r, M);
  std::vector<cplx> ws(static_cast<size_t>(M));
  for (int j = 0; j < M; ++j)
    ws[static_cast<size_t>(j)] = std::polar(r, 2.0 * kPi * j / M);
  CMat out(hi - lo + 1, static_cast<int>(forms.size()));
  std::vector<cplx> vals(static_cast<size_t>(M));
  for (size_t c = 0; c < forms.size(); ++c) {
    for (int j = 0; j < M; ++j) {
      const auto& p = pts[static_cast<size_t>(j)];
      vals[static_cast<size_t>(j)] =
          forms[c]->eval(p.x, p.y) * ch.dx_dw(ws[static_cast<size_t>(j)]);
    }
    const auto cf = dft_laurent(vals, r, lo, hi);
    for (int i = 0; i < static_cast<int>(cf.size()); ++i)
      out(i, static_cast<int>(c)) = cf[static_cast<size_t>(i)];
  }
  return out;
}

// Least squares with column scaling and conditioning / consistency guards.
CVec solve_ls(const CMat& A, const CVec& b) {
  const int nc = static_cast<int>(A.cols());
  CMat As = A;
  std::vector<double> s(static_cast<size_t>(nc));
  for (int j = 0; j < nc; ++j) {
    const double m = As.col(j).cwiseAbs().maxCoeff();
    if (!(m > 0.0)) throw PrecisionError("degenerate construction column");
    s[static_cast<size_t>(j)] = m;
    As.col(j) /= m;
  }
  Eigen::JacobiSVD<CMat> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || sv(0) / smin > 1e10)
    throw PrecisionError("ill-conditioned differential construction");
  CVec xs = svd.solve(b);
  const double resid = (As * xs - b).cwiseAbs().maxCoeff();
  const double bscale = std::max(1.0, b.cwiseAbs().maxCoeff());
  if (resid > 1e-8 * bscale)
    throw PrecisionError("inconsistent differential construction");
  for (int j = 0; j < nc; ++j) xs(j) /= s[static_cast<size_t>(j)];
  return xs;
}

// ---------------------------------------------------------------------------
// Polynomials with ascending coefficients.
// ---------------------------------------------------------------------------
using Poly = std::vector<cplx>;

Poly pmul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, cplx(0.0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

void paccum(Poly& a, const Poly& b, cplx s) {
  if (a.size() < b.size()) a.resize(b.size(), cplx(0.0));
  for (size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
}

cplx peval(const Poly& a, cplx x) {
  cplx v = 0.0;
  for (size_t i = a.size(); i-- > 0;) v = v * x + a[i];
  return v;
}

double pmax(const Poly& a) {
  double m = 0.0;
  for (cplx c : a) m = std::max(m, std::abs(c));
  return m;
}

// Coefficients T with P(x) = sum_k T[k] (x - c)^k, by repeated synthetic
// division.
Poly taylor_shift(Poly a, cplx c) {
  const int n = static_cast<int>(a.size());
  Poly T(static_cast<size_t>(n), cplx(0.0));
  for (int k = 0; k < n; ++k) {
    const int m = n - k;
    if (m == 1) {
      T[static_cast<size_t>(k)] = a[0];
      break;
    }
    Poly b(static_cast<size_t>(m - 1));
    b[static_cast<size_t>(m - 2)] = a[static_cast<size_t>(m - 1)];
    for (int i = m - 3; i >= 0; --i)
      b[static_cast<size_t>(i)] =
          a[static_cast<size_t>(i + 1)] + c * b[static_cast<size_t>(i + 1)];
    T[static_cast<size_t>(k)] = a[0] + c * b[0];
    a = std::move(b);
  }
  return T;
}

std::vector<cplx> poly_roots(const Poly& a) {
  const int n = static_cast<int>(a.size()) - 1;
  if (n < 1) return {};
  CMat C = CMat::Zero(n, n);
  for (int i = 0; i < n; ++i) C(i, n - 1) = -a[static_cast<size_t>(i)] / a[static_cast<size_t>(n)];
  for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMat> es(C);
  if (es.info() != Eigen::Success)
    throw PrecisionError("polynomial root finding failed");
  std::vector<cplx> r(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<size_t>(i)] = es.eigenvalues()(i);
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// PunctureChart
// ---------------------------------------------------------------------------

PunctureChart PunctureChart::finite_point(const CurveModel& curve, cplx x0,
                                          cplx y0, double sign) {
  if (std::abs(std::abs(sign) - 1.0) > 1e-14)
    throw InputError("chart sign must be +1 or -1");
  if (!curve.contains(CurvePoint{x0, y0}, 1e-8))
    throw InputError("marked point does not lie on the curve");
  const double d = min_distance(curve.branch_points(), x0);
  if (d < 1e-6 * curve.scale())
    throw InputError("marked point too close to a branch point");
  PunctureChart ch;
  ch.curve_ = &curve;
  ch.at_infinity_ = false;
  ch.x0_ = x0;
  ch.y0_ = y0;
  ch.sign_ = sign;
  ch.scale_ = d;
  return ch;
}

PunctureChart PunctureChart::infinity_odd(const CurveModel& curve) {
  if (!curve.odd_model())
    throw InputError("infinity chart requires an odd-degree model");
  double mx = 0.0;
  for (cplx e : curve.branch_points()) mx = std::max(mx, std::abs(e));
  PunctureChart ch;
  ch.curve_ = &curve;
  ch.at_infinity_ = true;
  ch.x0_ = 0.0;
  ch.y0_ = 0.0;
  ch.sign_ = 1.0;
  ch.scale_ = 1.0 / std::sqrt(std::max(mx, 1e-12));
  return ch;
}

cplx PunctureChart::x_of(cplx w) const {
  if (at_infinity_) return 1.0 / (w * w);
  return x0_ + sign_ * w;
}

cplx PunctureChart::dx_dw(cplx w) const {
  if (at_infinity_) return -2.0 / (w * w * w);
  return cplx(sign_);
}

cplx PunctureChart::w_of_x(cplx x) const {
  if (at_infinity_)
    throw InputError("w_of_x is only defined on finite charts");
  return sign_ * (x - x0_);
}

CurvePoint PunctureChart::anchor(double r) const {
  if (!(r > 0.0)) throw InputError("anchor radius must be positive");
  if (at_infinity_) {
    const cplx x = 1.0 / cplx(r * r);
    return CurvePoint{x, curve_->y_principal(x)};
  }
  const cplx x = x0_ + sign_ * r;
  return CurvePoint{x, track_y(*curve_, x0_, y0_, x)};
}

std::vector<CurvePoint> PunctureChart::circle(double r, int M) const {
  if (!(r > 0.0) || M < 8) throw InputError("invalid chart circle parameters");
  std::vector<CurvePoint> pts;
  pts.reserve(static_cast<size_t>(M));
  const CurvePoint a = anchor(r);
  pts.push_back(a);
  cplx xprev = a.x, yprev = a.y;
  for (int j = 1; j <= M; ++j) {
    const cplx w = std::polar(r, 2.0 * kPi * j / M);
    const cplx x = x_of(w);
    const cplx y = track_y(*curve_, xprev, yprev, x);
    if (j < M) {
      pts.push_back(CurvePoint{x, y});
    } else if (std::abs(y - a.y) > 1e-6 * (1.0 + std::abs(a.y))) {
      throw PrecisionError("chart circle fails to close on the curve");
    }
    xprev = x;
    yprev = y;
  }
  return pts;
}

// ---------------------------------------------------------------------------
// RationalDifferential
// ---------------------------------------------------------------------------

cplx RationalDifferential::eval(cplx x, cplx y) const {
  std::vector<cplx> terms;
  terms.reserve(terms_.size());
  for (const DiffTerm& t : terms_) {
    cplx v = t.c;
    if (t.pole)
      v /= pow_int(x - t.pole_at, t.power);
    else if (t.power > 0)
      v *= pow_int(x, t.power);
    if (t.over_y) v /= y;
    terms.push_back(v);
  }
  return pairwise_sum(terms);
}

void RationalDifferential::accumulate(const RationalDifferential& other,
                                      cplx s) {
  if (s == cplx(0.0)) return;
  for (DiffTerm t : other.terms_) {
    t.c *= s;
    terms_.push_back(t);
  }
}

std::vector<cplx> RationalDifferential::pole_locations() const {
  std::vector<cplx> out;
  for (const DiffTerm& t : terms_) {
    if (!t.pole) continue;
    bool seen = false;
    for (cplx p : out)
      if (std::abs(p - t.pole_at) <= 1e-9 * (1.0 + std::abs(p))) {
        seen = true;
        break;
      }
    if (!seen) out.push_back(t.pole_at);
  }
  return out;
}

// ---------------------------------------------------------------------------
// ChartSeries
// ---------------------------------------------------------------------------

std::vector<cplx> ChartSeries::integral_constants(int s_max) const {
  std::vector<cplx> a(static_cast<size_t>(s_max));
  for (int s = 1; s <= s_max; ++s)
    a[static_cast<size_t>(s - 1)] = coeff(s - 1) / static_cast<double>(s);
  return a;
}

cplx ChartSeries::integral_value(cplx w) const {
  std::vector<cplx> terms;
  terms.reserve(c.size());
  for (int k = 0; k < static_cast<int>(c.size()); ++k) {
    const int n = lowest + k;
    if (n == -1) continue;
    terms.push_back(c[static_cast<size_t>(k)] * pow_int(w, n + 1) /
                    static_cast<double>(n + 1));
  }
  cplx v = pairwise_sum(terms);
  const cplx res = residue();
  if (res != cplx(0.0)) v += res * std::log(w);
  return v;
}

// ---------------------------------------------------------------------------
// Zeros of a rational differential
// ---------------------------------------------------------------------------

std::vector<CurvePoint> differential_zeros(const CurveModel& curve,
                                           const RationalDifferential& form,
                                           int expected_count) {
  const double sc = curve.scale();

  // Distinct poles with their maximal orders.
  struct Den {
    cplx at;
    int pow;
  };
  std::vector<Den> dens;
  for (const DiffTerm& t : form.terms()) {
    if (!t.pole) continue;
    bool seen = false;
    for (Den& d : dens)
      if (std::abs(d.at - t.pole_at) <= 1e-9 * (1.0 + std::abs(d.at))) {
        d.pow = std::max(d.pow, t.power);
        seen = true;
        break;
      }
    if (!seen) dens.push_back(Den{t.pole_at, t.power});
  }

  // Put the differential over the common denominator y * prod (x - at)^pow:
  // form = (p(x) + q(x) y) / (y * prod ...) dx with polynomials p, q.
  Poly p{cplx(0.0)}, q{cplx(0.0)};
  for (const DiffTerm& t : form.terms()) {
    Poly num{t.c};
    if (!t.pole && t.power > 0) {
      Poly mono(static_cast<size_t>(t.power + 1), cplx(0.0));
      mono.back() = 1.0;
      num = pmul(num, mono);
    }
    for (const Den& d : dens) {
      int pw = d.pow;
      if (t.pole && std::abs(d.at - t.pole_at) <= 1e-9 * (1.0 + std::abs(d.at)))
        pw -= t.power;
      for (int r = 0; r < pw; ++r) num = pmul(num, Poly{-d.at, cplx(1.0)});
    }
    paccum(t.over_y ? p : q, num, 1.0);
  }

  Poly f(static_cast<size_t>(curve.coeffs().size()));
  for (int i = 0; i < curve.coeffs().size(); ++i)
    f[static_cast<size_t>(i)] = curve.coeffs()(i);

  // Zeros solve p + q y = 0 on the curve; eliminating y gives R = p^2 - q^2 f.
  Poly R = pmul(p, p);
  paccum(R, pmul(pmul(q, q), f), -1.0);

  // Trim leading coefficients cancelling to construction accuracy.
  const double mx = pmax(R);
  if (!(mx > 0.0)) throw PrecisionError("differential is numerically zero");
  while (R.size() > 1 && std::abs(R.back()) <= 1e-7 * mx) R.pop_back();

  // Deflate the structural roots sitting at the pole abscissas (they come
  // from regular opposite-sheet points over the poles, not from zeros).
  for (const Den& d : dens) {
    Poly T = taylor_shift(R, d.at);
    const double mt = pmax(T);
    size_t k = 0;
    while (k + 1 < T.size() && std::abs(T[k]) <= 1e-6 * mt) ++k;
    if (k > 0) {
      Poly Ru(T.begin() + static_cast<long>(k), T.end());
      R = taylor_shift(Ru, -d.at);
    }
  }

  if (static_cast<int>(R.size()) - 1 != expected_count)
    throw PrecisionError("unexpected number of differential zeros");

  const auto xs = poly_roots(R);
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = i + 1; j < xs.size(); ++j)
      if (std::abs(xs[i] - xs[j]) < 1e-6 * sc)
        throw PrecisionError("differential zeros are not simple");

  std::vector<CurvePoint> out;
  const double qn = pmax(q);
  for (cplx xr : xs) {
    for (const Den& d : dens)
      if (std::abs(xr - d.at) < 1e-6 * sc)
        throw PrecisionError("differential zero collides with a pole");
    if (min_distance(curve.branch_points(), xr) < 1e-6 * sc)
      throw PrecisionError("differential zero collides with a branch point");
    const cplx pv = peval(p, xr);
    const cplx qv = peval(q, xr);
    const double xm = std::max(1.0, std::abs(xr));
    if (std::abs(qv) <= 1e-9 * qn * std::pow(xm, static_cast<int>(q.size()) - 1))
      throw PrecisionError("differential zero sheet is ambiguous");
    const cplx yr = -pv / qv;
    const CurvePoint pt{xr, yr};
    if (!curve.contains(pt, 1e-6))
      throw PrecisionError("differential zero does not lie on the curve");
    out.push_back(pt);
  }
  return out;
}

// ---------------------------------------------------------------------------
// SpectralData
// ---------------------------------------------------------------------------

SpectralData SpectralData::one_point(const CurveFrame& frame) {
  SpectralData sd;
  sd.frame_ = &frame;
  sd.scen_ = Scenario::one_point;
  const CurveModel& curve = frame.curve();
  const BasePoint& b = frame.base();
  if (b.at_infinity) {
    sd.charts_.push_back(PunctureChart::infinity_odd(curve));
  } else {
    const CurvePoint p = curve.point(b.x, b.sheet);
    sd.charts_.push_back(PunctureChart::finite_point(curve, p.x, p.y));
    sd.conj_charts_.push_back(PunctureChart::finite_point(
        curve, p.x, curve.hyperelliptic_conjugate_y(p.y)));
  }
  sd.init_common();
  for (int i = 1; i <= 3; ++i)
    sd.forms_.push_back(sd.build_second_kind(i, 0));
  for (auto& m : sd.forms_) sd.finalize_form(m);
  sd.compute_flows();
  sd.shift_ = CVec::Zero(frame.genus());
  sd.K_scn_ = frame.riemann_constants();
  sd.setup_anchors();
  return sd;
}

SpectralData SpectralData::two_point(const CurveFrame& frame, cplx a) {
  SpectralData sd;
  sd.frame_ = &frame;
  sd.scen_ = Scenario::two_point;
  const CurveModel& curve = frame.curve();
  if (curve.odd_model() || !curve.x_negation_symmetric())
    throw InputError("two-point scenario requires an even-symmetric curve");
  if (!(std::abs(a) > 0.0))
    throw InputError("marked pair abscissa must be nonzero");
  const cplx ya = curve.y_principal(a);
  const cplx yc = curve.hyperelliptic_conjugate_y(ya);
  sd.charts_.push_back(PunctureChart::finite_point(curve, a, ya, +1.0));
  sd.charts_.push_back(PunctureChart::finite_point(curve, -a, ya, -1.0));
  sd.conj_charts_.push_back(PunctureChart::finite_point(curve, a, yc, +1.0));
  sd.conj_charts_.push_back(PunctureChart::finite_point(curve, -a, yc, -1.0));
  sd.init_common();
  sd.forms_.push_back(sd.build_third_kind());
  sd.forms_.push_back(sd.build_second_kind(1, 0));
  sd.forms_.push_back(sd.build_second_kind(1, 1));
  // The connecting differential must be odd under the curve involution,
  // i.e. its x-part satisfies h(-x, y) = h(x, y).  Because its periods are
  // normalized against concrete loop representatives of the a-cycles, this
  // holds exactly when the marked pair lies in the same chamber as the
  // involution's fixed points — inside the loop surrounding the invariant
  // branch cut.  Outside that chamber the normalization differs from the
  // odd differential by an integer combination of holomorphic forms, and
  // the pair placement must be rejected.
  {
    const RationalDifferential& h0 = sd.forms_[0].form;
    const double sc = curve.scale();
    for (cplx t : {cplx(0.37, 0.59), cplx(-0.83, 0.21)}) {
      const cplx x = sc * t;
      const cplx y = curve.y_principal(x);
      const cplx lhs = h0.eval(-x, y);
      const cplx rhs = h0.eval(x, y);
      if (std::abs(lhs - rhs) > 1e-7 * (1.0 + std::abs(rhs)))
        throw InputError(
            "marked pair lies outside the chamber of the involution's fixed "
            "points, breaking the parity of the connecting differential");
    }
  }
  for (auto& m : sd.forms_) sd.finalize_form(m);
  sd.compute_flows();
  sd.shift_ = frame.abel(CurvePoint{cplx(a), ya});
  sd.K_scn_ = frame.riemann_constants() +
              static_cast<double>(frame.genus() - 1) * sd.shift_;
  sd.setup_anchors();
  return sd;
}

CVec SpectralData::abel(const CurvePoint& p) const {
  return frame_->abel(p) - shift_;
}

void SpectralData::init_common() {
  const CurveModel& curve = frame_->curve();
  obstacles_ = curve.branch_points();
  std::vector<cplx> poles;
  for (const auto& ch : charts_)
    if (!ch.at_infinity()) {
      obstacles_.push_back(ch.x0());
      poles.push_back(ch.x0());
    }

  const int g = genus();
  const auto& cuts = frame_->homology().cuts;
  loop_corners_.assign(static_cast<size_t>(g), {});
  a_signs_.assign(static_cast<size_t>(g), 0.0);

  for (int k = 0; k < g; ++k) {
    const Cut& c = cuts[static_cast<size_t>(k)];
    cplx u = c.e1 - c.e0;
    const double L = std::abs(u);
    u /= L;
    const cplx nn = kI * u;
    const cplx mid = 0.5 * (c.e0 + c.e1);

    double dmin = std::numeric_limits<double>::infinity();
    for (cplx e : curve.branch_points()) {
      if (std::abs(e - c.e0) < 1e-12 || std::abs(e - c.e1) < 1e-12) continue;
      dmin = std::min(dmin, seg_distance(e, c.e0, c.e1));
    }
    double delta = 0.45 * std::min(L, std::isfinite(dmin) ? dmin : L);

    bool ok = false;
    std::vector<cplx> corners(4);
    for (int tries = 0; tries < 14 && !ok; ++tries) {
      if (tries > 0) delta *= 0.7;
      corners = {c.e0 - delta * u + delta * nn, c.e1 + delta * u + delta * nn,
                 c.e1 + delta * u - delta * nn, c.e0 - delta * u - delta * nn};
      // Signed clearance from the rectangle boundary: positive outside.
      auto boundary_gap = [&](cplx z) {
        const cplx d = z - mid;
        const double pu = (d * std::conj(u)).real();
        const double pn = (d * std::conj(nn)).real();
        const double dx = std::abs(pu) - (0.5 * L + delta);
        const double dy = std::abs(pn) - delta;
        if (dx <= 0.0 && dy <= 0.0) return std::max(dx, dy);
        return std::hypot(std::max(dx, 0.0), std::max(dy, 0.0));
      };
      ok = true;
      for (cplx e : curve.branch_points()) {
        if (std::abs(e - c.e0) < 1e-12 || std::abs(e - c.e1) < 1e-12) continue;
        if (boundary_gap(e) < 0.4 * delta) {
          ok = false;
          break;
        }
      }
      for (int j = 0; ok && j <= g; ++j) {
        if (j == k) continue;
        const Cut& o = cuts[static_cast<size_t>(j)];
        for (int s = 0; s < 4 && ok; ++s)
          if (segseg_distance(corners[static_cast<size_t>(s)],
                              corners[static_cast<size_t>((s + 1) % 4)], o.e0,
                              o.e1) < 0.4 * delta)
            ok = false;
      }
      // Marked-point poles may sit inside or outside a loop — which side
      // they land on is part of the homology-class bookkeeping, not an
      // error — but they must clear the contour itself.
      for (size_t pi = 0; ok && pi < poles.size(); ++pi)
        if (std::abs(boundary_gap(poles[pi])) < 0.4 * delta) ok = false;
    }
    if (!ok)
      throw PrecisionError("failed to place an off-cut loop around a branch cut");
    loop_corners_[static_cast<size_t>(k)] = {corners[0], corners[1], corners[2],
                                             corners[3], corners[0]};
  }

  // Orientation calibration against the normalized holomorphic basis.
  Integrand om = [this](cplx x, cplx y) { return frame_->omega_values(x, y); };
  for (int k = 0; k < g; ++k) {
    const CVec v = loop_integral(k, om, g);
    CVec ek = CVec::Zero(g);
    ek(k) = 1.0;
    if ((v - ek).cwiseAbs().maxCoeff() < 1e-6)
      a_signs_[static_cast<size_t>(k)] = 1.0;
    else if ((v + ek).cwiseAbs().maxCoeff() < 1e-6)
      a_signs_[static_cast<size_t>(k)] = -1.0;
    else
      throw PrecisionError("off-cut loop is not homologous to its cycle");
  }
}

CVec SpectralData::loop_integral(int k, const Integrand& h, int dim) const {
  const auto& wps = loop_corners_[static_cast<size_t>(k)];
  const cplx y0 = frame_->curve().y_principal(wps[0]);
  const PathResult r =
      integrate_path(frame_->curve(), polyline(wps), y0, h, dim);
  if (std::abs(r.end.y - y0) > 1e-6 * (1.0 + std::abs(y0)))
    throw PrecisionError("off-cut loop fails to close on one sheet");
  return r.integral;
}

CMat SpectralData::loop_a_rows(const std::vector<Column>& cols) const {
  const int g = genus();
  const int nc = static_cast<int>(cols.size());
  Integrand h = [&cols, nc](cplx x, cplx y) {
    CVec v(nc);
    for (int j = 0; j < nc; ++j) v(j) = cols[static_cast<size_t>(j)].form.eval(x, y);
    return v;
  };
  CMat rows(g, nc);
  for (int k = 0; k < g; ++k)
    rows.row(k) =
        (a_signs_[static_cast<size_t>(k)] * loop_integral(k, h, nc)).transpose();
  return rows;
}

CVec SpectralData::loop_a_periods(const RationalDifferential& form) const {
  const int g = genus();
  Integrand h = [&form](cplx x, cplx y) {
    CVec v(1);
    v(0) = form.eval(x, y);
    return v;
  };
  CVec out(g);
  for (int k = 0; k < g; ++k)
    out(k) = a_signs_[static_cast<size_t>(k)] * loop_integral(k, h, 1)(0);
  return out;
}

Meromorphic SpectralData::build_second_kind(int order, int chart_idx) const {
  const int g = genus();
  const PunctureChart& ch = charts_[static_cast<size_t>(chart_idx)];

  std::vector<Column> cols;
  if (ch.at_infinity()) {
    // x^{g+j} dx / y has a pole of order 2j + 2; x^j dx of order 2j + 3.
    for (int j = 0; 2 * j + 2 <= order + 1; ++j) {
      Column c;
      c.form.add(DiffTerm{1.0, g + j, false, 0.0, true});
      cols.push_back(c);
    }
    for (int j = 0; 2 * j + 3 <= order + 1; ++j) {
      Column c;
      c.form.add(DiffTerm{1.0, j, false, 0.0, false});
      cols.push_back(c);
    }
  } else {
    // (1 + y0/y)(x - x0)^{-j} dx is pole-free on the opposite sheet;
    // (x - x0)^{-j} dx / y fills in the remaining principal parts there.
    for (int j = 1; j <= order + 1; ++j) {
      Column c;
      c.form.add(DiffTerm{1.0, j, true, ch.x0(), false});
      c.form.add(DiffTerm{ch.y0(), j, true, ch.x0(), true});
      cols.push_back(c);
    }
    for (int j = 1; j <= order; ++j) {
      Column c;
      c.form.add(DiffTerm{1.0, j, true, ch.x0(), true});
      cols.push_back(c);
    }
  }
  for (int m = 0; m < g; ++m) {
    Column c;
    c.form.add(DiffTerm{1.0, m, false, 0.0, true});
    cols.push_back(c);
  }
  std::vector<const RationalDifferential*> fp;
  fp.reserve(cols.size());
  for (const auto& c : cols) fp.push_back(&c.form);
  const int nc = static_cast<int>(cols.size());

  std::vector<CMat> blocks;
  std::vector<CVec> rhss;
  {
    // Principal part d(w^{-order}): c_{-(order+1)} = -order, lower orders 0.
    CMat lr = laurent_rows_of(ch, fp, ch.radius(), dft_points_, -(order + 1), -1);
    CVec r = CVec::Zero(lr.rows());
    r(0) = -static_cast<double>(order);
    blocks.push_back(std::move(lr));
    rhss.push_back(std::move(r));
  }
  if (!ch.at_infinity()) {
    const PunctureChart& cj = conj_charts_[static_cast<size_t>(chart_idx)];
    CMat lr = laurent_rows_of(cj, fp, cj.radius(), dft_points_, -order, -1);
    blocks.push_back(std::move(lr));
    rhss.push_back(CVec::Zero(order));
  }
  {
    blocks.push_back(loop_a_rows(cols));
    rhss.push_back(CVec::Zero(g));
  }

  int nr = 0;
  for (const auto& b : blocks) nr += static_cast<int>(b.rows());
  CMat A(nr, nc);
  CVec b(nr);
  int at = 0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    A.middleRows(at, blocks[i].rows()) = blocks[i];
    b.segment(at, rhss[i].size()) = rhss[i];
    at += static_cast<int>(blocks[i].rows());
  }

  const CVec coef = solve_ls(A, b);
  Meromorphic m;
  m.kind = Meromorphic::Kind::second_kind;
  m.order = order;
  m.chart = chart_idx;
  for (int j = 0; j < nc; ++j)
    m.form.accumulate(cols[static_cast<size_t>(j)].form, coef(j));
  return m;
}

Meromorphic SpectralData::build_third_kind() const {
  const int g = genus();
  const cplx a = charts_[0].x0();
  const cplx ya = charts_[0].y0();

  // Residue -1 at (a, ya), +1 at (-a, ya), zero on the opposite sheet.
  RationalDifferential raw;
  raw.add(DiffTerm{-0.5, 1, true, a, false});
  raw.add(DiffTerm{-0.5 * ya, 1, true, a, true});
  raw.add(DiffTerm{+0.5, 1, true, -a, false});
  raw.add(DiffTerm{+0.5 * ya, 1, true, -a, true});

  std::vector<Column> cols(static_cast<size_t>(g));
  for (int m = 0; m < g; ++m)
    cols[static_cast<size_t>(m)].form.add(DiffTerm{1.0, m, false, 0.0, true});

  const CMat A = loop_a_rows(cols);
  const CVec b = -loop_a_periods(raw);
  const CVec coef = solve_ls(A, b);

  Meromorphic m;
  m.kind = Meromorphic::Kind::third_kind;
  m.order = 0;
  m.chart = 0;
  m.form = raw;
  for (int j = 0; j < g; ++j)
    m.form.accumulate(cols[static_cast<size_t>(j)].form, coef(j));
  return m;
}

void SpectralData::finalize_form(Meromorphic& m) const {
  const bool third = (m.kind == Meromorphic::Kind::third_kind);
  m.series.clear();
  m.a.clear();
  m.a0.assign(static_cast<size_t>(n_charts()), cplx(0.0));

  for (int al = 0; al < n_charts(); ++al) {
    const PunctureChart& ch = charts_[static_cast<size_t>(al)];
    const int lo = third ? -1 : (al == m.chart ? -(m.order + 1) : 0);
    ChartSeries s = make_series(ch, m.form, ch.radius(), dft_points_, lo, series_top_);
    const int hi2 = std::min(series_top_, 8);
    const ChartSeries s2 =
        make_series(ch, m.form, ch.radius(), 2 * dft_points_, lo, hi2);
    // Noise floor: sample roundoff (relative to the peak integrand value on
    // the circle) is amplified by r^-n when extracting the order-n
    // coefficient.  A sheet-tracking error would show up at O(|c|), far
    // above this floor.
    for (int n = lo; n <= hi2; ++n) {
      const double floor_n =
          1e-15 * s2.peak * std::pow(s2.radius, -static_cast<double>(n));
      if (std::abs(s.coeff(n) - s2.coeff(n)) >
          1e-8 * (1.0 + std::abs(s2.coeff(n))) + floor_n)
        throw PrecisionError("Laurent extraction unstable under doubling");
    }
    m.series.push_back(std::move(s));
    m.a.push_back(m.series.back().integral_constants(kSMax));
  }

  if (third) {
    if (std::abs(m.series[0].residue() + 1.0) > 1e-8 ||
        std::abs(m.series[1].residue() - 1.0) > 1e-8)
      throw PrecisionError("third-kind residues failed to normalize");
  } else {
    const ChartSeries& s = m.series[static_cast<size_t>(m.chart)];
    if (std::abs(s.coeff(-(m.order + 1)) + static_cast<double>(m.order)) > 1e-8)
      throw PrecisionError("second-kind principal part failed to normalize");
    for (int n = -m.order; n <= -1; ++n)
      if (std::abs(s.coeff(n)) > 1e-8)
        throw PrecisionError("second-kind lower pole orders failed to vanish");
    for (int al = 0; al < n_charts(); ++al)
      if (al != m.chart && std::abs(m.series[static_cast<size_t>(al)].residue()) > 1e-8)
        throw PrecisionError("unexpected residue at a marked point");
  }

  // Regularity over the pole abscissas on the opposite sheet.
  for (const auto& cj : conj_charts_) {
    const int lo = third ? -1 : -(m.order + 1);
    const auto vals = chart_values(cj, m.form, cj.radius(), dft_points_);
    const auto cf = dft_laurent(vals, cj.radius(), lo, -1);
    for (cplx cc : cf)
      if (std::abs(cc) > 1e-8)
        throw PrecisionError("differential has a pole on the opposite sheet");
  }

  const CVec ap = loop_a_periods(m.form);
  if (ap.cwiseAbs().maxCoeff() > 1e-8)
    throw PrecisionError("a-periods failed to vanish");
}

void SpectralData::compute_flows() {
  const int g = genus();
  for (auto& m : forms_) {
    if (m.kind == Meromorphic::Kind::third_kind) {
      // 2 pi i U = b-periods (the poles sit clear of the b-cycle paths).
      Integrand h = [&m](cplx x, cplx y) {
        CVec v(1);
        v(0) = m.form.eval(x, y);
        return v;
      };
      CVec U(g);
      for (int k = 0; k < g; ++k)
        U(k) = frame_->b_cycle(k, h, 1)(0) / (2.0 * kPi * kI);
      m.U = U;
    } else {
      m.U = flow_from_basis_taylor(m.chart, m.order);
    }
  }
}

CVec SpectralData::flow_from_basis_taylor(int chart_idx, int order) const {
  // Reciprocity: with omega_k = sum_n beta_n w^n dw at the marked point,
  // the b-periods of the normalized order-i differential are
  // 2 pi i U_i^k with U_i^k = -beta_{i-1}^{(k)}.
  const PunctureChart& ch = charts_[static_cast<size_t>(chart_idx)];
  const double r = ch.radius();
  const int M = dft_points_;
  const auto pts = ch.circle(r, M);
  const int g = genus();
  std::vector<std::vector<cplx>> vals(
      static_cast<size_t>(g), std::vector<cplx>(static_cast<size_t>(M)));
  for (int j = 0; j < M; ++j) {
    const cplx w = std::polar(r, 2.0 * kPi * j / M);
    const auto& p = pts[static_cast<size_t>(j)];
    const CVec om = frame_->omega_values(p.x, p.y);
    const cplx dxdw = ch.dx_dw(w);
    for (int k = 0; k < g; ++k)
      vals[static_cast<size_t>(k)][static_cast<size_t>(j)] = om(k) * dxdw;
  }
  CVec U(g);
  for (int k = 0; k < g; ++k) {
    const auto cf = dft_laurent(vals[static_cast<size_t>(k)], r, order - 1, order - 1);
    U(k) = -cf[0];
  }
  return U;
}

Integrand SpectralData::stacked() const {
  const int g = genus();
  const int n = n_forms();
  return [this, g, n](cplx x, cplx y) {
    CVec v(g + n);
    v.head(g) = frame_->omega_values(x, y);
    for (int j = 0; j < n; ++j) v(g + j) = forms_[static_cast<size_t>(j)].form.eval(x, y);
    return v;
  };
}

std::vector<cplx> SpectralData::staged_waypoints(cplx to_x) const {
  const cplx xa = anchors_[0].p.x;
  const PunctureChart& ch = charts_[0];
  const cplx xs = ch.x_of(cplx(ch.radius()));
  const double sc = frame_->curve().scale();
  const double d1 = min_distance(obstacles_, to_x);
  if (d1 < 1e-6 * sc)
    throw InputError("evaluation point too close to a marked or branch point");
  const double ds = min_distance(obstacles_, xs);
  const double margin =
      std::min({frame_->route_margin(), 0.4 * ds, 0.4 * d1});
  std::vector<cplx> wps{xa};
  const auto mid = route_avoiding(obstacles_, xs, to_x, margin);
  wps.insert(wps.end(), mid.begin(), mid.end());
  return wps;
}

CVec SpectralData::integrate_joint(const std::vector<cplx>& waypoints,
                                   cplx y_start,
                                   const CurvePoint& target) const {
  const Integrand h = stacked();
  const int dim = genus() + n_forms();
  const PathResult r =
      integrate_path(frame_->curve(), polyline(waypoints), y_start, h, dim);
  const double ys = std::max(1.0, std::abs(target.y));
  if (std::abs(r.end.y - target.y) <= 1e-6 * ys) return r.integral;
  if (std::abs(r.end.y + target.y) > 1e-6 * ys)
    throw PrecisionError("sheet tracking arrived off the curve");

  // Arrived on the opposite sheet: append a loop around the branch point
  // nearest to the target to flip it.
  const auto& roots = frame_->curve().branch_points();
  cplx e = roots[0];
  for (cplx q : roots)
    if (std::abs(q - target.x) < std::abs(e - target.x)) e = q;
  double rl = frame_->route_margin();
  for (const auto& ch : charts_)
    if (!ch.at_infinity()) rl = std::min(rl, 0.45 * std::abs(e - ch.x0()));
  std::vector<cplx> wl{target.x};
  const auto loop = loop_around(e, rl, target.x);
  wl.insert(wl.end(), loop.begin(), loop.end());
  wl.push_back(target.x);
  const PathResult r2 =
      integrate_path(frame_->curve(), polyline(wl), r.end.y, h, dim);
  if (std::abs(r2.end.y - target.y) > 1e-6 * ys)
    throw PrecisionError("sheet correction loop failed");
  return r.integral + r2.integral;
}

void SpectralData::setup_anchors() {
  const int g = genus();
  const int n = n_forms();
  anchors_.clear();
  anchor_ws_.clear();
  for (int al = 0; al < n_charts(); ++al)
    anchor_ws_.push_back(0.5 * charts_[static_cast<size_t>(al)].radius());

  Values a0;
  a0.p = charts_[0].anchor(anchor_ws_[0]);
  a0.A = frame_->abel(a0.p) - shift_;
  a0.Omega = CVec(n);
  for (int j = 0; j < n; ++j)
    a0.Omega(j) = forms_[static_cast<size_t>(j)].series[0].integral_value(
        cplx(anchor_ws_[0]));
  anchors_.push_back(a0);
  if (n_charts() == 1) return;

  // Transport the abelian integrals jointly to the second anchor; this fixes
  // the integration constants a0 of every form in the second chart.
  Values a1;
  a1.p = charts_[1].anchor(anchor_ws_[1]);
  const cplx xs0 = charts_[0].x_of(cplx(charts_[0].radius()));
  const cplx xs1 = charts_[1].x_of(cplx(charts_[1].radius()));
  const double margin = std::min({frame_->route_margin(),
                                  0.4 * min_distance(obstacles_, xs0),
                                  0.4 * min_distance(obstacles_, xs1)});
  std::vector<cplx> wps{anchors_[0].p.x};
  const auto mid = route_avoiding(obstacles_, xs0, xs1, margin);
  wps.insert(wps.end(), mid.begin(), mid.end());
  wps.push_back(a1.p.x);
  const CVec I = integrate_joint(wps, anchors_[0].p.y, a1.p);
  a1.A = anchors_[0].A + I.head(g);
  a1.Omega = anchors_[0].Omega + I.tail(n);
  anchors_.push_back(a1);

  for (int j = 0; j < n; ++j) {
    Meromorphic& m = forms_[static_cast<size_t>(j)];
    m.a0[1] = a1.Omega(j) -
              m.series[1].integral_value(cplx(anchor_ws_[1]));
  }

  // The transported Abel value must agree with the framed Abel map.
  const CVec d = frame_->reduce(frame_->abel(a1.p) - shift_ - a1.A);
  if (d.cwiseAbs().maxCoeff() > 1e-7)
    throw PrecisionError("anchor transport disagrees with the Abel map");
}

SpectralData::Values SpectralData::evaluate(const CurvePoint& p) const {
  if (!frame_->curve().contains(p, 1e-8))
    throw InputError("evaluation point does not lie on the curve");
  const auto wps = staged_waypoints(p.x);
  const CVec I = integrate_joint(wps, anchors_[0].p.y, p);
  Values v;
  v.p = p;
  v.A = anchors_[0].A + I.head(genus());
  v.Omega = anchors_[0].Omega + I.tail(n_forms());
  return v;
}

std::vector<SpectralData::Values> SpectralData::circle_values(int alpha,
                                                              double r,
                                                              int M) const {
  const PunctureChart& ch = charts_[static_cast<size_t>(alpha)];
  if (!(r > 0.0) || r > 0.6 * ch.scale())
    throw InputError("circle radius outside the chart");
  if (M < 16) throw InputError("too few circle points");
  const Values& anc = anchors_[static_cast<size_t>(alpha)];
  const Integrand h = stacked();
  const int g = genus();
  const int n = n_forms();
  const int dim = g + n;

  std::vector<Values> out;
  out.reserve(static_cast<size_t>(M + 1));
  CVec acc = CVec::Zero(dim);
  cplx xprev = anc.p.x;
  cplx y = anc.p.y;

  const cplx x0 = ch.x_of(cplx(r));
  if (std::abs(r - anchor_ws_[static_cast<size_t>(alpha)]) > 1e-15) {
    const SegmentResult sr = integrate_segment(
        frame_->curve(), Segment{xprev, x0, Segment::BranchEnd::none}, y, h, dim);
    acc += sr.integral;
    y = sr.y_end;
  }
  xprev = x0;
  auto push = [&](const CurvePoint& p) {
    Values v;
    v.p = p;
    v.A = anc.A + acc.head(g);
    v.Omega = anc.Omega + acc.tail(n);
    out.push_back(std::move(v));
  };
  push(CurvePoint{x0, y});
  for (int j = 1; j <= M; ++j) {
    const cplx w = std::polar(r, 2.0 * kPi * j / M);
    const cplx xj = ch.x_of(w);
    const SegmentResult sr = integrate_segment(
        frame_->curve(), Segment{xprev, xj, Segment::BranchEnd::none}, y, h, dim);
    acc += sr.integral;
    y = sr.y_end;
    xprev = xj;
    push(CurvePoint{xj, y});
  }

  const Values& f0 = out.front();
  const Values& fM = out.back();
  if (std::abs(fM.p.y - f0.p.y) > 1e-6 * (1.0 + std::abs(f0.p.y)))
    throw PrecisionError("circle fails to close on the curve");
  const double ascale = 1.0 + f0.A.cwiseAbs().maxCoeff();
  if ((fM.A - f0.A).cwiseAbs().maxCoeff() > 1e-8 * ascale)
    throw PrecisionError("Abel map fails to close around the circle");
  for (int j = 0; j < n; ++j) {
    const cplx jump =
        2.0 * kPi * kI *
        forms_[static_cast<size_t>(j)].series[static_cast<size_t>(alpha)].residue();
    const double os = 1.0 + std::abs(f0.Omega(j));
    if (std::abs(fM.Omega(j) - f0.Omega(j) - jump) > 1e-8 * os)
      throw PrecisionError("abelian integral has the wrong circle monodromy");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Involution
// ---------------------------------------------------------------------------

InvolutionData involution_action(const SpectralData& sd) {
  const CurveFrame& frame = sd.frame();
  const CurveModel& curve = frame.curve();
  if (!curve.x_negation_symmetric())
    throw InputError("involution requires an even-symmetric curve");
  const int g = frame.genus();

  InvolutionData inv;
  // sigma pulls x^j dx / y back to (-1)^{j+1} x^j dx / y; conjugating by the
  // normalization gives the action on the a-normalized basis.
  const CMat C = frame.normalization();
  CMat D = CMat::Zero(g, g);
  for (int j = 0; j < g; ++j) D(j, j) = (j % 2 == 0) ? -1.0 : 1.0;
  inv.M = C * D * C.inverse();
  if ((inv.M * inv.M - CMat::Identity(g, g)).cwiseAbs().maxCoeff() > 1e-8)
    throw PrecisionError("involution action is not an involution");

  const cplx yf = curve.y_principal(cplx(0.0));
  inv.fixed_points = {CurvePoint{0.0, yf},
                      CurvePoint{0.0, curve.hyperelliptic_conjugate_y(yf)}};

  // Translation part of A(sigma p) = M A(p) + v, validated across samples.
  std::vector<cplx> obst = curve.branch_points();
  for (int al = 0; al < sd.n_charts(); ++al)
    if (!sd.chart(al).at_infinity()) obst.push_back(sd.chart(al).x0());
  const double sc = curve.scale();
  static const std::vector<cplx> cand = {
      {0.137, 0.291},   {-0.221, 0.407}, {0.385, -0.155}, {-0.071, -0.333},
      {0.253, 0.181},   {0.431, 0.367},  {-0.313, -0.257}, {0.191, 0.443},
      {-0.159, 0.219},  {0.347, -0.401}};
  std::vector<cplx> xs;
  for (cplx c : cand) {
    const cplx x = sc * c;
    if (min_distance(obst, x) < 0.15 * sc) continue;
    if (min_distance(obst, -x) < 0.15 * sc) continue;
    xs.push_back(x);
    if (static_cast<int>(xs.size()) >= 2 * g + 1) break;
  }
  if (static_cast<int>(xs.size()) < 2 * g + 1)
    throw PrecisionError("not enough clear samples for the involution");

  std::vector<CVec> diffs;
  for (cplx x : xs) {
    const cplx y = curve.y_principal(x);
    const CVec Ap = sd.abel(CurvePoint{x, y});
    const CVec As = sd.abel(CurvePoint{-x, y});
    diffs.push_back(frame.reduce(As - inv.M * Ap));
  }
  inv.v = diffs[0];
  for (size_t i = 1; i < diffs.size(); ++i) {
    const CVec d = frame.reduce(diffs[i] - diffs[0]);
    if (d.cwiseAbs().maxCoeff() > 1e-7)
      throw PrecisionError("involution translation vector is unstable");
  }

  // Eigenspaces of M: -1 (moved by sigma) and +1 (invariant).
  Eigen::ComplexEigenSolver<CMat> es(inv.M);
  if (es.info() != Eigen::Success)
    throw PrecisionError("involution eigendecomposition failed");
  std::vector<CVec> pr, iv;
  for (int i = 0; i < g; ++i) {
    const cplx lam = es.eigenvalues()(i);
    CVec w = es.eigenvectors().col(i);
    int imax = 0;
    w.cwiseAbs().maxCoeff(&imax);
    w /= w(imax);
    w /= w.norm();
    if (std::abs(lam + 1.0) <= 1e-8)
      pr.push_back(w);
    else if (std::abs(lam - 1.0) <= 1e-8)
      iv.push_back(w);
    else
      throw PrecisionError("involution has an unexpected eigenvalue");
  }
  inv.prym_dirs = CMat(g, static_cast<int>(pr.size()));
  for (size_t i = 0; i < pr.size(); ++i) inv.prym_dirs.col(static_cast<int>(i)) = pr[i];
  inv.invariant_dirs = CMat(g, static_cast<int>(iv.size()));
  for (size_t i = 0; i < iv.size(); ++i)
    inv.invariant_dirs.col(static_cast<int>(i)) = iv[i];

  // Half divisor: one representative of each sigma pair of the zeros of the
  // selecting differential (the first form of the scenario).
  const auto zeros = differential_zeros(curve, sd.omega(0).form, 2 * g);
  for (const auto& z : zeros)
    if (std::abs(z.x) < 1e-9 * sc)
      throw PrecisionError("selecting differential vanishes at a fixed point");
  std::vector<int> used(zeros.size(), 0);
  std::vector<CurvePoint> half;
  for (size_t i = 0; i < zeros.size(); ++i) {
    if (used[i]) continue;
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t j = i + 1; j < zeros.size(); ++j) {
      if (used[j]) continue;
      const double d =
          std::abs(zeros[j].x + zeros[i].x) + std::abs(zeros[j].y - zeros[i].y);
      if (d < bd) {
        bd = d;
        best = static_cast<int>(j);
      }
    }
    if (best < 0 || bd > 1e-6 * std::max(1.0, sc))
      throw PrecisionError("zero divisor is not involution-symmetric");
    used[i] = used[static_cast<size_t>(best)] = 1;
    const CurvePoint& zi = zeros[i];
    const CurvePoint& zj = zeros[static_cast<size_t>(best)];
    CurvePoint rep = zi;
    if (std::abs(zi.x.real()) > 1e-12 * sc)
      rep = (zi.x.real() > 0.0) ? zi : zj;
    else
      rep = (zi.x.imag() > 0.0) ? zi : zj;
    half.push_back(rep);
  }
  if (static_cast<int>(half.size()) != g)
    throw PrecisionError("half divisor has the wrong degree");
  inv.half_divisor = half;

  // Everything below is computed with the frame's own Abel map, whose base
  // point is fixed by the involution, so A(sigma p) = M A(p) exactly and
  // the divisor-class identities carry no translation term.
  CVec AD = CVec::Zero(g);
  for (const auto& q : half) AD += frame.abel(q);

  // kappa is the Abel class of (canonical + both marked points); the class
  // of a canonical divisor equals -2K with K the Riemann constants.
  CVec kappa = -2.0 * frame.riemann_constants();
  if (sd.scenario() == SpectralData::Scenario::two_point) {
    const PunctureChart& c0 = sd.chart(0);
    const PunctureChart& c1 = sd.chart(1);
    kappa += frame.abel(CurvePoint{c0.x0(), c0.y0()}) +
             frame.abel(CurvePoint{c1.x0(), c1.y0()});
  }
  // The shift solves (1 + M) zeta = kappa (mod lattice): the half divisor
  // and its mirror image sum to the full zero divisor of the selecting
  // differential, whose class is exactly kappa.  Keep the reflected
  // candidate through the Riemann constants as a fallback for divisor
  // classes presented the dual way round.
  const CMat oneM = CMat::Identity(g, g) + inv.M;
  const CVec zA = frame.reduce(AD);
  const CVec zK = frame.reduce(frame.riemann_constants() - AD);
  const double eA = frame.reduce(oneM * zA - kappa).cwiseAbs().maxCoeff();
  const double eK = frame.reduce(oneM * zK - kappa).cwiseAbs().maxCoeff();
  if (std::min(eA, eK) > 1e-6)
    throw PrecisionError("prym shift congruence failed");
  inv.zeta = (eA <= eK) ? zA : zK;
  return inv;
}

}  // namespace finitegap
