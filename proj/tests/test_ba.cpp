#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "finitegap/ba.hpp"

using namespace finitegap;

namespace {

CVec coeffs(std::initializer_list<double> v) {
  CVec c(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) c(i++) = x;
  return c;
}

// (x^2 - 1)(x^2 - 4)(x^2 - 9): even model, genus 2, base point (0, 6i).
const CurveFrame& sextic_frame() {
  static CurveFrame f(CurveModel(coeffs({-36, 0, 49, 0, -14, 0, 1})),
                      BasePoint{false, 0.0, +1});
  return f;
}

const SpectralData& flex_sd() {
  static SpectralData sd = SpectralData::one_point(sextic_frame());
  return sd;
}

const cplx kTodaA(0.5, 0.0);

const SpectralData& toda_sd() {
  static SpectralData sd = SpectralData::two_point(sextic_frame(), kTodaA);
  return sd;
}

const CurveFrame& quintic_frame() {
  static CurveFrame f(CurveModel(coeffs({-1, 0, 0, 0, 0, 1})),
                      BasePoint{true, 0.0, +1});
  return f;
}

const SpectralData& quintic_sd() {
  static SpectralData sd = SpectralData::one_point(quintic_frame());
  return sd;
}

// Shared pole divisor: a symmetric half of the zero divisor of the selecting
// differential, so the same wave data feeds the symmetry checks later on.
const std::vector<CurvePoint>& flex_divisor() {
  static std::vector<CurvePoint> d = involution_action(flex_sd()).half_divisor;
  return d;
}

const std::vector<CurvePoint>& toda_divisor() {
  static std::vector<CurvePoint> d = involution_action(toda_sd()).half_divisor;
  return d;
}

struct Setup {
  const SpectralData& sd;
  BakerAkhiezer ba;
  FlowState s;
  Setup(const SpectralData& data, const std::vector<CurvePoint>& divisor,
        cplx x, cplx y, cplx t)
      : sd(data), ba(data), s{ba.divisor_vector(divisor), x, y, t} {}
};

Setup& flex_setup() {
  static Setup st(flex_sd(), flex_divisor(), cplx(0.31, 0.0), cplx(-0.17, 0.0),
                  cplx(0.093, 0.0));
  return st;
}

Setup& toda_setup() {
  static Setup st(toda_sd(), toda_divisor(), cplx(0.4, 0.0), cplx(0.23, 0.0),
                  cplx(-0.11, 0.0));
  return st;
}

// Independent Laurent extraction: raw wave values on a circle, regularized by
// the exponential singularity assembled directly from the catalogued
// principal parts and chart constants, then a plain discrete Fourier sum.
std::vector<cplx> dft_coeffs(const std::vector<cplx>& vals, double r, int lo,
                             int hi) {
  const int M = static_cast<int>(vals.size());
  std::vector<cplx> out;
  for (int n = lo; n <= hi; ++n) {
    cplx s = 0.0;
    for (int j = 0; j < M; ++j)
      s += vals[static_cast<size_t>(j)] *
           std::polar(1.0, -2.0 * kPi * j * n / M);
    out.push_back(s / (static_cast<double>(M) * std::pow(r, n)));
  }
  return out;
}

std::vector<cplx> oracle_xi(const Setup& st, int chart, int count, bool dual) {
  const SpectralData& sd = st.sd;
  const double r = sd.chart(chart).radius();
  const int M = 256;
  auto circle = sd.circle_values(chart, r, M);
  std::vector<cplx> times = st.ba.flow_times(st.s, dual);
  std::vector<cplx> vals(M);
  for (int j = 0; j < M; ++j) {
    cplx w = std::polar(r, 2.0 * kPi * j / M);
    cplx sing = 0.0;
    for (int f = 0; f < sd.n_forms(); ++f) {
      const Meromorphic& mf = sd.omega(f);
      cplx part = mf.a0[static_cast<size_t>(chart)];
      if (mf.kind == Meromorphic::Kind::second_kind && mf.chart == chart)
        part += std::pow(w, -mf.order);
      if (mf.kind == Meromorphic::Kind::third_kind) {
        cplx logw = cplx(std::log(r), 2.0 * kPi * j / M);
        part += (chart == 0) ? -logw : logw;
      }
      sing += times[static_cast<size_t>(f)] * part;
    }
    vals[static_cast<size_t>(j)] =
        st.ba.evaluate(st.s, circle[static_cast<size_t>(j)], dual).value *
        std::exp(-sing);
  }
  return dft_coeffs(vals, r, 0, count);
}

// Fourth-order first/second finite differences (Richardson over step halving).
template <typename F>
cplx fd1(F&& f, double h) {
  cplx a = (f(h) - f(-h)) / (2 * h);
  cplx b = (f(h / 2) - f(-h / 2)) / h;
  return (4.0 * b - a) / 3.0;
}

template <typename F>
cplx fd2(F&& f, double h) {
  cplx c0 = f(0.0);
  cplx a = (f(h) - 2.0 * c0 + f(-h)) / (h * h);
  cplx b = (f(h / 2) - 2.0 * c0 + f(-h / 2)) / (h * h / 4);
  return (4.0 * b - a) / 3.0;
}

template <typename F>
cplx fd3(F&& f, double h) {
  auto stencil = [&](double s) {
    return (f(2 * s) - 2.0 * f(s) + 2.0 * f(-s) - f(-2 * s)) / (2 * s * s * s);
  };
  return (4.0 * stencil(h / 2) - stencil(h)) / 3.0;
}

struct XiTable {
  // xi arrays sampled at time offsets, for tower recursions
  std::vector<cplx> at(const Setup& st, cplx dx, cplx dy, cplx dt, int n,
                       bool dual, int chart = 0) const {
    FlowState s2 = st.s;
    s2.x += dx;
    s2.y += dy;
    s2.t += dt;
    return st.ba.wave_coefficients(s2, n, dual, chart).xi;
  }
};

CurvePoint probe_point() {
  return sextic_frame().curve().point(cplx(1.7, 0.4), +1);
}

}  // namespace

// ---------------------------------------------------------------------------
// Normalization and analytic structure
// ---------------------------------------------------------------------------

TEST_CASE("wave function equals one at zero times") {
  for (const Setup* st : {&flex_setup(), &toda_setup()}) {
    FlowState zero{st->s.Z, 0.0, 0.0, 0.0};
    for (double xc : {-2.4, 0.7, 1.9}) {
      auto p = sextic_frame().curve().point(cplx(xc, 0.35), +1);
      auto vals = st->sd.evaluate(p);
      CHECK(std::abs(st->ba.evaluate(zero, vals).value - 1.0) < 1e-10);
      CHECK(std::abs(st->ba.evaluate(zero, vals, true).value - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("expansion coefficients vanish at zero times") {
  for (const Setup* st : {&flex_setup(), &toda_setup()}) {
    FlowState zero{st->s.Z, 0.0, 0.0, 0.0};
    const int charts = (st == &toda_setup()) ? 2 : 1;
    for (int chart = 0; chart < charts; ++chart) {
      for (bool dual : {false, true}) {
        auto wc = st->ba.wave_coefficients(zero, 3, dual, chart);
        CHECK(std::abs(wc.lead - 1.0) < 1e-9);
        for (const cplx& xi : wc.xi) CHECK(std::abs(xi) < 1e-9);
      }
    }
  }
}

TEST_CASE("pole divisor is flagged and off-divisor points are clean") {
  Setup& st = flex_setup();
  auto at_pole = st.ba.evaluate(st.s, flex_divisor()[0]);
  CHECK(at_pole.near_divisor);
  auto generic = st.ba.evaluate(st.s, probe_point());
  CHECK(!generic.near_divisor);
  CHECK(std::isfinite(std::abs(generic.value)));
}

TEST_CASE("shift vector construction agrees with the translated image") {
  // Z = -(sum of Abel images) - (vector of constants): check modulo lattice.
  Setup& st = flex_setup();
  const CurveFrame& frame = sextic_frame();
  CVec direct = -frame.abel_divisor(flex_divisor()) - frame.riemann_constants();
  CHECK(frame.reduce(st.s.Z - direct).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(st.ba.divisor_vector({flex_divisor()[0]}), InputError);
}

// ---------------------------------------------------------------------------
// Path independence
// ---------------------------------------------------------------------------

TEST_CASE("value is unchanged across homotopic evaluation paths") {
  Setup& st = flex_setup();
  auto circle = st.sd.circle_values(0, st.sd.chart(0).radius(), 64);
  auto a = st.ba.evaluate(st.s, circle.front());
  auto b = st.ba.evaluate(st.s, circle.back());
  CHECK(std::abs(a.value - b.value) < 1e-8);
}

TEST_CASE("value is unchanged when the path picks up a period loop") {
  Setup& st = flex_setup();
  const CMat& B = sextic_frame().period_matrix();
  auto vals = st.sd.evaluate(probe_point());
  cplx base = st.ba.evaluate(st.s, vals).value;
  for (int k = 0; k < 2; ++k) {
    SpectralData::Values moved = vals;
    moved.A += B.col(k);
    for (int f = 0; f < st.sd.n_forms(); ++f)
      moved.Omega(f) += 2.0 * kPi * kI * st.sd.omega(f).U(k);
    CHECK(std::abs(st.ba.evaluate(st.s, moved).value - base) < 1e-7);
    SpectralData::Values cycled = vals;
    cycled.A(k) += 1.0;
    CHECK(std::abs(st.ba.evaluate(st.s, cycled).value - base) < 1e-9);
  }
}

TEST_CASE("shift vector is defined modulo the period lattice") {
  Setup& st = flex_setup();
  const CMat& B = sextic_frame().period_matrix();
  auto vals = st.sd.evaluate(probe_point());
  cplx base = st.ba.evaluate(st.s, vals).value;
  FlowState moved = st.s;
  moved.Z += CVec::Ones(2) + B.col(1);
  CHECK(std::abs(st.ba.evaluate(moved, vals).value - base) < 1e-8);
}

// ---------------------------------------------------------------------------
// Laurent extraction
// ---------------------------------------------------------------------------

TEST_CASE("wave coefficients match an independent spectral reconstruction") {
  Setup& st = flex_setup();
  auto wc = st.ba.wave_coefficients(st.s, 4);
  auto raw = oracle_xi(st, 0, 4, false);
  CHECK(std::abs(raw[0] - wc.lead) < 1e-8);
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(raw[static_cast<size_t>(k) + 1] / raw[0] - wc.xi[k]) <
          1e-8);

  Setup& td = toda_setup();
  auto wc2 = td.ba.wave_coefficients(td.s, 3);
  auto raw2 = oracle_xi(td, 0, 3, false);
  CHECK(std::abs(raw2[0] - wc2.lead) < 1e-8);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(raw2[static_cast<size_t>(k) + 1] / raw2[0] - wc2.xi[k]) <
          1e-8);
}

TEST_CASE("coefficients are stable when the extraction radius is halved") {
  for (const Setup* st : {&flex_setup(), &toda_setup()}) {
    const int charts = (st == &toda_setup()) ? 2 : 1;
    for (int chart = 0; chart < charts; ++chart) {
      for (bool dual : {false, true}) {
        auto a = st->ba.wave_coefficients(st->s, 4, dual, chart);
        auto b = st->ba.wave_coefficients(
            st->s, 4, dual, chart, 0.5 * st->sd.chart(chart).radius());
        CHECK(std::abs(a.lead - b.lead) < 1e-7 * std::abs(a.lead));
        for (int k = 0; k < 4; ++k)
          CHECK(std::abs(a.xi[k] - b.xi[k]) < 1e-7);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// One-puncture hierarchy: potentials and recursions
// ---------------------------------------------------------------------------

TEST_CASE("second-order potential matches the derivative of the first coefficient") {
  Setup& st = flex_setup();
  XiTable xi;
  auto df = st.ba.derived_fields(st.s);
  cplx u_fd = 2.0 * fd1([&](double h) { return xi.at(st, h, 0, 0, 1, false)[0]; },
                        1e-3);
  CHECK(std::abs(u_fd - df.u) < 1e-6);
  // Frozen regression values for the standard state.
  CHECK(std::abs(df.u - cplx(-0.256075623629096, 0.0)) < 1e-9);
  CHECK(std::abs(df.w - cplx(0.374742761359877, 0.0)) < 1e-7);
  CHECK(std::abs(df.b1 - cplx(-0.498525735950559, 0.0)) < 1e-9);
}

TEST_CASE("third-order coefficient of the expansion is curve data, not flow data") {
  Setup& st = flex_setup();
  auto d1 = st.ba.derived_fields(st.s);
  FlowState other{st.s.Z, cplx(-0.12, 0.0), cplx(0.27, 0.0), cplx(0.051, 0.0)};
  auto d2 = st.ba.derived_fields(other);
  CHECK(std::abs(d1.b3 - d2.b3) < 1e-5);
}

TEST_CASE("coefficients satisfy the second-flow recursion") {
  Setup& st = flex_setup();
  XiTable xi;
  auto df = st.ba.derived_fields(st.s);
  const double h = 1e-3;
  const int n = 5;
  auto x0 = xi.at(st, 0, 0, 0, n, false);
  for (int s = 0; s <= 3; ++s) {
    cplx dxs1 =
        fd1([&](double e) { return xi.at(st, e, 0, 0, n, false)[static_cast<size_t>(s)]; },
            h);
    cplx dys = (s == 0)
                   ? cplx(0.0)
                   : fd1([&](double e) {
                       return xi.at(st, 0, e, 0, n, false)[static_cast<size_t>(s) - 1];
                     },
                         h);
    cplx dx2s = (s == 0)
                    ? cplx(0.0)
                    : fd2([&](double e) {
                        return xi.at(st, e, 0, 0, n, false)[static_cast<size_t>(s) - 1];
                      },
                          h);
    cplx xis = (s == 0) ? cplx(1.0) : x0[static_cast<size_t>(s) - 1];
    cplx resid = dys - 2.0 * dxs1 - dx2s + df.u * xis;
    CHECK(std::abs(resid) < 1e-5);
  }
}

TEST_CASE("coefficients satisfy the third-flow recursion") {
  Setup& st = flex_setup();
  XiTable xi;
  auto df = st.ba.derived_fields(st.s);
  const double h = 1e-3;
  const int n = 5;
  auto x0 = xi.at(st, 0, 0, 0, n, false);
  auto comp = [&](int s, double e) {
    return xi.at(st, e, 0, 0, n, false)[static_cast<size_t>(s) - 1];
  };
  for (int s = 1; s <= 2; ++s) {
    cplx dts =
        fd1([&](double e) { return xi.at(st, 0, 0, e, n, false)[static_cast<size_t>(s) - 1]; },
            h);
    cplx dxs2 = fd1([&](double e) { return comp(s + 2, e); }, h);
    cplx dx2s1 = fd2([&](double e) { return comp(s + 1, e); }, h);
    // Third derivative: wider base step, the five-point stencil divides by
    // h^3 and would otherwise amplify the quadrature floor.
    cplx dx3s = fd3([&](double e) { return comp(s, e); }, 8e-3);
    cplx dxs = fd1([&](double e) { return comp(s, e); }, h);
    cplx resid = dts - 3.0 * dxs2 - 3.0 * dx2s1 - dx3s +
                 1.5 * df.u * x0[static_cast<size_t>(s)] + 1.5 * df.u * dxs +
                 df.w * x0[static_cast<size_t>(s) - 1];
    CHECK(std::abs(resid) < 1e-5);
  }
}

// ---------------------------------------------------------------------------
// One-puncture dual wave and residue pairings
// ---------------------------------------------------------------------------

TEST_CASE("dual coefficients cancel the primal ones at vanishing third time") {
  Setup& st = flex_setup();
  FlowState s0{st.s.Z, st.s.x, st.s.y, 0.0};
  auto wp = st.ba.wave_coefficients(s0, 1, false);
  auto wd = st.ba.wave_coefficients(s0, 1, true);
  CHECK(std::abs(wp.xi[0] + wd.xi[0]) < 1e-7);
}

TEST_CASE("dual coefficients satisfy the adjoint recursion") {
  Setup& st = flex_setup();
  FlowState s0{st.s.Z, st.s.x, st.s.y, 0.0};
  Setup view{st.sd, flex_divisor(), s0.x, s0.y, s0.t};
  auto df = view.ba.derived_fields(s0);
  XiTable xi;
  const double h = 1e-3;
  const int n = 5;
  auto x0 = xi.at(view, 0, 0, 0, n, true);
  for (int s = 0; s <= 3; ++s) {
    cplx dxs1 =
        fd1([&](double e) { return xi.at(view, e, 0, 0, n, true)[static_cast<size_t>(s)]; },
            h);
    cplx dys = (s == 0)
                   ? cplx(0.0)
                   : fd1([&](double e) {
                       return xi.at(view, 0, e, 0, n, true)[static_cast<size_t>(s) - 1];
                     },
                         h);
    cplx dx2s = (s == 0)
                    ? cplx(0.0)
                    : fd2([&](double e) {
                        return xi.at(view, e, 0, 0, n, true)[static_cast<size_t>(s) - 1];
                      },
                          h);
    cplx xis = (s == 0) ? cplx(1.0) : x0[static_cast<size_t>(s) - 1];
    cplx resid = -dys + 2.0 * dxs1 - dx2s + df.u * xis;
    CHECK(std::abs(resid) < 1e-5);
  }
}

TEST_CASE("dual wave solves the adjoint linear problem on a grid") {
  Setup& st = flex_setup();
  auto vals = st.sd.evaluate(probe_point());
  const double h = 1e-3;
  double worst = 0.0, scale = 0.0;
  for (int gx = -1; gx <= 1; ++gx) {
    for (int gy = -1; gy <= 1; ++gy) {
      FlowState sg{st.s.Z, st.s.x + 0.15 * gx, st.s.y + 0.12 * gy, 0.0};
      auto dg = st.ba.derived_fields(sg);
      auto psi = [&](double ox, double oy) {
        FlowState s2 = sg;
        s2.x += ox;
        s2.y += oy;
        return st.ba.evaluate(s2, vals, true).value;
      };
      cplx p0 = psi(0, 0);
      cplx dy = fd1([&](double e) { return psi(0, e); }, h);
      cplx dxx = fd2([&](double e) { return psi(e, 0); }, h);
      cplx resid = -dy - dxx + dg.u * p0;
      worst = std::max(worst, std::abs(resid));
      scale = std::max(scale, std::abs(dxx));
    }
  }
  CHECK(worst < 1e-5 * std::max(1.0, scale));
}

TEST_CASE("derivative pairings with the dual wave have no residue") {
  Setup& st = flex_setup();
  FlowState s0{st.s.Z, st.s.x, st.s.y, 0.0};
  for (auto [i, m] : std::vector<std::pair<int, int>>{
           {0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {0, 2}}) {
    double scale = 0.0;
    cplx res = st.ba.residue_pairing(s0, i, m, {}, &scale);
    CHECK(std::abs(res) < 1e-6 * std::max(1.0, scale));
  }
}

TEST_CASE("explicit pole divisor reproduces the implicit pairing form") {
  Setup& st = flex_setup();
  FlowState s0{st.s.Z, st.s.x, st.s.y, 0.0};
  cplx imp = st.ba.residue_pairing(s0, 1, 0);
  cplx exp = st.ba.residue_pairing(s0, 1, 0, flex_divisor());
  CHECK(std::abs(imp - exp) < 1e-9);
  RationalDifferential form = st.ba.pairing_differential(flex_divisor());
  const RationalDifferential& base = st.sd.omega(0).form;
  for (double xc : {1.3, -0.6}) {
    cplx x(xc, 0.45);
    cplx y = sextic_frame().curve().point(x, +1).y;
    CHECK(std::abs(form.eval(x, y) - base.eval(x, y)) <
          1e-8 * std::max(1.0, std::abs(base.eval(x, y))));
  }
}

TEST_CASE("generic pole divisors admit a pairing differential with its zeros there") {
  BakerAkhiezer ba(quintic_sd());
  const CurveFrame& frame = quintic_frame();
  std::vector<CurvePoint> D = {frame.curve().point(cplx(1.6, 0.0), +1),
                               frame.curve().point(cplx(0.3, -0.8), -1)};
  FlowState s{ba.divisor_vector(D), cplx(0.21, 0.0), cplx(0.1, 0.0), 0.0};
  RationalDifferential form = ba.pairing_differential(D);
  for (const CurvePoint& p : D) CHECK(std::abs(form.eval(p.x, p.y)) < 1e-8);
  for (auto [i, m] :
       std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {0, 1}}) {
    double scale = 0.0;
    cplx res = ba.residue_pairing(s, i, m, D, &scale);
    CHECK(std::abs(res) < 1e-6 * std::max(1.0, scale));
  }
  auto wc = ba.wave_coefficients(s, 2);
  CHECK(std::abs(wc.lead - 1.0) < 1e-9);
  CHECK(std::abs(wc.xi[0] - cplx(0.329559746830102, -0.155525298360420)) <
        1e-9);
}

// ---------------------------------------------------------------------------
// Two-puncture hierarchy: lattice fields and equations
// ---------------------------------------------------------------------------

TEST_CASE("two-puncture potentials match the difference of first coefficients") {
  Setup& td = toda_setup();
  XiTable xi;
  auto df = td.ba.derived_fields(td.s);
  auto c0 = xi.at(td, 0, 0, 0, 1, false);
  auto cT = xi.at(td, 1, 0, 0, 1, false);
  cplx u_xi = c0[0] - cT[0];
  CHECK(std::abs(u_xi - df.u) < 1e-6);
  // The sign of the expansion constant in u matters: the opposite choice is
  // off by twice the constant.
  CHECK(std::abs(u_xi - (df.u - 2.0 * df.b1)) > 0.1);
  CHECK(std::abs(df.u - cplx(-0.505319533167559, 0.0)) < 1e-9);
  CHECK(std::abs(df.w - cplx(1.240142827130083, 0.0)) < 1e-9);
  CHECK(std::abs(df.f - cplx(-0.723323031480780, 0.0)) < 1e-9);
  CHECK(std::abs(df.b1 + td.sd.omega(0).a[0][0]) < 1e-12);
  CHECK(std::abs(df.b2 - std::exp(td.sd.omega(0).a0[1])) < 1e-12);
}

TEST_CASE("first-chart coefficients satisfy the shifted recursion") {
  Setup& td = toda_setup();
  XiTable xi;
  auto df = td.ba.derived_fields(td.s);
  const double h = 1e-3;
  const int n = 3;
  auto c0 = xi.at(td, 0, 0, 0, n, false);
  auto cT = xi.at(td, 1, 0, 0, n, false);
  for (int s = 0; s <= 2; ++s) {
    cplx dys = (s == 0)
                   ? cplx(0.0)
                   : fd1([&](double e) {
                       return xi.at(td, 0, e, 0, n, false)[static_cast<size_t>(s) - 1];
                     },
                         h);
    cplx shift = cT[static_cast<size_t>(s)] - c0[static_cast<size_t>(s)];
    cplx xis = (s == 0) ? cplx(1.0) : c0[static_cast<size_t>(s) - 1];
    CHECK(std::abs(dys - shift - df.u * xis) < 1e-5);
  }
}

TEST_CASE("second-chart coefficients recover the lattice field") {
  Setup& td = toda_setup();
  XiTable xi;
  const double h = 1e-3;
  FlowState qT = td.s;
  qT.x += 1.0;
  auto dfT = td.ba.derived_fields(qT);
  cplx dy1 =
      fd1([&](double e) { return xi.at(td, 0, e, 0, 2, false, 1)[0]; }, h);
  CHECK(std::abs(dy1 - dfT.w) < 1e-6);
  auto eT = xi.at(td, 1, 0, 0, 2, false, 1);
  cplx dy2 =
      fd1([&](double e) { return xi.at(td, 0, e, 0, 2, false, 1)[1]; }, h);
  CHECK(std::abs(dy2 - dfT.w * eT[0]) < 1e-5);
}

TEST_CASE("second-chart expansion is anchored by the pair connection integral") {
  Setup& td = toda_setup();
  auto df = td.ba.derived_fields(td.s);
  cplx t11 = td.s.y + td.s.t;
  cplx t21 = -td.s.t;
  cplx f_theta = df.f - td.s.x * td.sd.omega(0).a0[1] -
                 t11 * td.sd.omega(1).a0[1] - t21 * td.sd.omega(2).a0[1];
  auto wc1 = td.ba.wave_coefficients(td.s, 0, false, 1);
  CHECK(std::abs(wc1.lead - std::exp(f_theta)) <
        1e-6 * std::abs(wc1.lead));
  auto wd1 = td.ba.wave_coefficients(td.s, 0, true, 1);
  // Dual connection integral is the negative of the primal one.
  CHECK(std::abs(wc1.lead * wd1.lead - 1.0) < 1e-6);
}

TEST_CASE("wave solves the lattice linear problem") {
  Setup& td = toda_setup();
  auto vals = td.sd.evaluate(probe_point());
  const double h = 1e-3;
  auto psi = [&](cplx dx, cplx dy, cplx dt, bool dual) {
    FlowState s2 = td.s;
    s2.x += dx;
    s2.y += dy;
    s2.t += dt;
    return td.ba.evaluate(s2, vals, dual).value;
  };
  double worst = 0.0, scale = 0.0;
  for (int gx = -1; gx <= 1; ++gx) {
    for (int gy = -1; gy <= 1; ++gy) {
      FlowState sg{td.s.Z, td.s.x + 0.2 * gx, td.s.y + 0.15 * gy, td.s.t};
      auto dg = td.ba.derived_fields(sg);
      auto at = [&](double e) {
        FlowState s2 = sg;
        s2.y += e;
        return td.ba.evaluate(s2, vals).value;
      };
      FlowState sT = sg;
      sT.x += 1.0;
      cplx resid = fd1(at, h) - td.ba.evaluate(sT, vals).value -
                   dg.u * td.ba.evaluate(sg, vals).value;
      worst = std::max(worst, std::abs(resid));
      scale = std::max(scale, std::abs(td.ba.evaluate(sT, vals).value));
    }
  }
  CHECK(worst < 1e-5 * std::max(1.0, scale));

  auto dg = td.ba.derived_fields(td.s);
  cplx p0 = psi(0, 0, 0, false);
  cplx pT = psi(1, 0, 0, false);
  cplx pM = psi(-1, 0, 0, false);
  cplx dt = fd1([&](double e) { return psi(0, 0, e, false); }, h);
  // Second flow: the down-shift term enters with a minus sign.
  CHECK(std::abs(dt - pT - dg.u * p0 + dg.w * pM) <
        1e-5 * std::max(1.0, std::abs(pT)));
  CHECK(std::abs(dt - pT - dg.u * p0 - dg.w * pM) > 1e-2);

  cplx q0 = psi(0, 0, 0, true);
  cplx qM = psi(-1, 0, 0, true);
  cplx qdy = fd1([&](double e) { return psi(0, e, 0, true); }, h);
  CHECK(std::abs(qdy + qM + dg.u * q0) < 1e-5 * std::max(1.0, std::abs(qM)));
}

TEST_CASE("dual coefficients satisfy the adjoint shifted recursion") {
  Setup& td = toda_setup();
  XiTable xi;
  auto df = td.ba.derived_fields(td.s);
  const double h = 1e-3;
  const int n = 3;
  auto d0 = xi.at(td, 0, 0, 0, n, true);
  auto dm = xi.at(td, -1, 0, 0, n, true);
  for (int s = 0; s <= 2; ++s) {
    cplx dys = (s == 0)
                   ? cplx(0.0)
                   : fd1([&](double e) {
                       return xi.at(td, 0, e, 0, n, true)[static_cast<size_t>(s) - 1];
                     },
                         h);
    cplx shift = dm[static_cast<size_t>(s)] - d0[static_cast<size_t>(s)];
    cplx xis = (s == 0) ? cplx(1.0) : d0[static_cast<size_t>(s) - 1];
    CHECK(std::abs(-dys - shift - df.u * xis) < 1e-5);
  }
  cplx u_dual = d0[0] - dm[0];
  CHECK(std::abs(u_dual - df.u) < 1e-6);
}

TEST_CASE("primal and dual first coefficients differ by the expansion constant") {
  Setup& td = toda_setup();
  XiTable xi;
  auto cT = xi.at(td, 1, 0, 0, 1, false);
  auto d0 = xi.at(td, 0, 0, 0, 1, true);
  cplx a11 = td.sd.omega(0).a[0][0];
  CHECK(std::abs(cT[0] + d0[0] - a11) < 1e-6);
}

TEST_CASE("pairing of the dual wave with shifted waves is minus a delta") {
  Setup& td = toda_setup();
  double scale = 0.0;
  cplx r0 = td.ba.residue_pairing(td.s, 0, 0, {}, &scale);
  CHECK(std::abs(r0 + 1.0) < 1e-6);
  for (int i : {1, 2}) {
    cplx ri = td.ba.residue_pairing(td.s, i, 0, {}, &scale);
    CHECK(std::abs(ri) < 1e-6 * std::max(1.0, scale));
  }
}

TEST_CASE("integer lattice positions close the puncture loop") {
  Setup& td = toda_setup();
  auto circle = td.sd.circle_values(0, td.sd.chart(0).radius(), 64);
  FlowState qi = td.s;
  qi.x = 2.0;
  auto a = td.ba.evaluate(qi, circle.front());
  auto b = td.ba.evaluate(qi, circle.back());
  CHECK(std::abs(a.value - b.value) < 1e-7 * std::max(1.0, std::abs(a.value)));
  qi.x = 0.5;
  auto c = td.ba.evaluate(qi, circle.front());
  auto d = td.ba.evaluate(qi, circle.back());
  CHECK(std::abs(d.value / c.value + 1.0) < 1e-7);
}

// ---------------------------------------------------------------------------
// Input validation
// ---------------------------------------------------------------------------

TEST_CASE("invalid requests are rejected") {
  Setup& st = flex_setup();
  Setup& td = toda_setup();
  CHECK_THROWS_AS(st.ba.wave_coefficients(st.s, 7), InputError);
  CHECK_THROWS_AS(st.ba.wave_coefficients(st.s, 2, false, 1), InputError);
  CHECK_THROWS_AS(
      st.ba.wave_coefficients(st.s, 2, false, 0,
                              10.0 * st.sd.chart(0).scale()),
      InputError);
  CHECK_THROWS_AS(st.ba.wave_coefficients(st.s, 2, false, 0, -0.1),
                  InputError);
  CHECK_THROWS_AS(st.ba.residue_pairing(st.s, 0, 0), InputError);  // t != 0
  FlowState s0{st.s.Z, st.s.x, st.s.y, 0.0};
  CHECK_THROWS_AS(st.ba.residue_pairing(s0, 3, 0), InputError);
  CHECK_THROWS_AS(st.ba.residue_pairing(s0, -1, 0), InputError);
  CHECK_THROWS_AS(td.ba.residue_pairing(td.s, 0, 1), InputError);
  FlowState bad = st.s;
  bad.Z = CVec::Zero(3);
  CHECK_THROWS_AS(st.ba.evaluate(bad, probe_point()), InputError);
}
