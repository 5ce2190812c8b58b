#include "finitegap/ba.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>

namespace finitegap {

namespace {

constexpr double kNearDivisorMantissa = 1e-10;
constexpr int kNodesMin = 64;
constexpr int kNodesMax = 1024;
constexpr double kNodeTarget = 1e-9;

// Central differences with one Richardson step (h, then h/2).
template <class F>
cplx diff1(const F& f, double h) {
  const cplx d_h = (f(h) - f(-h)) / (2.0 * h);
  const cplx d_h2 = (f(h / 2.0) - f(-h / 2.0)) / h;
  return (4.0 * d_h2 - d_h) / 3.0;
}

template <class F>
cplx diff2(const F& f, const cplx& f0, double h) {
  const cplx d_h = (f(h) - 2.0 * f0 + f(-h)) / (h * h);
  const cplx d_h2 = (f(h / 2.0) - 2.0 * f0 + f(-h / 2.0)) / (h * h / 4.0);
  return (4.0 * d_h2 - d_h) / 3.0;
}

}  // namespace

BakerAkhiezer::BakerAkhiezer(const SpectralData& sd, double tail_tol)
    : sd_(&sd), theta_(sd.frame().period_matrix(), tail_tol) {}

CVec BakerAkhiezer::divisor_vector(
    const std::vector<CurvePoint>& divisor) const {
  if (static_cast<int>(divisor.size()) != sd_->genus())
    throw InputError("pole divisor degree must equal the genus");
  CVec z = -sd_->riemann_constants();
  for (const auto& q : divisor) z -= sd_->abel(q);
  return z;
}

BakerAkhiezer::ArgFrame BakerAkhiezer::arg_frame(const FlowState& s,
                                                 bool dual) const {
  const int g = sd_->genus();
  if (s.Z.size() != g) throw InputError("flow-state shift has wrong dimension");
  ArgFrame af;
  const int nf = sd_->n_forms();
  af.c.assign(static_cast<size_t>(nf), cplx(0.0));

  std::vector<cplx> times;
  CVec S = CVec::Zero(g);
  if (sd_->scenario() == SpectralData::Scenario::one_point) {
    // The dual carries only the first two times.
    times = {s.x, s.y, dual ? cplx(0.0) : s.t};
  } else {
    times = {s.x, s.y + s.t, -s.t};
  }
  for (int f = 0; f < nf; ++f) {
    S += times[static_cast<size_t>(f)] * sd_->omega(f).U;
    af.c[static_cast<size_t>(f)] =
        dual ? -times[static_cast<size_t>(f)] : times[static_cast<size_t>(f)];
  }

  if (!dual) {
    af.v1 = S + s.Z;
    af.vA = s.Z;
    af.z0 = S + s.Z;
    af.pref = s.Z;
    return af;
  }
  if (sd_->scenario() == SpectralData::Scenario::two_point)
    S += sd_->omega(0).U;  // the dual theta shift advances x by one
  af.v1 = -(S + s.Z);
  af.z0 = S + s.Z;
  if (sd_->scenario() == SpectralData::Scenario::one_point) {
    af.vA = -s.Z;
    af.pref = s.Z;
  } else {
    const CVec zu = s.Z + sd_->omega(0).U;
    af.vA = -zu;
    af.pref = zu;
  }
  return af;
}

CVec BakerAkhiezer::flow_vector(const FlowState& s, bool dual) const {
  const ArgFrame af = arg_frame(s, dual);
  return af.z0 - s.Z;
}

std::vector<cplx> BakerAkhiezer::flow_times(const FlowState& s,
                                            bool dual) const {
  return arg_frame(s, dual).c;
}

BakerAkhiezer::LogTheta BakerAkhiezer::log_theta(const CVec& z) const {
  const ThetaBatch b =
      theta_.batch(z, RVec::Zero(theta_.genus()), {DerivRequest{}});
  return {std::log(b.reduced[0]) + b.log_prefactor, std::abs(b.reduced[0])};
}

BAEvaluation BakerAkhiezer::evaluate(const FlowState& s,
                                     const SpectralData::Values& vals,
                                     bool dual) const {
  const ArgFrame af = arg_frame(s, dual);
  const LogTheta l1 = log_theta(CVec(vals.A + af.v1));
  const LogTheta lA = log_theta(CVec(vals.A + af.vA));
  const LogTheta l0 = log_theta(af.z0);
  const LogTheta lP = log_theta(af.pref);
  cplx E(0.0);
  for (int f = 0; f < sd_->n_forms(); ++f)
    E += af.c[static_cast<size_t>(f)] * vals.Omega(f);
  BAEvaluation out;
  out.exponent = E;
  out.near_divisor = l0.mantissa_abs < kNearDivisorMantissa ||
                     lA.mantissa_abs < kNearDivisorMantissa;
  out.value = std::exp(l1.log + lP.log - l0.log - lA.log + E);
  return out;
}

BAEvaluation BakerAkhiezer::evaluate(const FlowState& s, const CurvePoint& p,
                                     bool dual) const {
  return evaluate(s, sd_->evaluate(p), dual);
}

const std::vector<SpectralData::Values>& BakerAkhiezer::circle(int chart,
                                                               double r,
                                                               int M) const {
  const auto key = std::make_tuple(chart, r, M);
  auto it = circle_cache_.find(key);
  if (it == circle_cache_.end())
    it = circle_cache_.emplace(key, sd_->circle_values(chart, r, M)).first;
  return it->second;
}

std::vector<cplx> BakerAkhiezer::raw_coefficients(const ArgFrame& af,
                                                  int chart, double r, int N,
                                                  int M) const {
  const auto& vals = circle(chart, r, M);
  const LogTheta l0 = log_theta(af.z0);
  const LogTheta lP = log_theta(af.pref);
  const int nf = sd_->n_forms();

  std::vector<std::vector<cplx>> terms(
      static_cast<size_t>(N + 1), std::vector<cplx>(static_cast<size_t>(M)));
  for (int j = 0; j < M; ++j) {
    const auto& v = vals[static_cast<size_t>(j)];
    const double angle = 2.0 * kPi * j / M;
    const cplx w = std::polar(r, angle);
    const LogTheta l1 = log_theta(CVec(v.A + af.v1));
    const LogTheta lA = log_theta(CVec(v.A + af.vA));
    // Exponent with the local principal parts and chart constants removed;
    // the logarithm of the third-kind part is continued along the circle so
    // that the subtraction stays single-valued.
    cplx ehat(0.0);
    for (int f = 0; f < nf; ++f) {
      const Meromorphic& mf = sd_->omega(f);
      cplx om = v.Omega(f) - mf.a0[static_cast<size_t>(chart)];
      if (mf.kind == Meromorphic::Kind::third_kind) {
        const cplx logw(std::log(r), angle);
        om -= (chart == 0) ? -logw : logw;
      } else if (mf.chart == chart) {
        om -= std::pow(w, -mf.order);
      }
      ehat += af.c[static_cast<size_t>(f)] * om;
    }
    const cplx phi = std::exp(l1.log + lP.log - l0.log - lA.log + ehat);
    for (int sidx = 0; sidx <= N; ++sidx)
      terms[static_cast<size_t>(sidx)][static_cast<size_t>(j)] =
          phi * std::polar(1.0, -angle * sidx);
  }
  std::vector<cplx> out(static_cast<size_t>(N + 1));
  for (int sidx = 0; sidx <= N; ++sidx)
    out[static_cast<size_t>(sidx)] =
        pairwise_sum(terms[static_cast<size_t>(sidx)]) /
        (static_cast<double>(M) * std::pow(r, sidx));
  return out;
}

WaveCoefficients BakerAkhiezer::wave_coefficients(const FlowState& s, int N,
                                                  bool dual, int chart) const {
  if (chart < 0 || chart >= sd_->n_charts())
    throw InputError("no such puncture chart");
  return wave_coefficients(s, N, dual, chart, sd_->chart(chart).radius());
}

WaveCoefficients BakerAkhiezer::wave_coefficients(const FlowState& s, int N,
                                                  bool dual, int chart,
                                                  double radius) const {
  if (N < 0 || N > SpectralData::kSMax)
    throw InputError("wave coefficient count out of range");
  if (chart < 0 || chart >= sd_->n_charts())
    throw InputError("no such puncture chart");
  if (!(radius > 0.0) || radius > sd_->chart(chart).scale())
    throw InputError("extraction radius outside the chart");
  const ArgFrame af = arg_frame(s, dual);
  std::vector<cplx> prev;
  for (int M = kNodesMin; M <= kNodesMax; M *= 2) {
    std::vector<cplx> cur = raw_coefficients(af, chart, radius, N, M);
    if (!prev.empty()) {
      double err = 0.0;
      for (size_t k = 0; k < cur.size(); ++k)
        err = std::max(err, std::abs(cur[k] - prev[k]) /
                                std::max(1.0, std::abs(cur[k])));
      if (err < kNodeTarget) {
        WaveCoefficients out;
        out.lead = cur[0];
        out.radius = radius;
        out.nodes = M;
        out.xi.assign(cur.begin() + 1, cur.end());
        for (auto& v : out.xi) v /= cur[0];
        return out;
      }
    }
    prev = std::move(cur);
  }
  throw PrecisionError(
      "wave coefficients did not stabilize under node doubling");
}

DerivedFields BakerAkhiezer::derived_fields(const FlowState& s) const {
  DerivedFields out;
  const CVec z0 = flow_vector(s, false) + s.Z;

  if (sd_->scenario() == SpectralData::Scenario::one_point) {
    const CVec& U = sd_->omega(0).U;
    const CVec& V = sd_->omega(1).U;
    out.b1 = 2.0 * sd_->omega(0).a[0][0];
    out.u = -2.0 * theta_.dlog2(z0, U, U) + out.b1;

    // w from the second-flow tower at level zero:
    //   w = 3 d_x xi_2 + 3 d_x^2 xi_1 - (3/2) u xi_1.
    const WaveCoefficients base = wave_coefficients(s, 2, false, 0);
    auto xi = [&](double off) {
      FlowState sx = s;
      sx.x = s.x + off;
      return wave_coefficients(sx, 2, false, 0).xi;
    };
    const double h = 1e-3;
    const std::vector<cplx> xp = xi(h), xm = xi(-h), xq = xi(h / 2.0),
                            xr = xi(-h / 2.0);
    auto rich1 = [&](size_t k) {
      const cplx d_h = (xp[k] - xm[k]) / (2.0 * h);
      const cplx d_h2 = (xq[k] - xr[k]) / h;
      return (4.0 * d_h2 - d_h) / 3.0;
    };
    auto rich2 = [&](size_t k) {
      const cplx d_h = (xp[k] - 2.0 * base.xi[k] + xm[k]) / (h * h);
      const cplx d_h2 =
          (xq[k] - 2.0 * base.xi[k] + xr[k]) / (h * h / 4.0);
      return (4.0 * d_h2 - d_h) / 3.0;
    };
    const cplx dxi2 = rich1(1);
    const cplx ddxi1 = rich2(0);
    out.w = 3.0 * dxi2 + 3.0 * ddxi1 - 1.5 * out.u * base.xi[0];
    const cplx ux = -2.0 * theta_.dlog3(z0, U, U, U);
    out.b3 = out.w - 0.75 * ux + 1.5 * theta_.dlog2(z0, U, V);
    return out;
  }

  const CVec& U0 = sd_->omega(0).U;
  const CVec& U11 = sd_->omega(1).U;
  // The first expansion constant of the third-kind integral enters with a
  // reversed sign: the Abel map expands along -U per unit of 1/k, so the
  // shift-difference of d_y log theta carries -a_1 with it.
  out.b1 = -sd_->omega(0).a[0][0];
  out.u = out.b1 + theta_.dlog(CVec(z0 + U0), U11) - theta_.dlog(z0, U11);
  out.b2 = std::exp(sd_->omega(0).a0[1]);

  const LogTheta lp = log_theta(CVec(z0 + U0));
  const LogTheta lm = log_theta(CVec(z0 - U0));
  const LogTheta lz = log_theta(z0);
  out.w = out.b2 * std::exp(lp.log + lm.log - 2.0 * lz.log);

  // Lattice field, normalized so that f vanishes at zero times: the theta
  // ratio at the state is measured against its value at Z itself.
  const LogTheta lZ = log_theta(s.Z);
  const LogTheta lZU = log_theta(CVec(s.Z + U0));
  const cplx t11 = s.y + s.t;
  const cplx t21 = -s.t;
  out.f = (lp.log - lz.log) + (lZ.log - lZU.log) +
          s.x * sd_->omega(0).a0[1] + t11 * sd_->omega(1).a0[1] +
          t21 * sd_->omega(2).a0[1];
  return out;
}

cplx BakerAkhiezer::x_derivative(const FlowState& s,
                                 const SpectralData::Values& vals, int order,
                                 bool dual) const {
  auto val = [&](double off) {
    FlowState s2 = s;
    s2.x = s.x + off;
    return evaluate(s2, vals, dual).value;
  };
  switch (order) {
    case 0:
      return val(0.0);
    case 1:
      return diff1(val, 1e-4);
    case 2:
      return diff2(val, val(0.0), 1e-3);
    default:
      throw InputError("pairing derivatives are supported up to order two");
  }
}

RationalDifferential BakerAkhiezer::pairing_differential(
    const std::vector<CurvePoint>& divisor) const {
  const int g = sd_->genus();
  if (static_cast<int>(divisor.size()) != g)
    throw InputError("pairing divisor degree must equal the genus");
  const CurveFrame& frame = sd_->frame();
  const RationalDifferential& base = sd_->omega(0).form;

  CMat H(g, g);
  CVec rhs(g);
  for (int i = 0; i < g; ++i) {
    const CurvePoint& q = divisor[static_cast<size_t>(i)];
    H.row(i) = frame.omega_values(q.x, q.y).transpose();
    rhs(i) = -base.eval(q.x, q.y);
  }
  const Eigen::FullPivLU<CMat> lu(H);
  if (!lu.isInvertible())
    throw InputError("pairing divisor is special: holomorphic fit singular");
  const CVec c = lu.solve(rhs);

  RationalDifferential out = base;
  const CMat& C = frame.normalization();
  for (int l = 0; l < g; ++l) {
    RationalDifferential basis_l;
    for (int j = 0; j < g; ++j) {
      DiffTerm t;
      t.c = C(l, j);
      t.power = j;
      t.over_y = true;
      basis_l.add(t);
    }
    out.accumulate(basis_l, c(l));
  }
  return out;
}

cplx BakerAkhiezer::residue_pairing(const FlowState& s, int i, int m,
                                    const std::vector<CurvePoint>& divisor,
                                    double* scale) const {
  if (i < 0 || m < 0) throw InputError("pairing orders must be nonnegative");
  const bool two = sd_->scenario() == SpectralData::Scenario::two_point;
  if (two && m != 0)
    throw InputError("the two-point pairing takes a shift index only");
  if (!two && std::abs(s.t) > 1e-14)
    throw InputError("the one-point pairing requires the third time to vanish");

  RationalDifferential constructed;
  const RationalDifferential* form = &sd_->omega(0).form;
  if (!divisor.empty()) {
    constructed = pairing_differential(divisor);
    form = &constructed;
  }
  const PunctureChart& ch = sd_->chart(0);
  const double r = ch.radius();

  cplx prev(0.0);
  double top = 0.0;
  for (int M = kNodesMin; M <= kNodesMax; M *= 2) {
    const auto& vals = circle(0, r, M);
    std::vector<cplx> terms(static_cast<size_t>(M));
    top = 0.0;
    for (int j = 0; j < M; ++j) {
      const auto& v = vals[static_cast<size_t>(j)];
      const cplx w = std::polar(r, 2.0 * kPi * j / M);
      cplx F;
      if (two) {
        FlowState sp = s;
        sp.x = s.x + static_cast<double>(i);
        F = evaluate(s, v, true).value * evaluate(sp, v, false).value;
      } else {
        F = x_derivative(s, v, i, true) * x_derivative(s, v, m, false);
      }
      const cplx dodw = form->eval(v.p.x, v.p.y) * ch.dx_dw(w);
      terms[static_cast<size_t>(j)] = F * dodw * w;
      top = std::max(top, std::abs(terms[static_cast<size_t>(j)]));
    }
    const cplx res = pairwise_sum(terms) / static_cast<double>(M);
    if (M > kNodesMin &&
        std::abs(res - prev) < kNodeTarget * std::max(1.0, top)) {
      if (scale != nullptr) *scale = top;
      return res;
    }
    prev = res;
  }
  throw PrecisionError("residue pairing did not stabilize under node doubling");
}

}  // namespace finitegap
