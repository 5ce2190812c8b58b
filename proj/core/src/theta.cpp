#include "finitegap/theta.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace finitegap {

namespace {

// Largest exponent we allow exp() to see before declaring overflow.
constexpr double kMaxExp = 690.0;

cplx exp_checked(cplx w) {
  if (w.real() > kMaxExp)
    throw PrecisionError("theta evaluation overflows double range");
  return std::exp(w);
}

}  // namespace

cplx ThetaBatch::value(size_t i) const {
  return reduced.at(i) * exp_checked(log_prefactor);
}

ThetaEngine::ThetaEngine(CMat B, double tail_tol)
    : g_(static_cast<int>(B.rows())), B_(std::move(B)), tail_tol_(tail_tol) {
  if (B_.rows() != B_.cols() || g_ < 1)
    throw InputError("period matrix must be square and nonempty");
  const double scale = std::max(1.0, B_.cwiseAbs().maxCoeff());
  if ((B_ - B_.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw InputError("period matrix is not symmetric");
  X_ = B_.real();
  Y_ = B_.imag();
  Eigen::LLT<RMat> llt(Y_);
  if (llt.info() != Eigen::Success)
    throw InputError("imaginary part of period matrix is not positive definite");
  T_ = std::sqrt(kPi) * RMat(llt.matrixL()).transpose();  // upper triangular
  Yinv_ = llt.solve(RMat::Identity(g_, g_));

  // Shortest vector of T Z^g by direct search over a small box.  The period
  // matrices produced by the curve pipeline are mildly skewed, so the
  // minimizer lies well inside |m_i| <= 4; for badly reduced lattices a
  // proper reduction step would be needed first.
  rho_ = std::numeric_limits<double>::infinity();
  std::vector<int> m(g_, -4);
  while (true) {
    bool zero = std::all_of(m.begin(), m.end(), [](int v) { return v == 0; });
    if (!zero) {
      RVec mv(g_);
      for (int i = 0; i < g_; ++i) mv[i] = m[i];
      rho_ = std::min(rho_, (T_ * mv).norm());
    }
    int i = 0;
    while (i < g_ && ++m[i] > 4) m[i++] = -4;
    if (i == g_) break;
  }
  alpha_ = 1.0 / T_.jacobiSvd().singularValues().minCoeff();
}

double ThetaEngine::tail_bound(double R, double poly_K, int poly_r,
                               double beta) const {
  // Terms with |T(m+eps+c)| in the shell [R+k, R+k+1) are bounded by
  // exp(-(R+k)^2) times the derivative polynomial; the number of lattice
  // points within radius t is at most (2t/rho + 1)^g by sphere packing, and
  // |m+eps+c| <= alpha * |T(m+eps+c)| + beta bounds the polynomial factor.
  double total = 0.0;
  for (int k = 0; k < 64; ++k) {
    const double t = R + k;
    const double count = std::pow(2.0 * (t + 1.0) / rho_ + 1.0, g_);
    const double poly = poly_K * std::pow(alpha_ * (t + 1.0) + beta, poly_r);
    const double term = count * poly * std::exp(-t * t);
    total += term;
    if (term < 1e-300) break;
  }
  return total;
}

ThetaBatch ThetaEngine::batch(const CVec& z, const RVec& eps,
                              const std::vector<DerivRequest>& requests) const {
  if (z.size() != g_) throw InputError("theta argument has wrong dimension");
  RVec e = eps.size() ? eps : RVec::Zero(g_);
  if (e.size() != g_) throw InputError("theta characteristic has wrong dimension");

  // Reduce the argument modulo the period lattice: z = zr + B m2 + p with
  // zr small.  theta[eps,0](z) = F * theta[eps,0](zr) with
  // F = exp(2 pi i (p,eps) - pi i (B m2, m2) - 2 pi i (zr, m2)), and each
  // derivative direction d picks up (d/d. - 2 pi i (m2, d)) in front of the
  // reduced theta, expanded below over subsets of the direction list.
  RVec b0 = z.imag();
  RVec m2r = Yinv_ * b0;
  Eigen::VectorXi m2(g_);
  for (int i = 0; i < g_; ++i) m2[i] = static_cast<int>(std::lround(m2r[i]));
  RVec m2d = m2.cast<double>();
  CVec zr = z - B_ * m2d.cast<cplx>();
  Eigen::VectorXi p(g_);
  for (int i = 0; i < g_; ++i) p[i] = static_cast<int>(std::lround(zr[i].real()));
  RVec pd = p.cast<double>();
  zr -= pd.cast<cplx>();

  const RVec a = zr.real();
  const RVec b = zr.imag();
  const RVec c = Yinv_ * b;

  cplx log_pref = kPi * b.dot(c);
  log_pref += 2.0 * kPi * kI * pd.dot(e);
  log_pref -= kPi * kI * m2d.dot(X_ * m2d);
  log_pref += kPi * m2d.dot(Y_ * m2d);  // -pi i times the imaginary part
  cplx zr_m2 = 0.0;
  for (int i = 0; i < g_; ++i) zr_m2 += zr[i] * m2d[i];
  log_pref -= 2.0 * kPi * kI * zr_m2;

  // Collect the distinct direction subsets needed for the reduction formula.
  struct SubReq {
    std::vector<CVec> dirs;
  };
  std::vector<SubReq> subs;
  const bool shifted = m2.cwiseAbs().maxCoeff() != 0;
  auto find_sub = [&](const std::vector<CVec>& dirs) -> size_t {
    for (size_t i = 0; i < subs.size(); ++i) {
      if (subs[i].dirs.size() != dirs.size()) continue;
      bool same = true;
      for (size_t j = 0; j < dirs.size(); ++j)
        if (subs[i].dirs[j] != dirs[j]) { same = false; break; }
      if (same) return i;
    }
    subs.push_back({dirs});
    return subs.size() - 1;
  };
  // For each request, list of (subset index, constant factor).
  std::vector<std::vector<std::pair<size_t, cplx>>> recomb(requests.size());
  for (size_t r = 0; r < requests.size(); ++r) {
    const auto& dirs = requests[r].dirs;
    if (dirs.size() > 4)
      throw InputError("theta derivatives above order 4 are not supported");
    for (const auto& d : dirs)
      if (d.size() != g_) throw InputError("derivative direction has wrong dimension");
    const size_t nd = dirs.size();
    const unsigned full = (1u << nd) - 1u;
    for (unsigned mask = shifted ? 0u : full; mask <= full; ++mask) {
      std::vector<CVec> sub;
      cplx factor = 1.0;
      for (size_t j = 0; j < nd; ++j) {
        if (mask & (1u << j)) {
          sub.push_back(dirs[j]);
        } else {
          cplx md = 0.0;
          for (int i = 0; i < g_; ++i) md += m2d[i] * dirs[j][i];
          factor *= -2.0 * kPi * kI * md;
        }
      }
      if (std::abs(factor) == 0.0) continue;
      recomb[r].emplace_back(find_sub(sub), factor);
    }
  }

  // Choose the truncation radius from the worst-case derivative polynomial.
  double poly_K = 1.0;
  int poly_r = 0;
  for (const auto& s : subs) {
    double K = 1.0;
    for (const auto& d : s.dirs) K *= 2.0 * kPi * d.norm();
    if (static_cast<int>(s.dirs.size()) > poly_r ||
        (static_cast<int>(s.dirs.size()) == poly_r && K > poly_K)) {
      poly_r = static_cast<int>(s.dirs.size());
      poly_K = std::max(poly_K, K);
    }
  }
  const double beta = (e + c).norm();
  double R = 1.5;
  while (tail_bound(R, poly_K, poly_r, beta) > tail_tol_) {
    R += 0.5;
    if (R > 40.0)
      throw PrecisionError("theta tail bound does not reach tolerance");
  }

  // Recursive ellipsoid enumeration |T(m + e + c)| <= R over integer m,
  // coordinates from last to first (T is upper triangular).
  ThetaBatch out;
  out.truncation_radius = R;
  out.tail_bound = tail_bound(R, poly_K, poly_r, beta);
  std::vector<std::vector<cplx>> terms(subs.size());
  RVec u(g_);           // current m + e
  RVec w(g_);           // partial rows of T(u + c)
  std::vector<double> row_tail(g_ + 1, 0.0);  // sum of squares of rows > i

  // w_i depends on coordinates j > i: maintained on the way down.
  std::function<void(int)> descend = [&](int i) {
    if (i < 0) {
      const double q = row_tail[0];
      double phase = 0.0;
      for (int j = 0; j < g_; ++j) {
        phase += 2.0 * kPi * a[j] * u[j];
        double xu = 0.0;
        for (int k = 0; k < g_; ++k) xu += X_(j, k) * u[k];
        phase += kPi * xu * u[j];
      }
      const cplx base = std::polar(std::exp(-q), phase);
      for (size_t s = 0; s < subs.size(); ++s) {
        cplx t = base;
        for (const auto& d : subs[s].dirs) {
          cplx ud = 0.0;
          for (int j = 0; j < g_; ++j) ud += u[j] * d[j];
          t *= 2.0 * kPi * kI * ud;
        }
        terms[s].push_back(t);
      }
      ++out.n_terms;
      return;
    }
    double wi = 0.0;
    for (int j = i + 1; j < g_; ++j) wi += T_(i, j) * (u[j] + c[j]);
    const double budget = R * R - row_tail[i + 1];
    if (budget < 0.0) return;
    const double rad = std::sqrt(budget) / T_(i, i);
    const double center = -e[i] - c[i] - wi / T_(i, i);
    const long lo = static_cast<long>(std::ceil(center - rad - 1e-12));
    const long hi = static_cast<long>(std::floor(center + rad + 1e-12));
    for (long mi = lo; mi <= hi; ++mi) {
      u[i] = static_cast<double>(mi) + e[i];
      const double row = T_(i, i) * (u[i] + c[i]) + wi;
      row_tail[i] = row_tail[i + 1] + row * row;
      if (row_tail[i] > R * R + 1e-9) continue;
      descend(i - 1);
    }
  };
  descend(g_ - 1);

  std::vector<cplx> sub_values(subs.size());
  for (size_t s = 0; s < subs.size(); ++s) sub_values[s] = pairwise_sum(terms[s]);

  out.log_prefactor = log_pref;
  out.reduced.resize(requests.size());
  for (size_t r = 0; r < requests.size(); ++r) {
    cplx v = 0.0;
    for (const auto& [si, factor] : recomb[r]) v += factor * sub_values[si];
    out.reduced[r] = v;
  }
  return out;
}

cplx ThetaEngine::value(const CVec& z) const { return value(z, RVec()); }

cplx ThetaEngine::value(const CVec& z, const RVec& eps) const {
  return batch(z, eps, {DerivRequest{}}).value(0);
}

cplx ThetaEngine::deriv(const CVec& z, const std::vector<CVec>& dirs) const {
  return deriv(z, RVec(), dirs);
}

cplx ThetaEngine::deriv(const CVec& z, const RVec& eps,
                        const std::vector<CVec>& dirs) const {
  return batch(z, eps, {DerivRequest{dirs}}).value(0);
}

cplx ThetaEngine::dlog(const CVec& z, const CVec& a) const {
  auto b = batch(z, RVec(), {DerivRequest{}, DerivRequest{{a}}});
  return b.reduced[1] / b.reduced[0];
}

cplx ThetaEngine::dlog2(const CVec& z, const CVec& a, const CVec& b) const {
  auto r = batch(z, RVec(),
                 {DerivRequest{}, DerivRequest{{a}}, DerivRequest{{b}},
                  DerivRequest{{a, b}}});
  const cplx t0 = r.reduced[0];
  return r.reduced[3] / t0 - (r.reduced[1] / t0) * (r.reduced[2] / t0);
}

cplx ThetaEngine::dlog3(const CVec& z, const CVec& a, const CVec& b,
                        const CVec& c) const {
  auto r = batch(z, RVec(),
                 {DerivRequest{}, DerivRequest{{a}}, DerivRequest{{b}},
                  DerivRequest{{c}}, DerivRequest{{a, b}}, DerivRequest{{a, c}},
                  DerivRequest{{b, c}}, DerivRequest{{a, b, c}}});
  const cplx t0 = r.reduced[0];
  const cplx la = r.reduced[1] / t0, lb = r.reduced[2] / t0, lc = r.reduced[3] / t0;
  const cplx lab = r.reduced[4] / t0, lac = r.reduced[5] / t0, lbc = r.reduced[6] / t0;
  const cplx labc = r.reduced[7] / t0;
  return labc - lab * lc - lac * lb - lbc * la + 2.0 * la * lb * lc;
}

JacobianTheta::JacobianTheta(CMat B, double tail_tol)
    : base_(B, tail_tol), doubled_(2.0 * B, tail_tol) {}

RVec JacobianTheta::char_eps(int idx) const {
  const int g = base_.genus();
  if (idx < 0 || idx >= (1 << g)) throw InputError("characteristic index out of range");
  RVec e(g);
  // Lexicographic order with the last index moving fastest: coordinate j
  // takes the bit of weight 2^(g-1-j).
  for (int j = 0; j < g; ++j) e[j] = ((idx >> (g - 1 - j)) & 1) ? 0.5 : 0.0;
  return e;
}

cplx JacobianTheta::level2(int idx, const CVec& z) const {
  return doubled_.value(CVec(2.0 * z), char_eps(idx));
}

cplx JacobianTheta::level2_deriv(int idx, const CVec& z,
                                 const std::vector<CVec>& dirs) const {
  // d/ds theta[eps](2(z + s d) | 2B) brings a factor 2 per direction.
  const cplx scale = std::pow(cplx(2.0), static_cast<double>(dirs.size()));
  return scale * doubled_.deriv(CVec(2.0 * z), char_eps(idx), dirs);
}

CVec JacobianTheta::kummer(const CVec& z) const {
  CVec out(n_chars());
  for (int i = 0; i < n_chars(); ++i) out[i] = level2(i, z);
  return out;
}

CVec JacobianTheta::kummer_deriv(const CVec& z,
                                 const std::vector<CVec>& dirs) const {
  CVec out(n_chars());
  for (int i = 0; i < n_chars(); ++i) out[i] = level2_deriv(i, z, dirs);
  return out;
}

}  // namespace finitegap
