#include "finitegap/curve.hpp"

#include <algorithm>
#include <cmath>

namespace finitegap {

CurveModel::CurveModel(CVec coeffs) : coeffs_(std::move(coeffs)) {
  while (coeffs_.size() > 1 && std::abs(coeffs_[coeffs_.size() - 1]) == 0.0)
    coeffs_.conservativeResize(coeffs_.size() - 1);
  const int deg = degree();
  if (deg < 3) throw InputError("curve polynomial must have degree at least 3");

  // Roots from the companion matrix of the monic polynomial, then a few
  // Newton steps to polish them to full double accuracy.
  const int n = deg;
  CMat comp = CMat::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -coeffs_[i] / leading();
  Eigen::ComplexEigenSolver<CMat> es(comp, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw PrecisionError("root finding for the curve polynomial failed");
  roots_.resize(n);
  for (int i = 0; i < n; ++i) {
    cplx r = es.eigenvalues()[i];
    for (int it = 0; it < 4; ++it) {
      const cplx d = df(r);
      if (std::abs(d) == 0.0) break;
      r -= f(r) / d;
    }
    roots_[i] = r;
  }
  std::sort(roots_.begin(), roots_.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });

  double diam = 0.0, min_gap = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < roots_.size(); ++i)
    for (size_t j = i + 1; j < roots_.size(); ++j) {
      const double d = std::abs(roots_[i] - roots_[j]);
      diam = std::max(diam, d);
      min_gap = std::min(min_gap, d);
    }
  scale_ = std::max(diam, 1.0);
  if (min_gap < 1e-8 * scale_)
    throw InputError("curve has a (nearly) repeated branch point; y^2 = f(x) must be nonsingular");
}

cplx CurveModel::f(cplx x) const {
  cplx v = 0.0;
  for (Eigen::Index i = coeffs_.size() - 1; i >= 0; --i) v = v * x + coeffs_[i];
  return v;
}

cplx CurveModel::df(cplx x) const {
  cplx v = 0.0;
  for (Eigen::Index i = coeffs_.size() - 1; i >= 1; --i)
    v = v * x + coeffs_[i] * static_cast<double>(i);
  return v;
}

CurvePoint CurveModel::point(cplx x, int sheet) const {
  if (sheet != 1 && sheet != -1) throw InputError("sheet must be +1 or -1");
  return {x, static_cast<double>(sheet) * y_principal(x)};
}

bool CurveModel::contains(const CurvePoint& p, double tol) const {
  const double scale = std::max(1.0, std::abs(f(p.x)));
  return std::abs(p.y * p.y - f(p.x)) <= tol * scale;
}

bool CurveModel::x_negation_symmetric(double tol) const {
  const double scale = coeffs_.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 1; k < coeffs_.size(); k += 2)
    if (std::abs(coeffs_[k]) > tol * scale) return false;
  return true;
}

}  // namespace finitegap
