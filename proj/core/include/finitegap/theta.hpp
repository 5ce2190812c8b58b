#pragma once

#include <vector>

#include "finitegap/types.hpp"

namespace finitegap {

// One mixed directional derivative of theta: apply d/ds theta(z + s*d) once
// per listed direction (directions may repeat and may be complex).  An empty
// list requests the plain value.  Orders up to 4 are supported.
struct DerivRequest {
  std::vector<CVec> dirs;
};

// Result of one lattice pass.  Each requested value is returned as a
// "reduced" mantissa; the true value is reduced[i] * exp(log_prefactor).
// The common prefactor collects the Gaussian scale exp(pi b^T Y^-1 b) of the
// shifted sum together with the exact quasi-periodicity factor from argument
// reduction, so the mantissas stay O(1) and ratios of values from the same
// batch are scale-free.
struct ThetaBatch {
  std::vector<cplx> reduced;
  cplx log_prefactor{0.0};
  double truncation_radius = 0.0;
  long n_terms = 0;
  double tail_bound = 0.0;  // absolute error bound on each reduced value

  cplx value(size_t i) const;  // reduced[i] * exp(log_prefactor)
};

// Evaluator for the Riemann theta function with half-integer characteristics
//
//   theta[eps,0](z | B) = sum_{m in Z^g} exp(2 pi i (z, m+eps)
//                                            + pi i (B(m+eps), m+eps)),
//
// B symmetric with positive definite imaginary part.  The sum is taken over
// the lattice points inside the ellipsoid |T(m+eps+c)| <= R with
// T^T T = pi Im B and c = (Im B)^{-1} Im z, enumerated recursively from the
// Cholesky factor; R is chosen from a rigorous tail bound that accounts for
// the polynomial growth of derivative factors.  Term order is deterministic
// and terms are combined by pairwise summation.
class ThetaEngine {
 public:
  explicit ThetaEngine(CMat B, double tail_tol = 1e-13);

  int genus() const { return g_; }
  const CMat& period_matrix() const { return B_; }
  double tail_tol() const { return tail_tol_; }

  // Core entry point: all requested derivatives in one lattice pass.
  ThetaBatch batch(const CVec& z, const RVec& eps,
                   const std::vector<DerivRequest>& requests) const;

  // Convenience wrappers (full values; may throw PrecisionError on overflow).
  cplx value(const CVec& z) const;
  cplx value(const CVec& z, const RVec& eps) const;
  cplx deriv(const CVec& z, const std::vector<CVec>& dirs) const;
  cplx deriv(const CVec& z, const RVec& eps, const std::vector<CVec>& dirs) const;

  // Scale-free logarithmic derivatives, e.g. dlog2 = d_a d_b log theta(z).
  cplx dlog(const CVec& z, const CVec& a) const;
  cplx dlog2(const CVec& z, const CVec& a, const CVec& b) const;
  cplx dlog3(const CVec& z, const CVec& a, const CVec& b, const CVec& c) const;

  // Shortest vector length of the lattice T Z^g (used by the tail bound).
  double shortest_vector() const { return rho_; }

 private:
  int g_;
  CMat B_;
  RMat X_;     // Re B
  RMat Y_;     // Im B
  RMat T_;     // upper triangular, T^T T = pi Y
  RMat Yinv_;
  double tail_tol_;
  double rho_;    // shortest vector of T Z^g
  double alpha_;  // spectral norm of T^{-1}

  double tail_bound(double R, double poly_K, int poly_r, double beta) const;
};

// Theta data attached to one period matrix: the base evaluator, the doubled
// evaluator used by second-order (level two) characteristics, and the Kummer
// map.  Level-two functions are Theta[eps](z) = theta[eps,0](2z | 2B); the
// Kummer vector lists all 2^g of them with characteristics in lexicographic
// order, last index fastest.
class JacobianTheta {
 public:
  explicit JacobianTheta(CMat B, double tail_tol = 1e-13);

  int genus() const { return base_.genus(); }
  const ThetaEngine& base() const { return base_; }
  const ThetaEngine& doubled() const { return doubled_; }

  int n_chars() const { return 1 << base_.genus(); }
  RVec char_eps(int idx) const;

  cplx level2(int idx, const CVec& z) const;
  cplx level2_deriv(int idx, const CVec& z, const std::vector<CVec>& dirs) const;
  CVec kummer(const CVec& z) const;
  CVec kummer_deriv(const CVec& z, const std::vector<CVec>& dirs) const;

 private:
  ThetaEngine base_;
  ThetaEngine doubled_;
};

}  // namespace finitegap
