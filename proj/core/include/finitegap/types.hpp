#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace finitegap {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr cplx kI{0.0, 1.0};

// Malformed user input (bad curve spec, unreadable file, unknown flag value).
// The command line maps this to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation that cannot reach its accuracy target (ill-conditioned solve,
// non-convergent truncation, overflow).  The command line maps this to exit
// code 3.
struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic pairwise summation: reduces floating-point error growth from
// O(n) to O(log n) without any runtime reordering, so results are bit-stable
// across runs for a fixed term sequence.
inline cplx pairwise_sum(const std::vector<cplx>& terms, size_t lo, size_t hi) {
  const size_t n = hi - lo;
  if (n == 0) return cplx(0.0);
  if (n <= 8) {
    cplx s(0.0);
    for (size_t i = lo; i < hi; ++i) s += terms[i];
    return s;
  }
  const size_t mid = lo + n / 2;
  return pairwise_sum(terms, lo, mid) + pairwise_sum(terms, mid, hi);
}

inline cplx pairwise_sum(const std::vector<cplx>& terms) {
  return pairwise_sum(terms, 0, terms.size());
}

}  // namespace finitegap
