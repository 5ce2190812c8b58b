#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "finitegap/differentials.hpp"
#include "finitegap/theta.hpp"

namespace finitegap {

// ---------------------------------------------------------------------------
// Evaluation state of a wave function: the theta-argument shift Z together
// with the first flow times.
//
//   one-point scenario:  (x, y, t) are the times paired with the integrals
//                        of pole order 1, 2, 3;
//   two-point scenario:  x is the (discrete) lattice variable coupled to the
//                        third-kind integral, and (y, t) act through the
//                        marked-point times t_{1,1} = y + t, t_{2,1} = -t.
// ---------------------------------------------------------------------------
struct FlowState {
  CVec Z;
  cplx x{0.0};
  cplx y{0.0};
  cplx t{0.0};
};

// One evaluation of the wave function (or its dual) at a point of the curve.
struct BAEvaluation {
  cplx value{0.0};
  // Abelian exponent actually used (sum of time-weighted integrals).
  cplx exponent{0.0};
  // A denominator theta came out below 1e-10 of its quasi-periodic scale:
  // the state sits next to the theta divisor and `value` is near a pole.
  bool near_divisor = false;
};

// Taylor data of the exponentially normalized wave function on an extraction
// circle |w| = radius around a puncture: psi times exp(-principal parts)
// equals lead * (1 + sum_s xi_s w^s).  At the anchoring puncture lead is 1 by
// normalization; at the second puncture of a marked pair it carries the
// exponential of the lattice field.
struct WaveCoefficients {
  cplx lead{1.0};
  std::vector<cplx> xi;  // xi_1 .. xi_N, normalized by lead
  double radius = 0.0;
  int nodes = 0;  // quadrature node count that met the stability target
};

// Potentials and expansion constants derived from one flow state.
//   one-point: u (second-flow potential), w (third-flow potential), and the
//              constants b1 = 2 a_1, b3 (w = (3/4) u_x - (3/2) dxdy log theta
//              + b3); f and b2 are unused.
//   two-point: u = b1 + (T - 1) d_y log theta, w = b2 T(theta) T^{-1}(theta)
//              / theta^2, and the lattice field f; b3 is unused.
struct DerivedFields {
  cplx u{0.0};
  cplx w{0.0};
  cplx f{0.0};
  cplx b1{0.0};
  cplx b2{0.0};
  cplx b3{0.0};
};

// ---------------------------------------------------------------------------
// Wave-function evaluator on top of SpectralData: theta-quotient times
// abelian exponential, with the Abel map and all abelian integrals taken
// along one common path (as provided by SpectralData::evaluate and
// circle_values).  Wave coefficients are extracted by discrete contour
// integration in the puncture charts; potentials u, w, f by the analytic
// theta formulas plus low-order finite differences in the times.
// ---------------------------------------------------------------------------
class BakerAkhiezer {
 public:
  explicit BakerAkhiezer(const SpectralData& sd, double tail_tol = 1e-14);

  const SpectralData& data() const { return *sd_; }
  const ThetaEngine& theta() const { return theta_; }

  // Theta shift of a degree-g pole divisor in the scenario normalization:
  // Z = -sum_s A(gamma_s) - K.  theta(A(p) + Z) then vanishes exactly at the
  // divisor points.
  CVec divisor_vector(const std::vector<CurvePoint>& divisor) const;

  // Flow part of the theta argument: x U_1 + y U_2 + t U_3 (one-point) or
  // x U_0 + t_{1,1} U_{1,1} + t_{2,1} U_{2,1} (two-point; the dual shifts x
  // by one).
  CVec flow_vector(const FlowState& s, bool dual = false) const;
  // Exponent coefficient per stored differential (sign-flipped for duals;
  // the one-point dual carries only the first two times).
  std::vector<cplx> flow_times(const FlowState& s, bool dual = false) const;

  // Wave function (dual = false) or its dual (dual = true) from joint values
  // of the Abel map and the abelian integrals at a point.
  BAEvaluation evaluate(const FlowState& s, const SpectralData::Values& vals,
                        bool dual = false) const;
  BAEvaluation evaluate(const FlowState& s, const CurvePoint& p,
                        bool dual = false) const;

  // Wave coefficients xi_1..xi_N at the puncture of the given chart,
  // extracted on |w| = radius (default: the chart's extraction radius) with
  // node doubling from 64 until two passes agree to 1e-9.
  WaveCoefficients wave_coefficients(const FlowState& s, int N,
                                     bool dual = false, int chart = 0) const;
  WaveCoefficients wave_coefficients(const FlowState& s, int N, bool dual,
                                     int chart, double radius) const;

  DerivedFields derived_fields(const FlowState& s) const;

  // Residue at the anchoring puncture of the product pairing
  //   one-point:  (d_x^i psi-dual) (d_x^m psi) dOmega   (requires t = 0),
  //   two-point:  (psi-dual) (psi shifted x -> x+i) dOmega   (m must be 0),
  // where dOmega is the differential with the scenario's principal parts
  // vanishing on `divisor` and its complement.  An empty `divisor` selects
  // the stored connecting differential, which is correct whenever Z is the
  // divisor vector of a half divisor of its zeros.  `scale` (if non-null)
  // receives the largest integrand sample magnitude for tolerance scaling.
  cplx residue_pairing(const FlowState& s, int i, int m = 0,
                       const std::vector<CurvePoint>& divisor = {},
                       double* scale = nullptr) const;

  // The differential with the scenario's principal parts at the punctures
  // (second-order pole, or the residue -1/+1 pair) vanishing on the given
  // degree-g divisor: the stored connecting differential plus a holomorphic
  // correction solved from the divisor conditions.
  RationalDifferential pairing_differential(
      const std::vector<CurvePoint>& divisor) const;

 private:
  struct ArgFrame {
    CVec v1, vA;    // point-dependent arguments: z1 = A + v1, zA = A + vA
    CVec z0, pref;  // point-independent arguments
    std::vector<cplx> c;  // exponent coefficient per form
  };
  ArgFrame arg_frame(const FlowState& s, bool dual) const;

  struct LogTheta {
    cplx log;             // log theta, branch irrelevant to exponentials
    double mantissa_abs;  // |theta| relative to the quasi-periodic scale
  };
  LogTheta log_theta(const CVec& z) const;

  const std::vector<SpectralData::Values>& circle(int chart, double r,
                                                  int M) const;
  // Raw Taylor coefficients c_0..c_N of the normalized wave function at one
  // node count.
  std::vector<cplx> raw_coefficients(const ArgFrame& af, int chart, double r,
                                     int N, int M) const;
  cplx x_derivative(const FlowState& s, const SpectralData::Values& vals,
                    int order, bool dual) const;

  const SpectralData* sd_;
  ThetaEngine theta_;
  mutable std::map<std::tuple<int, double, int>,
                   std::vector<SpectralData::Values>>
      circle_cache_;
};

}  // namespace finitegap
