#pragma once

#include <vector>

#include "finitegap/curve.hpp"
#include "finitegap/paths.hpp"
#include "finitegap/periods.hpp"
#include "finitegap/types.hpp"

namespace finitegap {

// ---------------------------------------------------------------------------
// Local coordinate chart w = k^{-1} at a marked point of the curve.
//
//   finite point P = (x0, y0):  w = sign * (x - x0), on the sheet through y0;
//   infinity on an odd-degree model:  w = x^{-1/2}  (the single point over
//   x = infinity), branch fixed by the real-positive anchor ray.
// ---------------------------------------------------------------------------
class PunctureChart {
 public:
  static PunctureChart finite_point(const CurveModel& curve, cplx x0, cplx y0,
                                    double sign = 1.0);
  static PunctureChart infinity_odd(const CurveModel& curve);

  bool at_infinity() const { return at_infinity_; }
  cplx x0() const { return x0_; }
  cplx y0() const { return y0_; }
  double sign() const { return sign_; }

  // Distance (in the w-plane) from w = 0 to the nearest branch point.
  double scale() const { return scale_; }
  // Extraction radius for Laurent coefficients: 0.2 * scale().
  double radius() const { return 0.2 * scale_; }

  cplx x_of(cplx w) const;
  cplx dx_dw(cplx w) const;
  cplx w_of_x(cplx x) const;  // finite charts only

  // Point at w = r on the positive real ray (sheet fixed by the chart).
  CurvePoint anchor(double r) const;
  // M points w_j = r e^{2 pi i j / M}, y tracked continuously from the
  // anchor; throws PrecisionError if the tracked sheet fails to close up.
  std::vector<CurvePoint> circle(double r, int M) const;

 private:
  const CurveModel* curve_ = nullptr;
  bool at_infinity_ = false;
  cplx x0_{};
  cplx y0_{};
  double sign_ = 1.0;
  double scale_ = 0.0;
};

// ---------------------------------------------------------------------------
// Rational differentials h(x, y) dx on y^2 = f(x), stored as sums of the
// primitive terms  c x^m dx,  c x^m dx/y,  c (x-p)^{-m} dx,  c (x-p)^{-m} dx/y.
// ---------------------------------------------------------------------------
struct DiffTerm {
  cplx c = 1.0;
  int power = 0;        // m >= 0 for polynomial terms, m >= 1 for pole terms
  bool pole = false;    // true: factor (x - pole_at)^{-power}
  cplx pole_at{};
  bool over_y = false;  // true: divide by y
};

class RationalDifferential {
 public:
  void add(const DiffTerm& t) { terms_.push_back(t); }
  const std::vector<DiffTerm>& terms() const { return terms_; }
  cplx eval(cplx x, cplx y) const;
  // this += s * other
  void accumulate(const RationalDifferential& other, cplx s);
  // Distinct finite pole locations in the x-plane.
  std::vector<cplx> pole_locations() const;

 private:
  std::vector<DiffTerm> terms_;
};

// Laurent data of dOmega/dw = sum_n c_n w^n in a chart, n >= lowest.
struct ChartSeries {
  int lowest = 0;
  std::vector<cplx> c;
  double radius = 0.0;  // extraction radius used
  double peak = 0.0;    // max integrand magnitude on the extraction circle

  cplx coeff(int n) const {
    const int k = n - lowest;
    if (k < 0 || k >= static_cast<int>(c.size())) return cplx(0.0);
    return c[static_cast<size_t>(k)];
  }
  cplx residue() const { return coeff(-1); }
  // a_s = c_{s-1} / s for s = 1..s_max (antiderivative, zero constant).
  std::vector<cplx> integral_constants(int s_max) const;
  // Value of the antiderivative at w (principal log for the residue term).
  cplx integral_value(cplx w) const;
};

// ---------------------------------------------------------------------------
// A normalized meromorphic differential: all a-periods vanish; the principal
// part is d(k^i) at its marked point (second kind) or a pair of simple poles
// with residues -1, +1 at the marked pair (third kind).
// ---------------------------------------------------------------------------
struct Meromorphic {
  enum class Kind { second_kind, third_kind };
  Kind kind = Kind::second_kind;
  int order = 0;  // i for second kind; 0 for third kind
  int chart = 0;  // chart index of the pole (second kind)
  RationalDifferential form;
  CVec U;  // flow vector: (1/2 pi i) x b-periods
  // Per chart: Laurent series of dOmega/dw, the integral constants a_s
  // (s = 1..s_max), and the constant term a_0 of Omega in that chart
  // (zero at the anchoring chart by normalization).
  std::vector<ChartSeries> series;
  std::vector<std::vector<cplx>> a;
  std::vector<cplx> a0;
};

// ---------------------------------------------------------------------------
// Involution action on the Jacobian for curves with f(-x) = f(x):
// sigma(x, y) = (-x, y) descends to A(sigma p) = M A(p) + v (mod lattice).
// ---------------------------------------------------------------------------
struct InvolutionData {
  CMat M;
  CVec v;
  std::vector<CurvePoint> fixed_points;
  CMat prym_dirs;       // columns: eigenvectors of M with eigenvalue -1
  CMat invariant_dirs;  // columns: eigenvectors of M with eigenvalue +1
  // Shift vector on the locus, built from a half divisor D of the zeros of
  // the selecting differential (dOmega_1 or dOmega_0): zeta = A(D) in the
  // frame's Abel map, satisfying (1 + M) zeta = -2K + sum A(marked points)
  // modulo the lattice.
  CVec zeta;
  std::vector<CurvePoint> half_divisor;
};

// Zeros of a rational differential on the curve away from its poles and the
// branch points, found as roots of the associated polynomial; throws
// PrecisionError when zeros are degenerate (non-simple, or at a branch point).
std::vector<CurvePoint> differential_zeros(const CurveModel& curve,
                                           const RationalDifferential& form,
                                           int expected_count);

// ---------------------------------------------------------------------------
// SpectralData: marked-point charts, normalized second/third-kind
// differentials with flow vectors and expansion constants, and joint anchored
// evaluation of the Abel map and the abelian integrals along common paths.
// ---------------------------------------------------------------------------
class SpectralData {
 public:
  enum class Scenario { one_point, two_point };
  static constexpr int kSMax = 6;  // stored expansion constants a_1..a_6

  // One marked point at the frame's base (finite point or odd-model
  // infinity); builds dOmega_1, dOmega_2, dOmega_3.
  static SpectralData one_point(const CurveFrame& frame);
  // Marked pair P1 = (a, y), P2 = (-a, y) swapped by x -> -x on an
  // even-symmetric curve; builds dOmega_0 (third kind, residues -1 at P1,
  // +1 at P2) and dOmega_{1,1}, dOmega_{2,1} (second kind, order 1).
  static SpectralData two_point(const CurveFrame& frame, cplx a);

  const CurveFrame& frame() const { return *frame_; }
  Scenario scenario() const { return scen_; }
  int genus() const { return frame_->genus(); }
  int n_charts() const { return static_cast<int>(charts_.size()); }
  const PunctureChart& chart(int alpha) const {
    return charts_[static_cast<size_t>(alpha)];
  }
  int n_forms() const { return static_cast<int>(forms_.size()); }
  // One-point order: dOmega_1, dOmega_2, dOmega_3.
  // Two-point order:  dOmega_0, dOmega_{1,1}, dOmega_{2,1}.
  const Meromorphic& omega(int j) const { return forms_[static_cast<size_t>(j)]; }

  // Abel map in the scenario normalization A(P1) = 0 (unreduced).
  CVec abel(const CurvePoint& p) const;
  CVec abel_shift() const { return shift_; }
  // Riemann constants transported to the scenario base point.
  CVec riemann_constants() const { return K_scn_; }

  struct Values {
    CurvePoint p;
    CVec A;      // Abel map, scenario base
    CVec Omega;  // Omega_j(p), one entry per form, scenario normalization
  };
  // Joint evaluation along one deterministic path from the chart-0 anchor.
  Values evaluate(const CurvePoint& p) const;
  // Joint values at w = r e^{2 pi i j / M}, j = 0..M (first and last at the
  // same point: closure check; the third-kind integral closes up to
  // 2 pi i x residue).
  std::vector<Values> circle_values(int alpha, double r, int M) const;
  // Values at the chart anchor (series-based for Omega, path-free).
  const Values& anchor_values(int alpha) const {
    return anchors_[static_cast<size_t>(alpha)];
  }
  double anchor_w(int alpha) const { return anchor_ws_[static_cast<size_t>(alpha)]; }

  // a-periods of an arbitrary differential over off-cut rectangular loops
  // homologous to the a-cycles (orientation auto-calibrated); exposed for
  // validation.
  CVec loop_a_periods(const RationalDifferential& form) const;

 private:
  SpectralData() = default;

  struct Column {  // one basis differential of the construction space
    RationalDifferential form;
  };

  void init_common();
  void finalize_form(Meromorphic& m) const;
  // Integral of h over the k-th off-cut rectangle (uncalibrated orientation);
  // checks that the tracked sheet closes.
  CVec loop_integral(int k, const Integrand& h, int dim) const;
  CMat loop_a_rows(const std::vector<Column>& cols) const;
  Meromorphic build_second_kind(int order, int chart_idx) const;
  Meromorphic build_third_kind() const;
  CVec flow_from_basis_taylor(int chart_idx, int order) const;
  void compute_flows();
  void setup_anchors();
  // Stacked integrand [holomorphic basis; all forms], dimension g + n_forms.
  Integrand stacked() const;
  // Waypoints from the chart-0 anchor via its staging circle to to_x,
  // detouring around branch points and pole locations.
  std::vector<cplx> staged_waypoints(cplx to_x) const;
  // Integrate the stacked integrand along the waypoints, correcting the
  // final sheet with a branch loop when tracking arrives opposite to target.
  CVec integrate_joint(const std::vector<cplx>& waypoints, cplx y_start,
                       const CurvePoint& target) const;

  const CurveFrame* frame_ = nullptr;
  Scenario scen_ = Scenario::one_point;
  std::vector<PunctureChart> charts_;       // marked-point charts
  std::vector<PunctureChart> conj_charts_;  // opposite-sheet charts (finite)
  std::vector<Meromorphic> forms_;
  CVec shift_;  // frame-Abel of the anchoring marked point
  CVec K_scn_;
  std::vector<Values> anchors_;
  std::vector<double> anchor_ws_;
  std::vector<cplx> obstacles_;  // branch points and pole locations
  std::vector<double> a_signs_;  // per-cut orientation of the off-cut loops
  std::vector<std::vector<cplx>> loop_corners_;  // per-cut rectangle corners
  int dft_points_ = 256;
  int series_top_ = 96;  // highest stored Laurent order
};

// Requires an even-symmetric curve; uses the scenario's Abel normalization.
InvolutionData involution_action(const SpectralData& sd);

}  // namespace finitegap
