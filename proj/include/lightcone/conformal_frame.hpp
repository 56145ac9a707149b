#pragma once

// Conformal structure induced by a lift: conformality gate, null directions
// Z+ and Z-, and the Hodge star scalars on (1,0) and (0,1) covectors.

#include <array>
#include <cmath>

#include "lightcone/jets.hpp"

namespace lightcone {

inline constexpr double kConformalityGate = 1e-6;

/// Normalized failure of (F_u,F_v) to be conformal (eps = 0) or null (eps = 1).
inline double conformality_check(const AmbientSpace& space, const VecJet& F, int epsilon) {
  if (F.order() < 1) throw GeometryError(ErrorKind::jet_order, "conformality check needs order >= 1");
  const Vec Fu = F.partial(1, 0), Fv = F.partial(0, 1);
  const double uu = space.inner(Fu, Fu), vv = space.inner(Fv, Fv), uv = space.inner(Fu, Fv);
  const double normalizer = epsilon == 0 ? uu + vv : std::abs(uv);
  if (!(std::abs(normalizer) >= 1e-10))
    throw GeometryError(ErrorKind::not_conformal, "not an immersion here");
  if (epsilon == 0) return (std::abs(uu - vv) + 2 * std::abs(uv)) / normalizer;
  return (std::abs(uu) + std::abs(vv)) / normalizer;
}

/// Z+ and Z- as constant combinations of d/du and d/dv.
struct NullDirections {
  int epsilon = 0;
  std::array<cplx, 2> plus;   // (cu, cv)
  std::array<cplx, 2> minus;
  cplx s_plus;
  cplx s_minus;

  explicit NullDirections(int eps = 0) : epsilon(eps) {
    const cplx I(0, 1);
    if (eps == 0) {
      plus = {0.5, -0.5 * I};
      minus = {0.5, 0.5 * I};
      s_plus = I;
    } else {
      plus = {1.0, 0.0};
      minus = {0.0, 1.0};
      s_plus = 1.0;
    }
    s_minus = -s_plus;
  }

  const std::array<cplx, 2>& dir(bool p) const { return p ? plus : minus; }

  /// Combines u- and v-components of a form into its value on Z+ or Z-.
  template <class T>
  auto on(bool p, const T& wu, const T& wv) const {
    const auto& c = dir(p);
    return detail::evaluated(complexify(wu) * c[0] + complexify(wv) * c[1]);
  }

  /// Recovers (w_u, w_v) from (w(Z+), w(Z-)).
  template <class T>
  std::array<T, 2> to_uv(const T& wp, const T& wm) const {
    const cplx a = plus[0], b = plus[1], c = minus[0], d = minus[1];
    const cplx det = a * d - b * c;
    return {wp * (d / det) + wm * (-b / det), wp * (-c / det) + wm * (a / det)};
  }
};

/// Derivative helpers at the base point of a jet.
struct NullFrame {
  NullDirections nd;
  CVec dF_plus;
  CVec dF_minus;
  CVec d2F_plus_plus;
  CVec d2F_minus_minus;
  CVec d2F_plus_minus;
};

/// Validates conformality and extracts null-direction derivatives.
inline NullFrame null_frame(const AmbientSpace& space, const VecJet& F, int epsilon,
                            double gate = kConformalityGate) {
  const double r = conformality_check(space, F, epsilon);
  if (!(r < gate))
    throw GeometryError(ErrorKind::not_conformal,
                        "parametrization is not conformal (residual " + std::to_string(r) + ")");
  NullFrame nf{NullDirections(epsilon), {}, {}, {}, {}, {}};
  const auto& p = nf.nd.plus;
  const auto& m = nf.nd.minus;
  const CVec Fu = complexify(F.partial(1, 0)), Fv = complexify(F.partial(0, 1));
  nf.dF_plus = p[0] * Fu + p[1] * Fv;
  nf.dF_minus = m[0] * Fu + m[1] * Fv;
  if (F.order() >= 2) {
    const CVec Fuu = complexify(F.partial(2, 0)), Fuv = complexify(F.partial(1, 1)),
               Fvv = complexify(F.partial(0, 2));
    auto second = [&](const std::array<cplx, 2>& x, const std::array<cplx, 2>& y) -> CVec {
      return x[0] * y[0] * Fuu + (x[0] * y[1] + x[1] * y[0]) * Fuv + x[1] * y[1] * Fvv;
    };
    nf.d2F_plus_plus = second(p, p);
    nf.d2F_minus_minus = second(m, m);
    nf.d2F_plus_minus = second(p, m);
  }
  return nf;
}

}  // namespace lightcone
