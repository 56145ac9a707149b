#pragma once

// Central sphere congruence, Weyl structures, the splitting
// d = D - beta - betahat + II + A and its structure equations.
//
// Every subbundle is carried as a jet of its projector, so connection forms
// are products of projector jets and their derivatives.

#include <cmath>
#include <optional>
#include <string>

#include <Eigen/SVD>

#include "lightcone/conformal_frame.hpp"
#include "lightcone/surface.hpp"

namespace lightcone {

/// Matrix jet whose columns are the given vector jets.
inline MatJet columns(const std::vector<VecJet>& cols) {
  int k = cols.at(0).order();
  for (const auto& c : cols) k = std::min(k, c.order());
  const int n = static_cast<int>(cols[0].value().size());
  const int m = static_cast<int>(cols.size());
  MatJet out(k, Mat::Zero(n, m), cols[0].u0(), cols[0].v0());
  for (int j = 0; j < m; ++j) {
    cols[j].same_point(cols[0]);
    for (std::size_t c = 0; c < out.raw().size(); ++c) out.raw()[c].col(j) = cols[j].raw()[c];
  }
  return out;
}

inline MatJet identity_jet(int n, int order, double u0, double v0) {
  return MatJet::constant(order, Mat::Identity(n, n), u0, v0);
}

inline MatJet mat_of(const AmbientSpace& space, int order, double u0, double v0) {
  return MatJet::constant(order, space.gram(), u0, v0);
}

/// Projector onto span(B) along its orthogonal complement: B (B^T G B)^{-1} B^T G.
inline MatJet projector_onto(const AmbientSpace& space, const MatJet& B) {
  const Mat G = space.gram();
  MatJet BtG = B.map([&G](const Mat& b) { return Mat(b.transpose() * G); });
  MatJet gram = BtG * B;
  return B * (inverse_matrix(gram) * BtG);
}

/// Projector onto the line of x along the complement of y: x (Gy)^T / (y,x).
template <class A, class B, class S>
auto line_projector(const AmbientSpace& space, const Jet<A>& x, const Jet<B>& y) {
  Jet<S> d = inner(space, y, x);
  return reciprocal(d) * outer_lowered(space, x, y);
}

struct CongruenceOptions {
  double m_perturbation = 0.0;  // adds delta times a non-central second derivative to M
};

struct CongruenceFrame {
  AmbientSpace space;
  NullDirections nd;
  VecJet F;        // order K
  VecJet M;        // order K-2
  MatJet P_V;      // order K-2
  MatJet P_perp;   // order K-2
  Signature signature;
  Eigen::VectorXd w_singular;  // normal-valued derivative singular values, scaled
  int w_rank = 0;
  double scale = 0;            // (|F_u| + |F_v|) / |F|, an inverse parameter length
};

inline constexpr double kWRankTolerance = 1e-7;

/// V = f^(1) + <d_{Z+} d_{Z-} F> as a projector jet.
inline CongruenceFrame central_sphere_congruence(const AmbientSpace& space, const VecJet& F,
                                                 const NullDirections& nd,
                                                 const CongruenceOptions& opt = {}) {
  if (F.order() < 3) throw GeometryError(ErrorKind::jet_order, "central sphere congruence needs order >= 3");
  const int k = F.order() - 2;
  const double u0 = F.u0(), v0 = F.v0();
  VecJet Fu = F.du(), Fv = F.dv();
  VecJet Fuu = Fu.du(), Fuv = Fu.dv(), Fvv = Fv.dv();
  VecJet M, Mp;
  if (nd.epsilon == 0) {
    M = (Fuu + Fvv) * 0.25;
    Mp = (Fuu - Fvv) * 0.25;
  } else {
    M = Fuv;
    Mp = Fuu;
  }
  if (opt.m_perturbation != 0) M += Mp * opt.m_perturbation;
  MatJet B = columns({F.truncated(k), Fu.truncated(k), Fv.truncated(k), M});
  {
    Eigen::MatrixXd b0 = B.value();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b0);
    const auto& sv = svd.singularValues();
    if (sv(3) <= 1e-9 * sv(0))
      throw GeometryError(ErrorKind::degenerate_subspace,
                          "totally umbilic point: central sphere congruence via limit frame");
  }
  CongruenceFrame cf{space, nd, F, M, {}, {}, {}, {}, 0, 0};
  cf.P_V = projector_onto(space, B);
  cf.P_perp = identity_jet(space.dim(), k, u0, v0) - cf.P_V;
  cf.signature = SubspaceFrame(space, B.value()).signature();
  const int want_neg = 1 + nd.epsilon;
  if (cf.signature.nullity != 0 || cf.signature.negative != want_neg || cf.signature.indeterminate)
    throw GeometryError(ErrorKind::wrong_signature, "central sphere congruence has unexpected signature");

  // Rank of N -> proj_V dN for N in V_perp.
  const Mat Pperp = cf.P_perp.value(), PV = cf.P_V.value();
  const Mat dPu = cf.P_V.du().value(), dPv = cf.P_V.dv().value();
  Eigen::MatrixXd stacked(space.dim(), 2 * space.dim());
  stacked << PV * (-dPu) * Pperp, PV * (-dPv) * Pperp;
  const Vec F0 = F.value();
  cf.scale = (F.partial(1, 0).norm() + F.partial(0, 1).norm()) / F0.norm();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  cf.w_singular = svd.singularValues() / cf.scale;
  for (Eigen::Index i = 0; i < cf.w_singular.size(); ++i)
    if (cf.w_singular(i) > kWRankTolerance) ++cf.w_rank;
  return cf;
}

enum class EnvelopeStatus { found, umbilic_locus, quasi_umbilic_candidate, no_unique_envelope, no_envelope };

inline std::string to_string(EnvelopeStatus s) {
  switch (s) {
    case EnvelopeStatus::found: return "found";
    case EnvelopeStatus::umbilic_locus: return "umbilic_locus";
    case EnvelopeStatus::quasi_umbilic_candidate: return "quasi_umbilic_candidate";
    case EnvelopeStatus::no_unique_envelope: return "no_unique_envelope";
    case EnvelopeStatus::no_envelope: return "no_envelope";
  }
  return "?";
}

struct EnvelopeResult {
  EnvelopeStatus status = EnvelopeStatus::no_envelope;
  std::optional<VecJet> Fhat;  // order K-3, normalized (F,Fhat) = -1
};

/// Null completion y + tF of y with (F, result) = -1.
inline VecJet null_completion(const AmbientSpace& space, const VecJet& F, const VecJet& y) {
  ScalarJet yy = inner(space, y, y);
  ScalarJet yF = inner(space, y, F);
  ScalarJet r = reciprocal(yF);
  ScalarJet t = yy * r * (-0.5);
  VecJet Fh = y + t * F;
  return (r * (-1.0)) * Fh;
}

/// The second envelope of the central sphere congruence, if unique.
inline EnvelopeResult second_envelope(const CongruenceFrame& cf) {
  const AmbientSpace& space = cf.space;
  const VecJet& F = cf.F;
  const int n = space.dim();
  VecJet Fu = F.du(), Fv = F.dv();
  // E = { y in V : P_perp dy = 0 }; y = M + a F_u + b F_v.
  std::array<MatJet, 2> J;
  std::array<VecJet, 2> r;
  for (int x = 0; x < 2; ++x) {
    VecJet a = x == 0 ? Fu.du() : Fu.dv();
    VecJet b = x == 0 ? Fv.du() : Fv.dv();
    VecJet m = x == 0 ? cf.M.du() : cf.M.dv();
    J[x] = cf.P_perp * columns({a, b});
    r[x] = cf.P_perp * m;
  }
  // Columns scaled to be dimensionless before the rank decision.
  const double unit = cf.scale * Fu.value().norm();
  Eigen::MatrixXd stacked(2 * n, 3);
  stacked << J[0].value() / unit, r[0].value() / (unit * cf.scale), J[1].value() / unit,
      r[1].value() / (unit * cf.scale);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kWRankTolerance) ++rank;
  EnvelopeResult res;
  if (rank == 0) res.status = EnvelopeStatus::umbilic_locus;
  else if (rank == 1) res.status = EnvelopeStatus::quasi_umbilic_candidate;
  else if (rank == 3) res.status = EnvelopeStatus::no_envelope;
  if (rank != 2) return res;
  try {
    MatJet Nrm = transpose(J[0]) * J[0] + transpose(J[1]) * J[1];
    MatJet rhs = transpose(J[0]) * r[0].map([](const Vec& v) { return Mat(v); }) +
                 transpose(J[1]) * r[1].map([](const Vec& v) { return Mat(v); });
    MatJet ab = -(inverse_matrix(Nrm) * rhs);
    ScalarJet a = ab.map([](const Mat& m) { return m(0, 0); });
    ScalarJet b = ab.map([](const Mat& m) { return m(1, 0); });
    VecJet y = cf.M + a * Fu + b * Fv;
    const double yF = space.inner(y.value(), F.value());
    if (std::abs(yF) <= 1e-9 * y.value().norm() * F.value().norm()) {
      res.status = EnvelopeStatus::no_unique_envelope;
      return res;
    }
    res.Fhat = null_completion(space, F.truncated(y.order()), y);
    res.status = EnvelopeStatus::found;
  } catch (const GeometryError&) {
    res.status = EnvelopeStatus::no_unique_envelope;
  }
  return res;
}

/// Weyl structure determined by a space form vector: the null line of V
/// orthogonal to U, where U is V intersected with the complement of F and q.
inline VecJet spaceform_weyl(const CongruenceFrame& cf, const Vec& q) {
  const int k = cf.P_V.order();
  VecJet y = cf.P_V * VecJet::constant(k, q, cf.F.u0(), cf.F.v0());
  return null_completion(cf.space, cf.F.truncated(k), y);
}

/// Moves a Weyl structure off its geometric choice, for negative controls.
inline VecJet perturbed_weyl(const CongruenceFrame& cf, const VecJet& Fhat, double delta) {
  const int k = Fhat.order();
  VecJet y = Fhat + cf.F.du().truncated(k) * delta;
  return null_completion(cf.space, cf.F.truncated(k), y);
}

/// A bivector-valued 1-form by its components on d/du and d/dv.
struct Form {
  MatJet u;
  MatJet v;
  const MatJet& operator[](int i) const { return i == 0 ? u : v; }
  MatJet& operator[](int i) { return i == 0 ? u : v; }
  friend Form operator+(const Form& a, const Form& b) { return {a.u + b.u, a.v + b.v}; }
  friend Form operator-(const Form& a, const Form& b) { return {a.u - b.u, a.v - b.v}; }
  friend Form operator-(const Form& a) { return {-a.u, -a.v}; }
  double norm() const { return u.value().norm() + v.value().norm(); }
  /// Value on Z+ (p = true) or Z-.
  CMat on(const NullDirections& nd, bool p) const { return nd.on(p, u.value(), v.value()); }
  CMatJet jet_on(const NullDirections& nd, bool p) const { return nd.on(p, u, v); }
};

struct SplittingOptions {
  double skew_tolerance = 1e-7;
};

struct Splitting {
  AmbientSpace space;
  NullDirections nd;
  VecJet F;
  VecJet Fhat;
  MatJet P_f, P_fhat, P_U, P_perp, P_V;  // order k
  CVecJet sigma_plus, sigma_minus;       // U+ and U- generators
  CMatJet P_Uplus, P_Uminus;
  Form beta, betahat, Q, beta0, II, A, Gamma;  // order k-1
  double skew_defect = 0;
  double imag_defect = 0;
  double scale = 0;  // ||Omega_u|| + ||Omega_v||
};

/// Full connection splitting for the congruence cf and the Weyl structure Fhat.
inline Splitting weyl_split(const CongruenceFrame& cf, const VecJet& Fhat_in,
                            const SplittingOptions& opt = {}) {
  const AmbientSpace& space = cf.space;
  const int k = std::min(cf.P_V.order(), Fhat_in.order());
  if (k < 1) throw GeometryError(ErrorKind::jet_order, "splitting needs projector jets of order >= 1");
  Splitting s{space, cf.nd, cf.F.truncated(k), Fhat_in.truncated(k), {}, {}, {}, {}, {}, {}, {}, {}, {},
              {}, {}, {}, {}, {}, {}, {}, 0, 0, 0};
  s.P_V = cf.P_V.truncated(k);
  s.P_perp = cf.P_perp.truncated(k);
  s.P_f = line_projector<Vec, Vec, double>(space, s.F, s.Fhat);
  s.P_fhat = line_projector<Vec, Vec, double>(space, s.Fhat, s.F);
  s.P_U = s.P_V - s.P_f - s.P_fhat;
  const Mat UV = s.P_U.value();
  if (std::abs(UV.trace() - 2.0) > 1e-6)
    throw GeometryError(ErrorKind::degenerate_subspace, "U is degenerate");

  for (int x = 0; x < 2; ++x) {
    auto d = [x](const MatJet& P) { return x == 0 ? P.du() : P.dv(); };
    const MatJet dPf = d(s.P_f), dPh = d(s.P_fhat), dPU = d(s.P_U), dPp = d(s.P_perp);
    const MatJet Pf = s.P_f.truncated(k - 1), Ph = s.P_fhat.truncated(k - 1),
                 PU = s.P_U.truncated(k - 1), Pp = s.P_perp.truncated(k - 1);
    s.beta[x] = -(PU * dPf * Pf + Ph * dPU * PU);
    s.betahat[x] = -(PU * dPh * Ph + Pf * dPU * PU);
    s.II[x] = Pp * dPU * PU + PU * dPp * Pp;
    s.A[x] = Pp * dPh * Ph + Pf * dPp * Pp;
    s.Gamma[x] = Pf * dPf + Ph * dPh + PU * dPU + Pp * dPp;
  }
  const Form Omega = -s.beta - s.betahat + s.II + s.A;
  s.scale = Omega.norm();
  for (int x = 0; x < 2; ++x) {
    const MatJet sum = Omega[x] + s.Gamma[x];
    for (const auto& c : sum.raw()) s.skew_defect = std::max(s.skew_defect, c.norm());
  }
  if (s.skew_defect > opt.skew_tolerance * std::max(1.0, s.scale))
    throw GeometryError(ErrorKind::internal, "splitting skewness violated");

  // U+ = <P_U F_{Z+}>, U- = <P_U F_{Z-}>.
  const CMatJet PUc = complexify(s.P_U);
  const VecJet Fk1 = cf.F.truncated(k + 1);
  s.sigma_plus = PUc * directional(Fk1, cf.nd.plus[0], cf.nd.plus[1]);
  s.sigma_minus = PUc * directional(Fk1, cf.nd.minus[0], cf.nd.minus[1]);
  s.P_Uplus = line_projector<CVec, CVec, cplx>(space, s.sigma_plus, s.sigma_minus);
  s.P_Uminus = line_projector<CVec, CVec, cplx>(space, s.sigma_minus, s.sigma_plus);

  const CMatJet Pf = complexify(s.P_f.truncated(k - 1)), Ph = complexify(s.P_fhat.truncated(k - 1));
  const CMatJet Pp = s.P_Uplus.truncated(k - 1), Pm = s.P_Uminus.truncated(k - 1);
  const CMatJet bp = s.betahat.jet_on(cf.nd, true), bm = s.betahat.jet_on(cf.nd, false);
  const CMatJet Qp = Pm * bp * Ph + Pf * bp * Pp;
  const CMatJet Qm = Pp * bm * Ph + Pf * bm * Pm;
  const CMatJet Bp = Pp * bp * Ph + Pf * bp * Pm;
  const CMatJet Bm = Pm * bm * Ph + Pf * bm * Pp;
  auto real_form = [&](const CMatJet& wp, const CMatJet& wm) {
    auto uv = cf.nd.to_uv(wp, wm);
    Form f;
    for (int x = 0; x < 2; ++x) {
      f[x] = uv[x].map([](const CMat& m) { return Mat(m.real()); });
      for (const auto& c : uv[x].raw()) s.imag_defect = std::max(s.imag_defect, c.imag().norm());
    }
    return f;
  };
  s.Q = real_form(Qp, Qm);
  s.beta0 = real_form(Bp, Bm);
  return s;
}

// ------------------------------------------------ derivatives of forms

/// D_X T = dT/dX + [Gamma_X, T] along the direction (cu, cv).
inline CMatJet covariant(const Form& Gamma, const CMatJet& T, cplx cu, cplx cv) {
  CMatJet dT = directional(T, cu, cv);
  CMatJet G = complexify(Gamma.u) * cu + complexify(Gamma.v) * cv;
  const int k = dT.order();
  CMatJet Gk = G.truncated(std::min(k, G.order()));
  CMatJet Tk = T.truncated(std::min(k, T.order()));
  return dT + (Gk * Tk - Tk * Gk);
}

inline MatJet covariant_real(const Form& Gamma, const MatJet& T, int x) {
  MatJet dT = x == 0 ? T.du() : T.dv();
  const int k = dT.order();
  MatJet G = Gamma[x].truncated(std::min(k, Gamma[x].order()));
  MatJet Tk = T.truncated(std::min(k, T.order()));
  return dT + (G * Tk - Tk * G);
}

/// d^D w evaluated on (d/du, d/dv), as a jet.
inline MatJet exterior_covariant(const Form& Gamma, const Form& w) {
  return covariant_real(Gamma, w.v, 0) - covariant_real(Gamma, w.u, 1);
}

/// [a ^ b](d/du, d/dv) = [a_u, b_v] - [a_v, b_u], at the base point.
inline Mat wedge_bracket(const Form& a, const Form& b) {
  const Mat au = a.u.value(), av = a.v.value(), bu = b.u.value(), bv = b.v.value();
  return commutator(au, bv) - commutator(av, bu);
}

/// The five structure equations, as raw norms at the base point.
struct GcrResiduals {
  std::array<double, 5> raw{};
  double scale = 0;
  double max_relative() const {
    double m = 0;
    for (double r : raw) m = std::max(m, r / std::max(scale * scale, 1e-300));
    return m;
  }
};

inline GcrResiduals gcr_residuals(const Splitting& s) {
  if (s.Gamma.u.order() < 1)
    throw GeometryError(ErrorKind::jet_order, "structure equations need one more jet order");
  const Form& G = s.Gamma;
  const Mat RD = (G.v.du().value() - G.u.dv().value()) + commutator(G.u.value(), G.v.value());
  GcrResiduals r;
  r.scale = s.scale;
  r.raw[0] = (RD + wedge_bracket(s.beta, s.beta0) + commutator(s.II.u.value(), s.II.v.value())).norm();
  r.raw[1] = exterior_covariant(G, s.beta).value().norm();
  r.raw[2] = (exterior_covariant(G, s.Q).value() + exterior_covariant(G, s.beta0).value() -
              wedge_bracket(s.A, s.II))
                 .norm();
  r.raw[3] = (exterior_covariant(G, s.A).value() - wedge_bracket(s.Q, s.II)).norm();
  r.raw[4] = (exterior_covariant(G, s.II).value() - wedge_bracket(s.beta, s.A)).norm();
  return r;
}

/// Failure of II_{Z+} to kill U- and of II_{Z-} to kill U+, relative to the form scale.
inline double csc_verify(const Splitting& s) {
  const CMat IIp = s.II.on(s.nd, true), IIm = s.II.on(s.nd, false);
  const CMat Pp = s.P_Uplus.value(), Pm = s.P_Uminus.value();
  return ((IIp * Pm).norm() + (IIm * Pp).norm()) / std::max(s.scale, 1e-300);
}

/// Largest violation of the block membership of each connection component.
inline double membership_defect(const Splitting& s) {
  const Mat Pf = s.P_f.value(), Ph = s.P_fhat.value(), PU = s.P_U.value(), Pp = s.P_perp.value();
  double d = 0;
  for (int x = 0; x < 2; ++x) {
    const Mat b = s.beta[x].value(), bh = s.betahat[x].value(), ii = s.II[x].value(), a = s.A[x].value();
    d = std::max(d, (b - (PU * b * Pf + Ph * b * PU)).norm());
    d = std::max(d, (bh - (PU * bh * Ph + Pf * bh * PU)).norm());
    d = std::max(d, (ii - (Pp * ii * PU + PU * ii * Pp)).norm());
    d = std::max(d, (a - (Pp * a * Ph + Pf * a * Pp)).norm());
    const Mat G = s.space.gram();
    for (const Mat* m : {&b, &bh, &ii, &a}) d = std::max(d, (m->transpose() * G + G * *m).norm());
  }
  return d / std::max(s.scale, 1e-300);
}

}  // namespace lightcone
