#pragma once

// Pointwise invariants, residuals and the classification of a sample.

#include <optional>
#include <string>
#include <vector>

#include "lightcone/sphere_congruence.hpp"

namespace lightcone {

enum class WeylMode { envelope, spaceform };

inline std::string to_string(WeylMode m) { return m == WeylMode::envelope ? "envelope" : "spaceform"; }

inline WeylMode weyl_mode_from(const std::string& s) {
  if (s == "envelope") return WeylMode::envelope;
  if (s == "spaceform" || s == "spaceform_normal") return WeylMode::spaceform;
  throw GeometryError(ErrorKind::invalid_spec, "unknown mode '" + s + "'");
}

struct Thresholds {
  double tau_zero = 1e-6;      // q, II, isotropy, quartic divergence
  double tau_residual = 1e-6;  // harmonicity and structure residuals
  double margin = 10.0;        // values within this factor of a threshold are indeterminate
};

enum class QType { zero, degenerate, nondegenerate };

inline std::string to_string(QType t) {
  switch (t) {
    case QType::zero: return "zero";
    case QType::degenerate: return "degenerate";
    case QType::nondegenerate: return "nondegenerate";
  }
  return "?";
}

// Sign of the bracket term in the constrained Willmore equation, fixed by
// requiring the residual to vanish on the CMC cylinder.
inline constexpr double kConstrainedWillmoreSign = 1.0;

/// Data used by the space form recovery at one point.
struct RecoveryData {
  Vec F, Fhat, N;
  double NN = 0;                 // (N,N) before normalization to +-1
  std::array<Vec, 2> IIN, QFhat;  // II_X N and Q_X Fhat, X = u, v
  std::array<Vec, 2> beta0Fhat, betaF;
};

struct InvariantSample {
  double u = 0, v = 0;
  int i = 0, j = 0;
  bool ok = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::internal;
  EnvelopeStatus envelope = EnvelopeStatus::no_envelope;
  bool split = false;  // a splitting was computed
  int w_rank = 0;
  double scale = 0;
  double conformality = 0;

  cplx q20, q02;
  QType q_type = QType::zero;
  cplx quartic40_def, quartic04_def, quartic40_alg, quartic04_alg;
  cplx d40_alg, d04_alg;
  std::optional<cplx> d40_fd, d04_fd;
  double II_norm = 0;
  cplx II_norm2;
  bool superconformal_plus = false, superconformal_minus = false;
  double A_norm = 0, dDQ_norm = 0, dDbeta0_norm = 0, tension_norm = 0;
  double willmore = 0, constrained_willmore = 0;
  GcrResiduals gcr;
  bool gcr_available = false;
  double csc_residual = 0, membership = 0, skew = 0;
  double confUf = 0;
  double bracket_betaII = 0, bracket_betaQ = 0, bracket_IIbeta0 = 0;
  double beta0_norm = 0, Q_norm = 0;
  bool envelope_valid = false;  // A vanishes, so f-hat is a second envelope

  Verdict verdict = Verdict::generic;
  bool voss = false;
  double margin = 0;
  std::optional<RecoveryData> recovery;
  Eigen::MatrixXd W;  // V plus the principal normal line
};

struct PointOptions {
  int order = 5;
  WeylMode mode = WeylMode::envelope;
  CongruenceOptions congruence;
  double weyl_perturbation = 0.0;
  std::optional<Mat> transform;
  double conformality_gate = kConformalityGate;
  bool enforce_gate = true;
};

namespace detail {

/// Top left singular vector of the images of U under II.
inline Vec principal_normal(const Splitting& s) {
  const Mat PU = s.P_U.value();
  const int n = s.space.dim();
  Eigen::MatrixXd m(n, 2 * n);
  m << s.II.u.value() * PU, s.II.v.value() * PU;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU);
  Vec N = svd.matrixU().col(0);
  return sign_normalized(N);
}

}  // namespace detail

/// Evaluates every pointwise quantity at (u, v).
inline InvariantSample sample_point(const SurfaceModel& model, double u, double v,
                                    const PointOptions& opt = {}) {
  InvariantSample out;
  out.u = u;
  out.v = v;
  const AmbientSpace& space = model.space();
  VecJet F = model.lift(u, v, opt.order);
  std::optional<Vec> q;
  if (model.gauge()) q = model.gauge()->q;
  if (opt.transform) {
    F = left_multiply(*opt.transform, F);
    if (q) q = Vec(*opt.transform * *q);
  }
  out.conformality = conformality_check(space, F, model.epsilon());
  const NullFrame nf = null_frame(space, F, model.epsilon(),
                                  opt.enforce_gate ? opt.conformality_gate : 1e300);
  const NullDirections& nd = nf.nd;
  CongruenceFrame cf = central_sphere_congruence(space, F, nd, opt.congruence);
  out.w_rank = cf.w_rank;

  // Definition route of the quartic and the Willmore residuals use V only.
  Form NV;
  {
    const MatJet dPu = cf.P_V.du(), dPv = cf.P_V.dv();
    const int k = dPu.order();
    const MatJet PV = cf.P_V.truncated(k), Pp = cf.P_perp.truncated(k);
    NV.u = Pp * dPu * PV - PV * dPu * Pp;
    NV.v = Pp * dPv * PV - PV * dPv * Pp;
  }
  const CMatJet NVp = NV.jet_on(nd, true), NVm = NV.jet_on(nd, false);
  const CMat DNpp = directional(NVp, nd.plus[0], nd.plus[1]).value();
  const CMat DNmm = directional(NVm, nd.minus[0], nd.minus[1]).value();
  out.quartic40_def = pairing(DNpp, DNpp);
  out.quartic04_def = pairing(DNmm, DNmm);
  const CMat Np = NVp.value(), Nm = NVm.value();
  const CMat DNmp = directional(NVp, nd.minus[0], nd.minus[1]).value() - commutator(Nm, Np);
  const CMat DNpm = directional(NVm, nd.plus[0], nd.plus[1]).value() - commutator(Np, Nm);
  out.willmore = DNmp.norm() + DNpm.norm();

  std::optional<VecJet> Fhat;
  if (opt.mode == WeylMode::envelope) {
    EnvelopeResult env = second_envelope(cf);
    out.envelope = env.status;
    Fhat = env.Fhat;
  } else {
    if (!q) throw GeometryError(ErrorKind::invalid_spec, "space form mode needs a gauge");
    Fhat = spaceform_weyl(cf, *q);
    out.envelope = EnvelopeStatus::found;
  }
  if (Fhat && opt.weyl_perturbation != 0) *Fhat = perturbed_weyl(cf, *Fhat, opt.weyl_perturbation);

  if (!Fhat) {
    out.ok = true;
    out.scale = (NV.u.value().norm() + NV.v.value().norm());
    if (out.scale == 0) out.scale = cf.scale;
    return out;
  }

  const Splitting s = weyl_split(cf, *Fhat);
  out.split = true;
  out.scale = s.scale;
  out.skew = s.skew_defect / std::max(s.scale, 1e-300);
  out.membership = membership_defect(s);
  out.csc_residual = csc_verify(s);

  const CMat bp = s.beta.on(nd, true), bm = s.beta.on(nd, false);
  const CMat Qp = s.Q.on(nd, true), Qm = s.Q.on(nd, false);
  const CMat IIp = s.II.on(nd, true), IIm = s.II.on(nd, false);
  const CMatJet B0p = s.beta0.jet_on(nd, true), B0m = s.beta0.jet_on(nd, false);
  const CMat b0p = B0p.value(), b0m = B0m.value();

  out.q20 = -pairing(bp, Qp);
  out.q02 = -pairing(bm, Qm);
  out.II_norm = s.II.norm();
  out.II_norm2 = pairing(IIp, IIm);
  out.A_norm = s.A.norm();
  out.beta0_norm = s.beta0.norm();
  out.Q_norm = s.Q.norm();
  out.envelope_valid = out.A_norm <= 1e-6 * std::max(s.scale, 1e-300);

  out.quartic40_alg = 2.0 * pairing(commutator(bp, IIp), commutator(b0p, IIp));
  out.quartic04_alg = 2.0 * pairing(commutator(bm, IIm), commutator(b0m, IIm));

  out.bracket_betaII = (commutator(bp, IIm).norm() + commutator(bm, IIp).norm());
  out.bracket_betaQ = (commutator(bp, Qm).norm() + commutator(bm, Qp).norm());
  out.bracket_IIbeta0 = (commutator(IIp, b0m).norm() + commutator(IIm, b0p).norm());

  out.constrained_willmore = (DNmp + kConstrainedWillmoreSign * commutator(Qm, Np)).norm() +
                             (DNpm + kConstrainedWillmoreSign * commutator(Qp, Nm)).norm();

  // Isotropy of II_{Z+-} V in the complexified normal bundle.
  {
    const CVec sp = s.sigma_plus.value().normalized(), sm = s.sigma_minus.value().normalized();
    auto isotropic = [&](const CMat& ii) {
      const CVec a = ii * sp, b = ii * sm;
      const double g = std::max({std::abs(space.inner(a, a)), std::abs(space.inner(a, b)),
                                 std::abs(space.inner(b, b))});
      return g <= 1e-6 * s.scale * s.scale;
    };
    out.superconformal_plus = isotropic(IIp);
    out.superconformal_minus = isotropic(IIm);
  }

  if (s.Gamma.u.order() >= 1) {
    out.gcr = gcr_residuals(s);
    out.gcr_available = true;
    out.dDQ_norm = exterior_covariant(s.Gamma, s.Q).value().norm();
    out.dDbeta0_norm = exterior_covariant(s.Gamma, s.beta0).value().norm();

    // Harmonicity of U^perp: tension of N^U.
    const int n = space.dim();
    const int k = s.P_U.order();
    const MatJet PU = s.P_U, PUp = identity_jet(n, k, u, v) - s.P_U;
    Form NU;
    for (int x = 0; x < 2; ++x) {
      const MatJet dPU = x == 0 ? PU.du() : PU.dv();
      const MatJet a = PU.truncated(k - 1), b = PUp.truncated(k - 1);
      NU[x] = b * dPU * a - a * dPU * b;
    }
    const CMatJet NUp = NU.jet_on(nd, true), NUm = NU.jet_on(nd, false);
    const CMat tp = directional(NUp, nd.minus[0], nd.minus[1]).value() - commutator(NUm.value(), NUp.value());
    const CMat tm = directional(NUm, nd.plus[0], nd.plus[1]).value() - commutator(NUp.value(), NUm.value());
    out.tension_norm = tp.norm() + tm.norm();
    out.confUf = std::abs(pairing(NUp.value(), NUp.value()) + 2.0 * out.q20);

    // Divergence of the quartic, algebraic route.
    const CMat Dbp = covariant(s.Gamma, B0p, nd.minus[0], nd.minus[1]).value();
    const CMat Dbm = covariant(s.Gamma, B0m, nd.plus[0], nd.plus[1]).value();
    out.d40_alg = 2.0 * pairing(commutator(bp, IIp), commutator(Dbp, IIp));
    out.d04_alg = 2.0 * pairing(commutator(bm, IIm), commutator(Dbm, IIm));
  }

  // Recovery data and the W = V + <N> frame.
  {
    RecoveryData rd;
    rd.F = s.F.value();
    rd.Fhat = s.Fhat.value();
    rd.N = detail::principal_normal(s);
    rd.NN = space.inner(rd.N, rd.N);
    for (int x = 0; x < 2; ++x) {
      rd.IIN[x] = s.II[x].value() * rd.N;
      rd.QFhat[x] = s.Q[x].value() * rd.Fhat;
      rd.beta0Fhat[x] = s.beta0[x].value() * rd.Fhat;
      rd.betaF[x] = s.beta[x].value() * rd.F;
    }
    out.recovery = rd;
    Eigen::MatrixXd Vb = orthonormal_span(s.P_V.value());
    if (out.II_norm > 1e-9 * s.scale) {
      out.W.resize(space.dim(), Vb.cols() + 1);
      out.W << Vb, rd.N;
    } else {
      out.W = Vb;  // no normal line at an umbilic point
    }
  }
  out.ok = true;
  return out;
}

/// Normalized decisive quantities and the resulting verdict.
struct Classification {
  Verdict verdict = Verdict::generic;
  bool voss = false;
  double margin = 0;  // smallest log10 distance of a decisive quantity to its threshold
};

inline QType q_type(const InvariantSample& s, double tau) {
  const double s2 = std::max(s.scale * s.scale, 1e-300);
  const bool z20 = std::abs(s.q20) / s2 < tau, z02 = std::abs(s.q02) / s2 < tau;
  if (z20 && z02) return QType::zero;
  if (z20 || z02) return QType::degenerate;
  return QType::nondegenerate;
}

inline Classification classify_point(const InvariantSample& s, const Thresholds& t = {}) {
  Classification c;
  c.margin = 1e300;
  bool band = false;
  auto below = [&](double x, double tau) {
    const double r = std::max(x, 1e-300) / tau;
    c.margin = std::min(c.margin, std::abs(std::log10(r)));
    if (r > 1.0 / t.margin && r < t.margin) band = true;
    return x < tau;
  };
  const double sc = std::max(s.scale, 1e-300);
  if (!s.split) {
    switch (s.envelope) {
      case EnvelopeStatus::umbilic_locus: c.verdict = Verdict::umbilic; break;
      case EnvelopeStatus::quasi_umbilic_candidate: c.verdict = Verdict::quasi_umbilic; break;
      default: c.verdict = Verdict::generic; break;
    }
    c.margin = 0;
    return c;
  }
  if (below(s.II_norm / sc, t.tau_zero)) {
    c.verdict = band ? Verdict::indeterminate : Verdict::umbilic;
    return c;
  }
  if (s.superconformal_plus && s.superconformal_minus) c.verdict = Verdict::superconformal;
  else if (s.superconformal_plus || s.superconformal_minus) c.verdict = Verdict::half_superconformal;
  else if (!s.gcr_available) {
    c.verdict = Verdict::indeterminate;  // jets too short for the harmonicity residuals
  } else {
    const bool harmonic = below(s.A_norm / sc, t.tau_residual) &
                          below(s.dDQ_norm / (sc * sc), t.tau_residual) &
                          below(s.dDbeta0_norm / (sc * sc), t.tau_residual) &
                          below(s.tension_norm / (sc * sc), t.tau_residual);
    if (!harmonic) {
      c.verdict = Verdict::generic;
    } else {
      const bool z20 = below(std::abs(s.q20) / (sc * sc), t.tau_zero);
      const bool z02 = below(std::abs(s.q02) / (sc * sc), t.tau_zero);
      if (z20 && z02) c.verdict = Verdict::s_willmore_branch;
      else if (z20 || z02) c.verdict = Verdict::quasi_umbilic;
      else if (!below(std::abs(s.II_norm2) / (sc * sc), t.tau_zero)) c.verdict = Verdict::cmc_spaceform;
      else c.verdict = Verdict::lightcone_cmc;
    }
  }
  if (s.envelope_valid && s.gcr_available) {
    const double s5 = std::pow(sc, 5);
    c.voss = below(std::abs(s.d40_alg) / s5, t.tau_zero) & below(std::abs(s.d04_alg) / s5, t.tau_zero);
  }
  if (band) c.verdict = Verdict::indeterminate;
  return c;
}

}  // namespace lightcone
