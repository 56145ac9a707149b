#pragma once

// Space form slices, the projection pi, and recovery of the space form
// vector, mean curvature and curvature of the ambient space form.

#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "lightcone/invariants.hpp"

namespace lightcone {

/// pi(y) = y + (y,q) o + (y,o) q for a null gauge pair with (o,q) = -1.
inline Vec project_pi(const AmbientSpace& space, const Vec& y, const SpaceformGauge& g) {
  if (!g.o) throw GeometryError(ErrorKind::invalid_spec, "projection needs the point o of the gauge");
  const double qq = space.inner(g.q, g.q);
  const double scale = std::max(1.0, g.q.squaredNorm());
  if (std::abs(qq) > 1e-12 * scale)
    throw GeometryError(ErrorKind::not_null, "projection is defined for a null space form vector");
  const Vec& o = *g.o;
  return y + space.inner(y, g.q) * o + space.inner(y, o) * g.q;
}

/// Least-squares mu in a = mu b over all pairs (Euclidean dot products).
inline double fit_mu(const std::vector<std::pair<Vec, Vec>>& pairs) {
  double num = 0, den = 0;
  for (const auto& [a, b] : pairs) {
    num += a.dot(b);
    den += b.dot(b);
  }
  if (!(den > 0)) throw GeometryError(ErrorKind::degenerate_subspace, "no data to fit mu");
  return num / den;
}

inline double mu_residual(const std::vector<std::pair<Vec, Vec>>& pairs, double mu) {
  double r = 0;
  for (const auto& [a, b] : pairs) r = std::max(r, (a - mu * b).norm());
  return r;
}

struct SpaceformReport {
  Vec q_recovered;
  double constancy = 0;  // sup of |dq| by central differences, relative to |q|
  double mu = 0;
  double mu_stddev = 0;
  double mu_residual = 0;  // sup |beta0 Fhat - mu beta F|
  double H = 0;
  double kappa = 0;
  double NN = 1;                     // (N,N) after normalization
  std::optional<double> H_classical;  // H rescaled to the unit space form or the Euclidean gauge
  std::string H_classical_note;
  double identity = 0;  // |H^2 + kappa + 2 mu|
  std::string branch = "cmc_spaceform";
};

inline constexpr double kConstancyTolerance = 1e-6;

/// Recovers the space form of a CMC surface from samples of a harmonic congruence.
/// `hu`, `hv` are grid spacings; samples carry their grid indices.
inline SpaceformReport recover_spaceform_data(const AmbientSpace& space,
                                              const std::vector<const InvariantSample*>& pts,
                                              const std::optional<SpaceformGauge>& gauge, double hu,
                                              double hv) {
  if (pts.empty()) throw GeometryError(ErrorKind::branch_mismatch, "no samples for space form recovery");
  for (const auto* p : pts)
    if (p->verdict != Verdict::cmc_spaceform || !p->recovery)
      throw GeometryError(ErrorKind::branch_mismatch,
                          "space form recovery needs the cmc_spaceform branch at every sample");

  struct Local {
    Vec F, Fhat, N;
    double eN;
  };
  std::vector<Local> loc;
  std::vector<std::pair<Vec, Vec>> pairs;
  std::vector<double> mus;
  for (const auto* p : pts) {
    const RecoveryData& rd = *p->recovery;
    const double nn = rd.NN;
    if (std::abs(nn) < 1e-8 * rd.N.squaredNorm())
      throw GeometryError(ErrorKind::branch_mismatch, "normal line is null: lightcone branch");
    const double eN = nn > 0 ? 1.0 : -1.0;
    const Vec N = rd.N / std::sqrt(std::abs(nn));
    // Scale Fhat so that II N = -(N,N) Q Fhat.
    double num = 0, den = 0;
    for (int x = 0; x < 2; ++x) {
      const Vec a = rd.IIN[x] / std::sqrt(std::abs(nn));
      const Vec b = -eN * rd.QFhat[x];
      num += a.dot(b);
      den += b.dot(b);
    }
    if (!(den > 1e-24)) throw GeometryError(ErrorKind::branch_mismatch, "Q vanishes: not the CMC branch");
    const double s = num / den;
    Local l{rd.F / s, rd.Fhat * s, N, eN};
    std::vector<std::pair<Vec, Vec>> mine;
    for (int x = 0; x < 2; ++x) mine.emplace_back(rd.beta0Fhat[x] * s, rd.betaF[x] / s);
    mus.push_back(fit_mu(mine));
    pairs.insert(pairs.end(), mine.begin(), mine.end());
    loc.push_back(l);
  }
  SpaceformReport rep;
  rep.mu = fit_mu(pairs);
  rep.mu_residual = mu_residual(pairs, rep.mu);
  double var = 0;
  for (double m : mus) var += (m - rep.mu) * (m - rep.mu);
  rep.mu_stddev = std::sqrt(var / static_cast<double>(mus.size()));

  std::vector<Vec> qs;
  for (const auto& l : loc) qs.push_back(l.Fhat - rep.mu * l.F - l.eN * l.N);
  for (auto& q : qs)
    if (q.dot(qs[0]) < 0) q = -q;
  Vec mean = Vec::Zero(space.dim());
  for (const auto& q : qs) mean += q;
  mean /= static_cast<double>(qs.size());
  rep.q_recovered = mean;
  rep.NN = loc[0].eN;

  std::map<std::pair<int, int>, std::size_t> at;
  for (std::size_t k = 0; k < pts.size(); ++k) at[{pts[k]->i, pts[k]->j}] = k;
  double sup = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const int i = pts[k]->i, j = pts[k]->j;
    auto get = [&](int a, int b) -> const Vec* {
      auto it = at.find({a, b});
      return it == at.end() ? nullptr : &qs[it->second];
    };
    const Vec *ip = get(i + 1, j), *im = get(i - 1, j), *jp = get(i, j + 1), *jm = get(i, j - 1);
    if (ip && im) sup = std::max(sup, ((*ip - *im) / (2 * hu)).norm());
    if (jp && jm) sup = std::max(sup, ((*jp - *jm) / (2 * hv)).norm());
  }
  rep.constancy = sup / std::max(mean.norm(), 1e-300);

  // Lines of N agree with the aligned q up to sign; H = -(N, q) at every point.
  double H = 0;
  for (std::size_t k = 0; k < loc.size(); ++k) {
    const Vec N = (qs[k].dot(loc[k].Fhat - rep.mu * loc[k].F - loc[k].eN * loc[k].N) > 0) ? loc[k].N : Vec(-loc[k].N);
    H += -space.inner(N, mean);
  }
  rep.H = H / static_cast<double>(loc.size());
  rep.kappa = -space.inner(mean, mean);
  rep.identity = std::abs(rep.H * rep.H + rep.kappa + 2 * rep.mu);
  if (std::abs(rep.kappa) > 1e-9) {
    rep.H_classical = rep.H / std::sqrt(std::abs(rep.kappa));
    rep.H_classical_note = "H / sqrt(|kappa|): mean curvature in the space form of unit curvature";
  } else if (gauge && gauge->o) {
    const double c = -space.inner(mean, *gauge->o);
    if (std::abs(c) > 1e-12) {
      rep.H_classical = rep.H / std::abs(c);
      rep.H_classical_note = "H / |(q, o)|: mean curvature in the Euclidean gauge slice";
    }
  }
  if (rep.constancy > kConstancyTolerance)
    throw GeometryError(ErrorKind::branch_mismatch, "not a space-form CMC configuration");
  return rep;
}

struct LightconeReport {
  double mu = 0;
  double H_l = 0;
  double mu_stddev = 0;
};

/// H_l = -mu/2 from beta0 Fhat = mu beta F pairs.
inline LightconeReport lightcone_from_pairs(const std::vector<std::pair<Vec, Vec>>& pairs) {
  LightconeReport r;
  r.mu = fit_mu(pairs);
  r.H_l = -r.mu / 2;
  double var = 0;
  for (const auto& [a, b] : pairs) {
    const double bb = b.dot(b);
    if (bb > 0) {
      const double m = a.dot(b) / bb;
      var += (m - r.mu) * (m - r.mu);
    }
  }
  r.mu_stddev = std::sqrt(var / static_cast<double>(pairs.size()));
  return r;
}

/// Lightcone mean curvature of samples in the lightcone_cmc branch. The lift
/// is normalized against the gauge, (F, q) = -1, and (F, Fhat) = -1.
inline LightconeReport lightcone_mean_curvature(const AmbientSpace& space,
                                                const std::vector<const InvariantSample*>& pts,
                                                const SpaceformGauge& gauge) {
  if (pts.empty()) throw GeometryError(ErrorKind::branch_mismatch, "no samples");
  std::vector<std::pair<Vec, Vec>> pairs;
  for (const auto* p : pts) {
    if (p->verdict != Verdict::lightcone_cmc || !p->recovery)
      throw GeometryError(ErrorKind::branch_mismatch, "lightcone mean curvature needs the lightcone_cmc branch");
    const RecoveryData& rd = *p->recovery;
    const double c = -space.inner(rd.F, gauge.q);
    for (int x = 0; x < 2; ++x) pairs.emplace_back(rd.beta0Fhat[x] * c, rd.betaF[x] / c);
  }
  LightconeReport r = lightcone_from_pairs(pairs);
  if (r.mu_stddev > 1e-6) throw GeometryError(ErrorKind::branch_mismatch, "lightcone mean curvature is not constant");
  return r;
}

}  // namespace lightcone
