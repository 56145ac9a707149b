#pragma once

// Self-verification suites: linear algebra identities, jets against finite
// differences, Gauss-Codazzi-Ricci residuals, equivariance under the
// conformal group and cross-route agreement of the quartic and its divergence.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/analysis.hpp"

namespace lightcone {

struct Check {
  std::string name;
  double value = 0;
  double tolerance = 0;
  bool greater = false;  // pass when value > tolerance instead of value < tolerance
  bool pass = false;
};

inline Check below(std::string name, double value, double tol) {
  return {std::move(name), value, tol, false, value < tol};
}
inline Check above(std::string name, double value, double tol) {
  return {std::move(name), value, tol, true, value > tol};
}
inline Check holds(std::string name, bool ok) { return {std::move(name), ok ? 0.0 : 1.0, 0.5, false, ok}; }

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return !checks.empty();
  }
  void add(Check c) { checks.push_back(std::move(c)); }
};

inline nlohmann::json to_json(const SuiteResult& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.checks)
    arr.push_back({{"name", c.name},
                   {"value", c.value},
                   {"tolerance", c.tolerance},
                   {"relation", c.greater ? ">" : "<"},
                   {"pass", c.pass}});
  return {{"suite", r.suite}, {"pass", r.pass()}, {"checks", arr}};
}

/// Relative difference with a floor for quantities expected to vanish.
inline double rel_diff(cplx a, cplx b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor, 1e-300});
}

/// Random element of O(p+1,q+1): rotations in each definite block and boosts with |phi| < 1.
inline Mat random_lorentz(const AmbientSpace& space, std::mt19937_64& rng, int boosts = 2) {
  const int n = space.dim(), p = space.p_plus();
  std::uniform_real_distribution<double> angle(-M_PI, M_PI), rap(-0.9, 0.9);
  Mat T = Mat::Identity(n, n);
  auto apply = [&](int i, int j, double c, double s, bool hyperbolic) {
    Mat g = Mat::Identity(n, n);
    g(i, i) = c;
    g(j, j) = c;
    g(i, j) = hyperbolic ? s : -s;
    g(j, i) = s;
    T = g * T;
  };
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j) {
      const double a = angle(rng);
      apply(i, j, std::cos(a), std::sin(a), false);
    }
  for (int i = p; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double a = angle(rng);
      apply(i, j, std::cos(a), std::sin(a), false);
    }
  std::uniform_int_distribution<int> pos(0, p - 1), neg(p, n - 1);
  for (int b = 0; b < boosts; ++b) {
    const double f = rap(rng);
    apply(pos(rng), neg(rng), std::cosh(f), std::sinh(f), true);
  }
  return T;
}

/// Default analysis config for a catalog surface in its preferred mode.
inline AnalysisConfig catalog_config(const std::string& name, int n, unsigned threads = 0) {
  AnalysisConfig c;
  c.surface = catalog_surface(name);
  c.nu = c.nv = n;
  c.threads = threads;
  if (!c.surface.mode.empty()) c.point.mode = weyl_mode_from(c.surface.mode);
  return c;
}

// ---------------------------------------------------------------- linalg

inline SuiteResult suite_linalg(std::uint64_t seed) {
  SuiteResult r{"linalg", {}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double skew = 0, gram = 0, jacobi = 0, invariance = 0, apply = 0, lorentz = 0, span = 0;
  bool signature_ok = true;
  for (const auto& [p, q] : std::vector<std::pair<int, int>>{{4, 1}, {3, 2}, {5, 1}}) {
    const AmbientSpace space(p, q);
    const int n = space.dim();
    const Mat G = space.gram();
    auto rv = [&] {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = nd(rng);
      return x;
    };
    for (int t = 0; t < 20; ++t) {
      const Vec a = rv(), b = rv(), c = rv(), d = rv();
      const Mat ab = wedge_matrix(space, a, b), cd = wedge_matrix(space, c, d);
      const Mat x = wedge_matrix(space, rv(), rv()), y = wedge_matrix(space, rv(), rv()),
                z = wedge_matrix(space, rv(), rv());
      skew = std::max(skew, (G * ab + ab.transpose() * G).norm() / ab.norm());
      const double det = space.inner(a, c) * space.inner(b, d) - space.inner(a, d) * space.inner(b, c);
      gram = std::max(gram, std::abs(pairing(ab, cd) - det) / std::max(1.0, std::abs(det)));
      const Mat jac = commutator(x, commutator(y, z)) + commutator(y, commutator(z, x)) +
                      commutator(z, commutator(x, y));
      jacobi = std::max(jacobi, jac.norm() / (x.norm() * y.norm() * z.norm()));
      invariance = std::max(invariance, std::abs(pairing(commutator(x, y), z) - pairing(x, commutator(y, z))) /
                                            (x.norm() * y.norm() * z.norm()));
      apply = std::max(apply, (ab * c - wedge_apply(space, a, b, c)).norm() / (ab.norm() * c.norm()));
      const Mat T = random_lorentz(space, rng);
      lorentz = std::max(lorentz, (T.transpose() * G * T - G).norm() / T.squaredNorm());
      Eigen::MatrixXd B(n, 3);
      B << a, b, a + 2 * b;
      const Eigen::MatrixXd S = orthonormal_span(B);
      span = std::max(span, S.cols() == 2 ? max_principal_angle(S, B.leftCols(2)) : 1.0);
    }
    const Signature sig = signature_of_gram(G);
    signature_ok = signature_ok && sig.positive == p && sig.negative == q && sig.nullity == 0;
  }
  r.add(below("wedge is skew for the metric", skew, 1e-12));
  r.add(below("pairing of wedges is the Gram determinant", gram, 1e-12));
  r.add(below("Jacobi identity", jacobi, 1e-12));
  r.add(below("ad-invariance of the pairing", invariance, 1e-12));
  r.add(below("wedge matrix matches wedge action", apply, 1e-12));
  r.add(below("random transforms preserve the metric", lorentz, 1e-12));
  r.add(below("orthonormal span of dependent columns", span, 1e-10));
  r.add(holds("metric signature", signature_ok));
  return r;
}

// ---------------------------------------------------------------- jets

struct JetFdStats {
  double first = 0;
  double second = 0;
  int points = 0;
};

/// Jets of catalog lifts against central differences at random interior points.
inline JetFdStats jets_vs_fd(std::uint64_t seed, int points = 100) {
  std::mt19937_64 rng(seed);
  const auto& entries = catalog_entries();
  std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  JetFdStats st;
  const double h1 = 1e-5, h2 = 1e-4;
  for (int k = 0; k < points; ++k) {
    const SurfaceModel m(catalog_surface(entries[pick(rng)].name));
    const auto& d = m.spec().domain;
    const double u = d[0][0] + unit(rng) * (d[0][1] - d[0][0]);
    const double v = d[1][0] + unit(rng) * (d[1][1] - d[1][0]);
    const VecJet F = m.lift(u, v, 2);
    auto f = [&](double a, double b) { return m.lift_value(a, b); };
    const Vec Fu = (f(u + h1, v) - f(u - h1, v)) / (2 * h1);
    const Vec Fv = (f(u, v + h1) - f(u, v - h1)) / (2 * h1);
    const double n1 = std::max(F.partial(1, 0).norm(), F.partial(0, 1).norm());
    st.first = std::max(st.first, std::max((Fu - F.partial(1, 0)).norm(), (Fv - F.partial(0, 1)).norm()) / n1);
    const Vec c = f(u, v);
    const Vec Fuu = (f(u + h2, v) - 2 * c + f(u - h2, v)) / (h2 * h2);
    const Vec Fvv = (f(u, v + h2) - 2 * c + f(u, v - h2)) / (h2 * h2);
    const Vec Fuv = (f(u + h2, v + h2) - f(u + h2, v - h2) - f(u - h2, v + h2) + f(u - h2, v - h2)) / (4 * h2 * h2);
    const double n2 = std::max({F.partial(2, 0).norm(), F.partial(1, 1).norm(), F.partial(0, 2).norm()});
    st.second = std::max(st.second, std::max({(Fuu - F.partial(2, 0)).norm(), (Fvv - F.partial(0, 2)).norm(),
                                              (Fuv - F.partial(1, 1)).norm()}) /
                                        n2);
    ++st.points;
  }
  return st;
}

inline SuiteResult suite_jets(std::uint64_t seed) {
  SuiteResult r{"jets", {}};
  const JetFdStats st = jets_vs_fd(seed);
  r.add(below("first partials against central differences", st.first, 1e-8));
  r.add(below("second partials against central differences", st.second, 1e-6));

  // Algebra: reciprocal, composition and the product rule at a fixed point.
  const int K = 5;
  const ScalarJet x = variable_u(K, 0.3, 0.2), y = variable_v(K, 0.3, 0.2);
  const ScalarJet c1 = ScalarJet::constant(K, 1.0, 0.3, 0.2);
  const ScalarJet f = elementary(x * y + x, Elementary::exp);
  const ScalarJet one = f * reciprocal(f);
  double recip = std::abs(one(0, 0) - 1);
  for (int i = 0; i <= K; ++i)
    for (int j = 0; i + j <= K; ++j)
      if (i + j > 0) recip = std::max(recip, std::abs(one(i, j)));
  r.add(below("f * (1/f) = 1 through order 5", recip, 1e-12));
  const ScalarJet g = elementary(x, Elementary::sin) * elementary(y, Elementary::cos);
  const ScalarJet lhs = (f * g).du(), rhs = f.du() * g.truncated(K - 1) + f.truncated(K - 1) * g.du();
  double leib = 0;
  for (int i = 0; i < K; ++i)
    for (int j = 0; i + j < K; ++j) leib = std::max(leib, std::abs(lhs(i, j) - rhs(i, j)));
  r.add(below("product rule", leib, 1e-12));
  const ScalarJet sq = elementary(elementary(x * x + c1, Elementary::sqrt), Elementary::pow_const, 2.0);
  double pw = 0;
  const ScalarJet ref = x * x + c1;
  for (int i = 0; i <= K; ++i)
    for (int j = 0; i + j <= K; ++j) pw = std::max(pw, std::abs(sq(i, j) - ref(i, j)));
  r.add(below("sqrt then square is the identity", pw, 1e-12));
  return r;
}

// ---------------------------------------------------------------- gcr

/// GCR residual after adding a constant bivector of relative size delta to beta_u.
inline double gcr_after_perturbation(const SurfaceModel& model, double u, double v, WeylMode mode, double delta) {
  const AmbientSpace& space = model.space();
  const VecJet F = model.lift(u, v, 5);
  const NullDirections nd = null_frame(space, F, model.epsilon()).nd;
  const CongruenceFrame cf = central_sphere_congruence(space, F, nd);
  VecJet Fhat = mode == WeylMode::envelope ? *second_envelope(cf).Fhat : spaceform_weyl(cf, model.gauge()->q);
  Splitting s = weyl_split(cf, Fhat);
  const int n = space.dim();
  Vec a = Vec::Zero(n), b = Vec::Zero(n);
  a(0) = 1;
  b(n - 1) = 1;
  const Mat xi = wedge_matrix(space, a, b);
  s.beta.u = s.beta.u + MatJet::constant(s.beta.u.order(), Mat(delta * s.scale * xi), u, v);
  return gcr_residuals(s).max_relative();
}

inline SuiteResult suite_gcr(std::uint64_t /*seed*/, unsigned threads = 0) {
  SuiteResult r{"gcr", {}};
  for (const auto& e : catalog_entries()) {
    const AnalysisResult a = analyze(catalog_config(e.name, 32, threads));
    double sup = 0;
    int count = 0;
    for (const auto& s : a.samples)
      if (s.ok && s.gcr_available) {
        sup = std::max(sup, s.gcr.max_relative());
        ++count;
      }
    r.add(below(e.name + " GCR residuals / scale^2", count == static_cast<int>(a.samples.size()) ? sup : 1.0, 1e-6));
  }
  const SurfaceModel m(catalog_surface("cmc_cylinder"));
  r.add(above("perturbed beta trips the GCR residuals", gcr_after_perturbation(m, 0.7, 0.2, WeylMode::spaceform, 1e-2),
              1e-4));
  return r;
}

// ---------------------------------------------------------------- equivariance

struct EquivarianceStats {
  double scalar = 0;     // worst relative change of a scalar invariant
  bool verdicts = true;  // pointwise and surface verdicts, Voss flag
  int transforms = 0;
};

namespace detail {

inline void compare_runs(const AnalysisResult& a, const AnalysisResult& b, EquivarianceStats& st, bool full) {
  st.verdicts = st.verdicts && a.verdict == b.verdict && a.voss == b.voss;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    const auto &x = a.samples[k], &y = b.samples[k];
    if (x.ok != y.ok || x.split != y.split || x.verdict != y.verdict) {
      st.verdicts = false;
      continue;
    }
    if (!x.ok) continue;
    const double s2 = x.scale * x.scale, s4 = s2 * s2;
    st.scalar = std::max({st.scalar, rel_diff(x.q20, y.q20, 1e-6 * s2), rel_diff(x.quartic40_def, y.quartic40_def, 1e-6 * s4)});
    if (!full) continue;
    st.scalar = std::max({st.scalar, rel_diff(x.q02, y.q02, 1e-6 * s2), rel_diff(x.II_norm2, y.II_norm2, 1e-6 * s2),
                          rel_diff(x.quartic04_def, y.quartic04_def, 1e-6 * s4),
                          rel_diff(x.quartic40_alg, y.quartic40_alg, 1e-6 * s4)});
  }
  if (full && a.recovery && b.recovery) {
    st.scalar = std::max({st.scalar, rel_diff(a.recovery->H, b.recovery->H, 1e-6),
                          rel_diff(a.recovery->kappa, b.recovery->kappa, 1e-6),
                          rel_diff(a.recovery->mu, b.recovery->mu, 1e-6)});
  } else if (full && (a.recovery.has_value() != b.recovery.has_value())) {
    st.verdicts = false;
  }
}

}  // namespace detail

/// Random conformal transforms applied to every catalog surface.
inline EquivarianceStats equivariance_transforms(std::uint64_t seed, int count = 20, int grid = 8, unsigned threads = 0) {
  std::mt19937_64 rng(seed);
  EquivarianceStats st;
  for (const auto& e : catalog_entries()) {
    AnalysisConfig base = catalog_config(e.name, grid, threads);
    const AnalysisResult ref = analyze(base);
    const AmbientSpace space(base.surface.p_plus, base.surface.q_plus);
    for (int t = 0; t < count; ++t) {
      AnalysisConfig c = base;
      c.point.transform = random_lorentz(space, rng);
      detail::compare_runs(ref, analyze(c), st, true);
    }
  }
  st.transforms = count;
  return st;
}

/// Lift rescaling F -> exp(0.1 sin u) F on every catalog surface.
inline EquivarianceStats equivariance_rescale(int grid = 8, unsigned threads = 0) {
  EquivarianceStats st;
  for (const auto& e : catalog_entries()) {
    AnalysisConfig base = catalog_config(e.name, grid, threads);
    const AnalysisResult ref = analyze(base);
    AnalysisConfig c = base;
    c.surface.lift_scale = "0.1*sin(u)";
    detail::compare_runs(ref, analyze(c), st, false);
  }
  return st;
}

inline SuiteResult suite_equivariance(std::uint64_t seed, unsigned threads = 0) {
  SuiteResult r{"equivariance", {}};
  const EquivarianceStats t = equivariance_transforms(seed, 20, 8, threads);
  r.add(below("scalar invariants under 20 random transforms", t.scalar, 1e-6));
  r.add(holds("verdicts under random transforms", t.verdicts));
  const EquivarianceStats s = equivariance_rescale(8, threads);
  r.add(below("q20 and quartic40 under lift rescaling", s.scalar, 1e-6));
  r.add(holds("verdicts under lift rescaling", s.verdicts));
  return r;
}

// ---------------------------------------------------------------- cross route

struct CrossRouteStats {
  double quartic = 0;
  double divergence = 0;
};

/// Definition against algebraic quartic (non-umbilic points), algebraic
/// against finite-difference divergence (interior points).
inline CrossRouteStats cross_route(int grid = 32, unsigned threads = 0) {
  CrossRouteStats st;
  for (const auto& e : catalog_entries()) {
    const AnalysisResult a = analyze(catalog_config(e.name, grid, threads));
    for (const auto& s : a.samples) {
      if (!s.ok || !s.split || s.verdict == Verdict::umbilic) continue;
      const double s4 = std::pow(s.scale, 4), s5 = s4 * s.scale;
      st.quartic = std::max({st.quartic, rel_diff(s.quartic40_def, s.quartic40_alg, 1e-6 * s4),
                             rel_diff(s.quartic04_def, s.quartic04_alg, 1e-6 * s4)});
      if (s.d40_fd && s.gcr_available)
        st.divergence = std::max({st.divergence, rel_diff(s.d40_alg, *s.d40_fd, 1e-6 * s5), rel_diff(s.d04_alg, *s.d04_fd, 1e-6 * s5)});
    }
  }
  return st;
}

/// Cylinder over a unit-speed catenary in R^3: neither Willmore nor CMC, so the
/// quartic has nonzero divergence.
inline SurfaceSpec catenary_cylinder() {
  SurfaceSpec s;
  s.name = "catenary_cylinder";
  s.p_plus = 4;
  s.q_plus = 1;
  s.components = {"u", "log(v + sqrt(1 + v^2))", "sqrt(1 + v^2)"};
  s.domain = {{{-1.0, 1.0}, {-1.0, 1.0}}};
  s.mode = "envelope";
  return s;
}

/// Cross-route agreement on the catenary cylinder; the divergence is compared
/// where the fourth-order stencil applies.
inline CrossRouteStats generic_cross_route(int grid = 64, unsigned threads = 0) {
  AnalysisConfig c;
  c.surface = catenary_cylinder();
  c.nu = c.nv = grid;
  c.threads = threads;
  const AnalysisResult a = analyze(c);
  CrossRouteStats st;
  for (const auto& s : a.samples) {
    if (!s.ok || !s.split) continue;
    const double s4 = std::pow(s.scale, 4), s5 = s4 * s.scale;
    st.quartic = std::max({st.quartic, rel_diff(s.quartic40_def, s.quartic40_alg, 1e-6 * s4),
                           rel_diff(s.quartic04_def, s.quartic04_alg, 1e-6 * s4)});
    const bool deep = s.i >= 2 && s.j >= 2 && s.i <= grid - 3 && s.j <= grid - 3;
    if (deep && s.d40_fd && s.gcr_available)
      st.divergence = std::max({st.divergence, rel_diff(s.d40_alg, *s.d40_fd, 1e-6 * s5), rel_diff(s.d04_alg, *s.d04_fd, 1e-6 * s5)});
  }
  return st;
}

inline SuiteResult suite_cross_route(std::uint64_t /*seed*/, unsigned threads = 0) {
  SuiteResult r{"cross_route", {}};
  const CrossRouteStats st = cross_route(32, threads);
  r.add(below("quartic: definition against algebraic route", st.quartic, 1e-6));
  r.add(below("quartic divergence: algebraic against finite differences", st.divergence, 1e-4));
  const CrossRouteStats g = generic_cross_route(64, threads);
  r.add(below("catenary cylinder quartic: definition against algebraic", g.quartic, 1e-6));
  r.add(below("catenary cylinder divergence: algebraic against finite differences", g.divergence, 1e-4));
  return r;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"linalg", "jets", "gcr", "equivariance", "cross_route"};
  return names;
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed, unsigned threads = 0) {
  if (name == "linalg") return suite_linalg(seed);
  if (name == "jets") return suite_jets(seed);
  if (name == "gcr") return suite_gcr(seed, threads);
  if (name == "equivariance") return suite_equivariance(seed, threads);
  if (name == "cross_route") return suite_cross_route(seed, threads);
  throw GeometryError(ErrorKind::invalid_spec, "unknown suite '" + name + "'");
}

}  // namespace lightcone
