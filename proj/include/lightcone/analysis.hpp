#pragma once

// Grid evaluation: per-point invariants on a uniform grid, finite-difference
// divergence of the quartic, aggregation, verdicts and JSON/CSV reports.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "lightcone/spaceform.hpp"

namespace lightcone {

inline constexpr const char* kToolVersion = "1.0.0";

struct AnalysisConfig {
  SurfaceSpec surface;
  int nu = 32;
  int nv = 32;
  PointOptions point;
  Thresholds thresholds;
  unsigned threads = 0;   // 0: GEO_THREADS or hardware concurrency
  bool keep_samples = true;
};

struct Expectation {
  std::optional<Verdict> verdict;
  std::optional<bool> voss;
};

inline Verdict verdict_from(const std::string& name) {
  for (int k = 0; k <= static_cast<int>(Verdict::indeterminate); ++k)
    if (to_string(static_cast<Verdict>(k)) == name) return static_cast<Verdict>(k);
  throw GeometryError(ErrorKind::invalid_spec, "unknown verdict '" + name + "'");
}

inline constexpr int kMinGrid = 8;

/// Grid size, order and mode checks shared by config files and command lines.
inline void validate(const AnalysisConfig& c) {
  if (c.nu < kMinGrid || c.nv < kMinGrid)
    throw GeometryError(ErrorKind::invalid_spec, "grid must be at least 8x8");
  if (c.point.order < 3 || c.point.order > kMaxJetOrder)
    throw GeometryError(ErrorKind::invalid_spec,
                        "jet order must be between 3 and " + std::to_string(kMaxJetOrder));
}

/// Analysis config: {"surface": spec or catalog reference, "grid": [nu, nv],
/// "order": K, "mode": ..., "thresholds": {...}, "expect": {...}}; a bare
/// surface description is accepted as well.
inline AnalysisConfig config_from_json(const nlohmann::json& j, Expectation* expect = nullptr) {
  if (!j.is_object()) throw GeometryError(ErrorKind::invalid_spec, "config must be a JSON object");
  AnalysisConfig c;
  try {
    c.surface = spec_from_json(j.contains("surface") ? j.at("surface") : j);
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      c.nu = g.at(0).get<int>();
      c.nv = g.at(1).get<int>();
    }
    c.point.order = j.value("order", c.point.order);
    std::string mode = j.value("mode", c.surface.mode);
    if (!mode.empty()) c.point.mode = weyl_mode_from(mode);
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      c.thresholds.tau_zero = t.value("tau_zero", c.thresholds.tau_zero);
      c.thresholds.tau_residual = t.value("tau_residual", c.thresholds.tau_residual);
      c.thresholds.margin = t.value("margin", c.thresholds.margin);
    }
    if (expect && j.contains("expect")) {
      const auto& e = j.at("expect");
      if (e.contains("verdict")) expect->verdict = verdict_from(e.at("verdict").get<std::string>());
      if (e.contains("voss")) expect->voss = e.at("voss").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(ErrorKind::invalid_spec, std::string("malformed config: ") + e.what());
  }
  return c;
}

/// Worker count from GEO_THREADS, else the hardware concurrency.
inline unsigned worker_count(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GEO_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(k) for k in [0, n) on a pool of workers.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& f) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t k = 0; k < n; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < n; k = next++) f(k);
    });
  for (auto& t : pool) t.join();
}

struct Aggregate {
  double sup = 0;
  double rms = 0;
  int count = 0;
};

struct AnalysisResult {
  AnalysisConfig config;
  double hu = 0, hv = 0;
  std::vector<InvariantSample> samples;  // row-major, index i * nv + j
  std::map<std::string, Aggregate> aggregates;
  std::map<std::string, int> histogram;
  Verdict verdict = Verdict::indeterminate;
  bool voss = false;
  std::optional<SpaceformReport> recovery;
  std::optional<LightconeReport> lightcone;
  std::string recovery_error;
  double subspace_angle = 0;  // max angle of V + <N> against a reference point
  int failed_points = 0;
  double wall_time = 0;

  const InvariantSample& at(int i, int j) const { return samples[static_cast<std::size_t>(i * config.nv + j)]; }
  bool interior(int i, int j) const {
    const bool iu = config.nu < 3 || (i > 0 && i < config.nu - 1);
    const bool iv = config.nv < 3 || (j > 0 && j < config.nv - 1);
    return iu && iv;
  }
  /// Interior points that evaluated and split.
  std::vector<const InvariantSample*> interior_split() const {
    std::vector<const InvariantSample*> out;
    for (const auto& s : samples)
      if (s.ok && s.split && interior(s.i, s.j)) out.push_back(&s);
    return out;
  }
};

namespace detail {

inline double grid_coord(double a, double b, int n, int k) {
  return n < 2 ? 0.5 * (a + b) : a + (b - a) * k / (n - 1);
}

inline void add(std::map<std::string, Aggregate>& m, const std::string& key, double x) {
  Aggregate& a = m[key];
  a.sup = std::max(a.sup, x);
  a.rms += x * x;
  ++a.count;
}

inline SpaceformGauge transformed(const SpaceformGauge& g, const std::optional<Mat>& T) {
  if (!T) return g;
  SpaceformGauge out;
  out.q = *T * g.q;
  if (g.o) out.o = Vec(*T * *g.o);
  return out;
}

}  // namespace detail

/// Finite-difference divergence of the quartic along Z-bar at interior points:
/// fourth-order central stencil where two neighbours exist, second order next to the boundary.
inline void fd_divergence(AnalysisResult& r, const NullDirections& nd) {
  const int nu = r.config.nu, nv = r.config.nv;
  if (nu < 3 || nv < 3) return;
  // Derivative of field g along one axis; k is the index, n the extent, at(m) the sample at offset m.
  auto deriv = [](int k, int n, double h, auto&& at, auto&& g, bool& ok) -> cplx {
    for (int m : {-1, 1}) ok = ok && at(m).ok;
    if (k >= 2 && k <= n - 3) {
      bool wide = true;
      for (int m : {-2, 2}) wide = wide && at(m).ok;
      if (wide) return (8.0 * (g(at(1)) - g(at(-1))) - (g(at(2)) - g(at(-2)))) / (12 * h);
    }
    return (g(at(1)) - g(at(-1))) / (2 * h);
  };
  auto f40 = [](const InvariantSample& x) { return x.quartic40_def; };
  auto f04 = [](const InvariantSample& x) { return x.quartic04_def; };
  for (int i = 1; i < nu - 1; ++i)
    for (int j = 1; j < nv - 1; ++j) {
      InvariantSample& s = r.samples[static_cast<std::size_t>(i * nv + j)];
      if (!s.ok) continue;
      auto au = [&](int m) -> const InvariantSample& { return r.at(i + m, j); };
      auto av = [&](int m) -> const InvariantSample& { return r.at(i, j + m); };
      bool ok = true;
      const cplx q40u = deriv(i, nu, r.hu, au, f40, ok), q40v = deriv(j, nv, r.hv, av, f40, ok);
      const cplx q04u = deriv(i, nu, r.hu, au, f04, ok), q04v = deriv(j, nv, r.hv, av, f04, ok);
      if (!ok) continue;
      s.d40_fd = nd.minus[0] * q40u + nd.minus[1] * q40v;
      s.d04_fd = nd.plus[0] * q04u + nd.plus[1] * q04v;
    }
}

/// Aggregates, histogram, surface verdict, Voss flag, recovery.
inline void summarize(AnalysisResult& r, const SurfaceModel& model) {
  const Thresholds& t = r.config.thresholds;
  r.aggregates.clear();
  r.histogram.clear();
  r.failed_points = 0;
  bool voss = true;
  int split_count = 0;
  for (const auto& s : r.samples) {
    if (!s.ok) {
      ++r.failed_points;
      continue;
    }
    if (!r.interior(s.i, s.j)) continue;
    const double sc = std::max(s.scale, 1e-300), s2 = sc * sc, s4 = s2 * s2, s5 = s4 * sc;
    detail::add(r.aggregates, "conformality", s.conformality);
    detail::add(r.aggregates, "quartic40_def", std::abs(s.quartic40_def) / s4);
    detail::add(r.aggregates, "willmore", s.willmore / s2);
    if (s.verdict != Verdict::indeterminate) ++r.histogram[to_string(s.verdict)];
    if (!s.split) {
      voss = false;
      continue;
    }
    ++split_count;
    detail::add(r.aggregates, "II", s.II_norm / sc);
    detail::add(r.aggregates, "q20", std::abs(s.q20) / s2);
    detail::add(r.aggregates, "q02", std::abs(s.q02) / s2);
    detail::add(r.aggregates, "beta0", s.beta0_norm / sc);
    detail::add(r.aggregates, "A", s.A_norm / sc);
    detail::add(r.aggregates, "skew", s.skew);
    detail::add(r.aggregates, "membership", s.membership);
    detail::add(r.aggregates, "csc", s.csc_residual);
    detail::add(r.aggregates, "constrained_willmore", s.constrained_willmore / s2);
    detail::add(r.aggregates, "quartic_cross_route",
                std::abs(s.quartic40_def - s.quartic40_alg) / std::max(std::abs(s.quartic40_def), 1e-6 * s4) +
                    std::abs(s.quartic04_def - s.quartic04_alg) / std::max(std::abs(s.quartic04_def), 1e-6 * s4));
    if (s.gcr_available) {
      detail::add(r.aggregates, "gcr", s.gcr.max_relative());
      detail::add(r.aggregates, "dDQ", s.dDQ_norm / s2);
      detail::add(r.aggregates, "dDbeta0", s.dDbeta0_norm / s2);
      detail::add(r.aggregates, "tension", s.tension_norm / s2);
      detail::add(r.aggregates, "confUf", s.confUf / s2);
      detail::add(r.aggregates, "d40_alg", std::abs(s.d40_alg) / s5);
      detail::add(r.aggregates, "d04_alg", std::abs(s.d04_alg) / s5);
    }
    if (s.d40_fd) {
      detail::add(r.aggregates, "d40_fd", std::abs(*s.d40_fd) / s5);
      detail::add(r.aggregates, "d04_fd", std::abs(*s.d04_fd) / s5);
      if (s.gcr_available)
        detail::add(r.aggregates, "divergence_cross_route",
                    std::max(std::abs(s.d40_alg - *s.d40_fd) / std::max(std::abs(s.d40_alg), 1e-6 * s5),
                             std::abs(s.d04_alg - *s.d04_fd) / std::max(std::abs(s.d04_alg), 1e-6 * s5)));
    }
    bool v = s.voss;
    if (s.d40_fd) v = v && std::abs(*s.d40_fd) / s5 < t.tau_zero && std::abs(*s.d04_fd) / s5 < t.tau_zero;
    voss = voss && v;
  }
  for (auto& [k, a] : r.aggregates) a.rms = a.count ? std::sqrt(a.rms / a.count) : 0.0;
  r.voss = voss && split_count > 0;

  r.verdict = Verdict::indeterminate;
  int best = 0;
  for (const auto& [name, n] : r.histogram)
    if (n > best) {
      best = n;
      for (int k = 0; k <= static_cast<int>(Verdict::indeterminate); ++k)
        if (to_string(static_cast<Verdict>(k)) == name) r.verdict = static_cast<Verdict>(k);
    }

  const auto pts = r.interior_split();
  r.subspace_angle = 0;
  if (!pts.empty()) {
    const Eigen::MatrixXd& ref = pts.front()->W;
    for (const auto* p : pts) {
      if (p->W.cols() != ref.cols()) {
        r.subspace_angle = M_PI / 2;
        break;
      }
      r.subspace_angle = std::max(r.subspace_angle, max_principal_angle(ref, p->W));
    }
  }

  r.recovery.reset();
  r.lightcone.reset();
  r.recovery_error.clear();
  std::optional<SpaceformGauge> gauge;
  if (model.gauge()) gauge = detail::transformed(*model.gauge(), r.config.point.transform);
  try {
    if (r.verdict == Verdict::cmc_spaceform) {
      std::vector<const InvariantSample*> use;
      for (const auto* p : pts)
        if (p->verdict == Verdict::cmc_spaceform) use.push_back(p);
      r.recovery = recover_spaceform_data(model.space(), use, gauge, r.hu, r.hv);
    } else if (r.verdict == Verdict::lightcone_cmc && gauge) {
      std::vector<const InvariantSample*> use;
      for (const auto* p : pts)
        if (p->verdict == Verdict::lightcone_cmc) use.push_back(p);
      r.lightcone = lightcone_mean_curvature(model.space(), use, *gauge);
    }
  } catch (const GeometryError& e) {
    r.recovery_error = e.what();
  }
}

/// Evaluates the configured grid.
inline AnalysisResult analyze(const AnalysisConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  AnalysisResult r;
  r.config = cfg;
  if (cfg.nu < 1 || cfg.nv < 1) throw GeometryError(ErrorKind::invalid_spec, "grid must be at least 1x1");
  const SurfaceModel model(cfg.surface);
  const auto& dom = cfg.surface.domain;
  r.hu = cfg.nu > 1 ? (dom[0][1] - dom[0][0]) / (cfg.nu - 1) : 0;
  r.hv = cfg.nv > 1 ? (dom[1][1] - dom[1][0]) / (cfg.nv - 1) : 0;
  r.samples.resize(static_cast<std::size_t>(cfg.nu) * cfg.nv);
  parallel_for(r.samples.size(), worker_count(cfg.threads), [&](std::size_t k) {
    const int i = static_cast<int>(k) / cfg.nv, j = static_cast<int>(k) % cfg.nv;
    const double u = detail::grid_coord(dom[0][0], dom[0][1], cfg.nu, i);
    const double v = detail::grid_coord(dom[1][0], dom[1][1], cfg.nv, j);
    InvariantSample s;
    try {
      s = sample_point(model, u, v, cfg.point);
      const Classification c = classify_point(s, cfg.thresholds);
      s.verdict = c.verdict;
      s.voss = c.voss;
      s.margin = c.margin;
    } catch (const GeometryError& e) {
      s = InvariantSample{};
      s.u = u;
      s.v = v;
      s.ok = false;
      s.error = e.what();
      s.error_kind = e.kind();
      s.verdict = Verdict::indeterminate;
    }
    s.i = i;
    s.j = j;
    r.samples[k] = std::move(s);
  });
  fd_divergence(r, NullDirections(model.epsilon()));
  summarize(r, model);
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

namespace detail {

inline nlohmann::json cjson(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

}  // namespace detail

/// Report as JSON; keys are sorted, wall_time is the only nondeterministic field.
inline nlohmann::json report_json(const AnalysisResult& r, bool with_samples = false) {
  using nlohmann::json;
  json j;
  j["tool_version"] = kToolVersion;
  j["norm"] = "Frobenius norm of matrices in the standard basis; quantities divided by powers of the point scale";
  json c;
  c["surface"] = to_json(r.config.surface);
  c["grid"] = {r.config.nu, r.config.nv};
  c["order"] = r.config.point.order;
  c["mode"] = to_string(r.config.point.mode);
  c["thresholds"] = {{"tau_zero", r.config.thresholds.tau_zero},
                     {"tau_residual", r.config.thresholds.tau_residual},
                     {"margin", r.config.thresholds.margin}};
  j["config"] = c;
  json agg = json::object();
  for (const auto& [k, a] : r.aggregates) agg[k] = {{"sup", a.sup}, {"rms", a.rms}, {"count", a.count}};
  j["aggregates"] = agg;
  j["verdict_histogram"] = r.histogram;
  j["verdict"] = to_string(r.verdict);
  j["voss"] = r.voss;
  j["failed_points"] = r.failed_points;
  j["subspace_angle"] = r.subspace_angle;
  j["wall_time"] = r.wall_time;
  if (r.recovery) {
    const auto& s = *r.recovery;
    json rec{{"H", s.H},
             {"kappa", s.kappa},
             {"mu", s.mu},
             {"mu_stddev", s.mu_stddev},
             {"mu_residual", s.mu_residual},
             {"constancy", s.constancy},
             {"identity", s.identity},
             {"normal_sign", s.NN},
             {"branch", s.branch},
             {"q", std::vector<double>(s.q_recovered.data(), s.q_recovered.data() + s.q_recovered.size())}};
    if (s.H_classical) {
      rec["H_classical"] = *s.H_classical;
      rec["H_classical_note"] = s.H_classical_note;
    }
    j["recovery"] = rec;
  }
  if (r.lightcone) j["lightcone"] = {{"H_l", r.lightcone->H_l}, {"mu", r.lightcone->mu}, {"mu_stddev", r.lightcone->mu_stddev}};
  if (!r.recovery_error.empty()) j["recovery_error"] = r.recovery_error;
  if (with_samples) {
    json arr = json::array();
    for (const auto& s : r.samples) {
      json p{{"u", s.u}, {"v", s.v}, {"i", s.i}, {"j", s.j}, {"ok", s.ok}, {"verdict", to_string(s.verdict)}};
      if (!s.ok) p["error"] = s.error;
      else {
        p["q20"] = detail::cjson(s.q20);
        p["quartic40"] = detail::cjson(s.quartic40_def);
        p["scale"] = s.scale;
        p["voss"] = s.voss;
      }
      arr.push_back(p);
    }
    j["samples"] = arr;
  }
  return j;
}

/// Per-point field dump.
inline void write_csv(const AnalysisResult& r, std::ostream& os) {
  os << "i,j,u,v,ok,verdict,scale,re_q20,im_q20,re_q02,im_q02,re_quartic40,im_quartic40,"
        "re_quartic40_alg,im_quartic40_alg,II,A,gcr,tension,willmore,constrained_willmore,voss\n";
  os.precision(17);
  for (const auto& s : r.samples) {
    os << s.i << ',' << s.j << ',' << s.u << ',' << s.v << ',' << (s.ok ? 1 : 0) << ',' << to_string(s.verdict) << ','
       << s.scale << ',' << s.q20.real() << ',' << s.q20.imag() << ',' << s.q02.real() << ',' << s.q02.imag() << ','
       << s.quartic40_def.real() << ',' << s.quartic40_def.imag() << ',' << s.quartic40_alg.real() << ','
       << s.quartic40_alg.imag() << ',' << s.II_norm << ',' << s.A_norm << ','
       << (s.gcr_available ? s.gcr.max_relative() : 0.0) << ',' << s.tension_norm << ',' << s.willmore << ','
       << s.constrained_willmore << ',' << (s.voss ? 1 : 0) << '\n';
  }
}

}  // namespace lightcone
