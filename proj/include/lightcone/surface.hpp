#pragma once

// Surface descriptions, lightcone lifts and the built-in catalog.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lightcone/expr.hpp"

namespace lightcone {

enum class LiftKind { direct_null, euclidean, sphere_like };

inline std::string to_string(LiftKind k) {
  switch (k) {
    case LiftKind::direct_null: return "direct_null";
    case LiftKind::euclidean: return "euclidean";
    case LiftKind::sphere_like: return "sphere_like";
  }
  return "?";
}

inline LiftKind lift_kind_from(const std::string& s) {
  if (s == "direct_null") return LiftKind::direct_null;
  if (s == "euclidean") return LiftKind::euclidean;
  if (s == "sphere_like") return LiftKind::sphere_like;
  throw GeometryError(ErrorKind::invalid_spec, "unknown lift_kind '" + s + "'");
}

struct SurfaceSpec {
  std::string name;
  int p_plus = 4;
  int q_plus = 1;
  int epsilon = 0;
  LiftKind lift_kind = LiftKind::euclidean;
  std::vector<std::string> components;
  ParamTable params;
  std::array<std::array<double, 2>, 2> domain{{{0.0, 1.0}, {0.0, 1.0}}};
  bool declared_conformal = true;
  std::string lift_scale;  // optional expression lambda; F is multiplied by exp(lambda)
  std::string mode;        // preferred analysis mode, "envelope" or "spaceform"
};

/// Null vector o and space form vector q with (o,q) = -1 when q is null.
struct SpaceformGauge {
  std::optional<Vec> o;
  Vec q;
  double kappa(const AmbientSpace& space) const { return -space.inner(q, q); }
};

inline int expected_components(const SurfaceSpec& s) {
  const int n = s.p_plus + s.q_plus;
  switch (s.lift_kind) {
    case LiftKind::direct_null: return n;
    case LiftKind::euclidean: return n - 2;
    case LiftKind::sphere_like: return n - 1;
  }
  return -1;
}

inline void validate(const SurfaceSpec& s) {
  AmbientSpace space(s.p_plus, s.q_plus);
  if (s.epsilon != 0 && s.epsilon != 1)
    throw GeometryError(ErrorKind::invalid_spec, "epsilon must be 0 or 1");
  if (static_cast<int>(s.components.size()) != expected_components(s))
    throw GeometryError(ErrorKind::invalid_spec,
                        "expected " + std::to_string(expected_components(s)) +
                            " component expressions for lift_kind " + to_string(s.lift_kind));
  if (!(s.domain[0][0] < s.domain[0][1]) || !(s.domain[1][0] < s.domain[1][1]))
    throw GeometryError(ErrorKind::invalid_spec, "empty domain box");
  if (s.lift_kind == LiftKind::sphere_like && s.q_plus < 1)
    throw GeometryError(ErrorKind::invalid_spec, "sphere_like lift needs a timelike direction");
}

/// The fixed Euclidean gauge o = (e_first + e_last)/sqrt2, q = (e_last - e_first)/sqrt2.
inline SpaceformGauge euclidean_gauge(const AmbientSpace& space) {
  const int n = space.dim();
  const double r = 1.0 / std::sqrt(2.0);
  SpaceformGauge g;
  g.o = Vec((space.basis(0) + space.basis(n - 1)) * r);
  g.q = (space.basis(n - 1) - space.basis(0)) * r;
  return g;
}

/// Parsed, immutable surface ready for jet evaluation.
class SurfaceModel {
 public:
  explicit SurfaceModel(SurfaceSpec spec) : spec_(std::move(spec)), space_(spec_.p_plus, spec_.q_plus) {
    validate(spec_);
    for (const auto& c : spec_.components) exprs_.push_back(parse_expr(c, &spec_.params));
    if (!spec_.lift_scale.empty()) scale_ = parse_expr(spec_.lift_scale, &spec_.params);
    switch (spec_.lift_kind) {
      case LiftKind::euclidean: gauge_ = euclidean_gauge(space_); break;
      case LiftKind::sphere_like: {
        SpaceformGauge g;
        g.q = space_.basis(space_.dim() - 1);
        gauge_ = g;
        break;
      }
      case LiftKind::direct_null: break;
    }
  }

  const SurfaceSpec& spec() const noexcept { return spec_; }
  const AmbientSpace& space() const noexcept { return space_; }
  int epsilon() const noexcept { return spec_.epsilon; }
  const std::optional<SpaceformGauge>& gauge() const noexcept { return gauge_; }

  /// Jet of the lift F at (u0,v0).
  VecJet lift(double u0, double v0, int order) const {
    const int n = space_.dim();
    std::vector<ScalarJet> x;
    for (const auto& e : exprs_) x.push_back(eval_expr_jet(e, u0, v0, order, spec_.params));
    VecJet F;
    switch (spec_.lift_kind) {
      case LiftKind::direct_null: {
        F = assemble(x);
        ScalarJet ff = inner(space_, F, F);
        double scale = 0;
        for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(F.value()(i)));
        double res = std::abs(ff(0, 0));
        if (order >= 1) res = std::max({res, std::abs(ff(1, 0)), std::abs(ff(0, 1))});
        if (res > 1e-10 * std::max(1.0, scale * scale))
          throw GeometryError(ErrorKind::not_null, "lift is not null within tolerance");
        break;
      }
      case LiftKind::euclidean: {
        // x occupies the middle coordinates 1..n-2.
        ScalarJet xx = ScalarJet::constant(order, 0.0, u0, v0);
        for (int k = 0; k < n - 2; ++k) xx += x[k] * x[k] * space_.metric(k + 1);
        F = VecJet::constant(order, *gauge_->o, u0, v0);
        for (std::size_t m = 0; m < F.raw().size(); ++m) {
          for (int k = 0; k < n - 2; ++k) F.raw()[m](k + 1) += x[k].raw()[m];
          F.raw()[m] += 0.5 * xx.raw()[m] * gauge_->q;
        }
        break;
      }
      case LiftKind::sphere_like: {
        x.push_back(ScalarJet::constant(order, 1.0, u0, v0));
        F = assemble(x);
        break;
      }
    }
    if (scale_) {
      ScalarJet lam = elementary(eval_expr_jet(scale_, u0, v0, order, spec_.params), Elementary::exp);
      F = lam * F;
    }
    return F;
  }

  /// Plain value of the lift, without jets.
  Vec lift_value(double u, double v) const { return lift(u, v, 0).value(); }

 private:
  SurfaceSpec spec_;
  AmbientSpace space_;
  std::vector<Expr> exprs_;
  Expr scale_;
  std::optional<SpaceformGauge> gauge_;
};

// ---------------------------------------------------------------- catalog

enum class Verdict {
  umbilic,
  superconformal,
  half_superconformal,
  s_willmore_branch,
  quasi_umbilic,
  cmc_spaceform,
  lightcone_cmc,
  generic,
  indeterminate
};

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::umbilic: return "umbilic";
    case Verdict::superconformal: return "superconformal";
    case Verdict::half_superconformal: return "half_superconformal";
    case Verdict::s_willmore_branch: return "s_willmore_branch";
    case Verdict::quasi_umbilic: return "quasi_umbilic";
    case Verdict::cmc_spaceform: return "cmc_spaceform";
    case Verdict::lightcone_cmc: return "lightcone_cmc";
    case Verdict::generic: return "generic";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "?";
}

struct CatalogEntry {
  std::string name;
  ParamTable defaults;
  Verdict expected;
  bool expected_voss;
  std::string summary;
};

inline const std::vector<CatalogEntry>& catalog_entries() {
  static const std::vector<CatalogEntry> entries{
      {"round_sphere", {}, Verdict::umbilic, false, "stereographic unit sphere patch in S^3"},
      {"clifford_torus", {}, Verdict::s_willmore_branch, true, "minimal Clifford torus in S^3"},
      {"cmc_torus", {{"a", 0.6}}, Verdict::cmc_spaceform, true, "flat CMC product torus in S^3"},
      {"catenoid", {}, Verdict::s_willmore_branch, true, "minimal catenoid in R^3"},
      {"enneper", {}, Verdict::s_willmore_branch, true, "minimal Enneper surface in R^3"},
      {"cmc_cylinder", {{"H", 1.0}}, Verdict::cmc_spaceform, true, "round cylinder in R^3"},
      {"timelike_cmc_cylinder", {{"H", 1.0}}, Verdict::cmc_spaceform, true,
       "timelike round cylinder in R^{2,1}, null coordinates"},
  };
  return entries;
}

inline const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog_entries())
    if (e.name == name) return e;
  throw GeometryError(ErrorKind::invalid_spec, "unknown catalog surface '" + name + "'");
}

/// Catalog surface with parameter overrides.
inline SurfaceSpec catalog_surface(const std::string& name, const ParamTable& overrides = {}) {
  const CatalogEntry& entry = catalog_entry(name);
  ParamTable p = entry.defaults;
  for (const auto& [k, v] : overrides) {
    if (!p.count(k))
      throw GeometryError(ErrorKind::invalid_spec, "surface '" + name + "' has no parameter '" + k + "'");
    p[k] = v;
  }
  const double pi = M_PI;
  SurfaceSpec s;
  s.name = name;
  s.params = p;
  if (name == "round_sphere") {
    s.lift_kind = LiftKind::sphere_like;
    s.components = {"2*u/(1 + u^2 + v^2)", "2*v/(1 + u^2 + v^2)", "(u^2 + v^2 - 1)/(1 + u^2 + v^2)", "0"};
    s.domain = {{{-1.0, 1.0}, {-1.0, 1.0}}};
    s.mode = "spaceform";
  } else if (name == "clifford_torus") {
    s.lift_kind = LiftKind::sphere_like;
    s.components = {"cos(u)/sqrt(2)", "sin(u)/sqrt(2)", "cos(v)/sqrt(2)", "sin(v)/sqrt(2)"};
    s.domain = {{{0.0, 2 * pi}, {0.0, 2 * pi}}};
    s.mode = "envelope";
  } else if (name == "cmc_torus") {
    const double a = p.at("a");
    if (!(a > 0 && a < 1))
      throw GeometryError(ErrorKind::invalid_spec, "cmc_torus needs 0 < a < 1");
    s.params["b"] = std::sqrt(1 - a * a);
    s.lift_kind = LiftKind::sphere_like;
    s.components = {"a*cos(u/a)", "a*sin(u/a)", "b*cos(v/b)", "b*sin(v/b)"};
    s.domain = {{{0.0, 2 * pi * a}, {0.0, 2 * pi * s.params["b"]}}};
    s.mode = "spaceform";
  } else if (name == "catenoid") {
    s.components = {"cosh(v)*cos(u)", "cosh(v)*sin(u)", "v"};
    s.domain = {{{0.0, 2 * pi}, {-1.0, 1.0}}};
    s.mode = "envelope";
  } else if (name == "enneper") {
    s.components = {"u - u^3/3 + u*v^2", "v - v^3/3 + u^2*v", "u^2 - v^2"};
    s.domain = {{{-0.8, 0.8}, {-0.8, 0.8}}};
    s.mode = "envelope";
  } else if (name == "cmc_cylinder") {
    const double H = p.at("H");
    if (!(H > 0)) throw GeometryError(ErrorKind::invalid_spec, "cmc_cylinder needs H > 0");
    s.params["r"] = 1.0 / (2.0 * H);
    s.components = {"r*cos(u)", "r*sin(u)", "r*v"};
    s.domain = {{{0.0, 2 * pi}, {-1.0, 1.0}}};
    s.mode = "spaceform";
  } else if (name == "timelike_cmc_cylinder") {
    const double H = p.at("H");
    if (!(H > 0)) throw GeometryError(ErrorKind::invalid_spec, "timelike_cmc_cylinder needs H > 0");
    s.params["r"] = 1.0 / (2.0 * H);
    s.p_plus = 3;
    s.q_plus = 2;
    s.epsilon = 1;
    s.components = {"r*cos(u + v)", "r*sin(u + v)", "r*(u - v)"};
    s.domain = {{{-1.0, 1.0}, {-1.0, 1.0}}};
    s.mode = "spaceform";
  }
  validate(s);
  return s;
}

// ---------------------------------------------------------------- JSON

inline nlohmann::json to_json(const SurfaceSpec& s) {
  nlohmann::json j;
  j["name"] = s.name;
  j["signature"] = {s.p_plus, s.q_plus};
  j["epsilon"] = s.epsilon;
  j["lift_kind"] = to_string(s.lift_kind);
  j["components"] = s.components;
  j["params"] = s.params;
  j["domain"] = {{s.domain[0][0], s.domain[0][1]}, {s.domain[1][0], s.domain[1][1]}};
  j["declared_conformal"] = s.declared_conformal;
  if (!s.lift_scale.empty()) j["lift_scale"] = s.lift_scale;
  if (!s.mode.empty()) j["mode"] = s.mode;
  return j;
}

/// Accepts a catalog name, a full description, or {"catalog": name, "params": {...}}.
inline SurfaceSpec spec_from_json(const nlohmann::json& j) {
  try {
    if (j.is_string()) return catalog_surface(j.get<std::string>());
    if (j.contains("catalog")) {
      ParamTable p = j.value("params", ParamTable{});
      SurfaceSpec s = catalog_surface(j.at("catalog").get<std::string>(), p);
      if (j.contains("lift_scale")) s.lift_scale = j["lift_scale"].get<std::string>();
      if (j.contains("mode")) s.mode = j["mode"].get<std::string>();
      return s;
    }
    SurfaceSpec s;
    s.name = j.value("name", std::string("custom"));
    const auto& sig = j.at("signature");
    s.p_plus = sig.at(0).get<int>();
    s.q_plus = sig.at(1).get<int>();
    s.epsilon = j.value("epsilon", 0);
    s.lift_kind = lift_kind_from(j.at("lift_kind").get<std::string>());
    s.components = j.at("components").get<std::vector<std::string>>();
    s.params = j.value("params", ParamTable{});
    const auto& d = j.at("domain");
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) s.domain[a][b] = d.at(a).at(b).get<double>();
    s.declared_conformal = j.value("declared_conformal", true);
    s.lift_scale = j.value("lift_scale", std::string());
    s.mode = j.value("mode", std::string());
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw GeometryError(ErrorKind::invalid_spec, std::string("malformed surface description: ") + e.what());
  }
}

}  // namespace lightcone
