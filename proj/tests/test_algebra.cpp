#include <gtest/gtest.h>

#include <random>

#include "lightcone/conformal_frame.hpp"
#include "lightcone/surface.hpp"

using namespace lightcone;

namespace {

const AmbientSpace R41(4, 1);

Vec e(int i, const AmbientSpace& s = R41) { return s.basis(i); }

Vec random_vec(const AmbientSpace& s, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec x(s.dim());
  for (int i = 0; i < s.dim(); ++i) x(i) = nd(rng);
  return x;
}

}  // namespace

// ---------------------------------------------------------------- linalg

TEST(Linalg, InnerProductSigns) {
  EXPECT_DOUBLE_EQ(R41.inner(e(0), e(0)), 1.0);
  EXPECT_DOUBLE_EQ(R41.inner(e(4), e(4)), -1.0);
  EXPECT_DOUBLE_EQ(R41.inner(Vec(e(0) + e(4)), Vec(e(0) + e(4))), 0.0);
}

TEST(Linalg, DimensionMismatchThrows) {
  Vec x = Vec::Zero(3);
  EXPECT_THROW(R41.inner(x, e(0)), GeometryError);
}

TEST(Linalg, WedgeApplyBasics) {
  EXPECT_TRUE(wedge_apply(R41, e(0), e(1), e(0)).isApprox(e(1)));
  EXPECT_LT(wedge_apply(R41, e(0), e(1), e(2)).norm(), 1e-15);
}

TEST(Linalg, WedgeIsSkewOnRandomDraws) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Vec a = random_vec(R41, rng), b = random_vec(R41, rng), c = random_vec(R41, rng),
              d = random_vec(R41, rng);
    const double lhs = R41.inner(wedge_apply(R41, a, b, c), d);
    const double rhs = -R41.inner(wedge_apply(R41, a, b, d), c);
    EXPECT_NEAR(lhs, rhs, 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST(Linalg, BivectorPairing) {
  const auto e12 = Bivector::wedge(R41, e(0), e(1));
  const auto e15 = Bivector::wedge(R41, e(0), e(4));
  EXPECT_NEAR(pairing(e12, e12), 1.0, 1e-15);
  EXPECT_NEAR(pairing(e15, e15), -1.0, 1e-15);
  const AmbientSpace R62(6, 2);
  const auto a = Bivector::wedge(R62, e(0, R62), e(1, R62));
  const auto b = Bivector::wedge(R62, e(2, R62), e(6, R62));
  EXPECT_NEAR(pairing(a, b), 0.0, 1e-15);
  EXPECT_LT(e15.skewness_defect(), 1e-15);
}

TEST(Linalg, PairingIsAdInvariant) {
  std::mt19937_64 rng(5);
  auto rb = [&] { return wedge_matrix(R41, random_vec(R41, rng), random_vec(R41, rng)); };
  for (int t = 0; t < 20; ++t) {
    const Mat x = rb(), y = rb(), z = rb();
    EXPECT_NEAR(pairing(commutator(x, y), z), pairing(x, commutator(y, z)), 1e-10);
  }
}

TEST(Linalg, SubspaceSignatureAndComplement) {
  const auto plane = SubspaceFrame::span(R41, {e(0), e(4)});
  EXPECT_EQ(plane.signature(), (Signature{1, 1, 0, false}));
  const auto comp = SubspaceFrame::span(R41, {e(0)}).orthogonal_complement();
  EXPECT_EQ(comp.rank(), 4);
  Eigen::MatrixXd expected(5, 4);
  expected << e(1), e(2), e(3), e(4);
  EXPECT_LT(max_principal_angle(comp.basis(), expected), 1e-12);
}

TEST(Linalg, NullLineHasDegenerateGram) {
  const auto line = SubspaceFrame::span(R41, {Vec(e(0) + e(4))});
  EXPECT_EQ(line.signature(), (Signature{0, 0, 1, false}));
  try {
    line.project(e(0));
    FAIL() << "projection onto a null line must fail";
  } catch (const GeometryError& err) {
    EXPECT_EQ(err.kind(), ErrorKind::degenerate_subspace);
  }
}

TEST(Linalg, IntersectAndProject) {
  const auto a = SubspaceFrame::span(R41, {e(0), e(1), e(2)});
  const auto b = SubspaceFrame::span(R41, {e(1), e(2), e(3)});
  const auto c = a.intersect(b);
  EXPECT_EQ(c.rank(), 2);
  const Vec x = e(0) + 2 * e(3) + 3 * e(4);
  EXPECT_TRUE(a.project(x).isApprox(e(0)));
}

TEST(Linalg, NullLinesOfStandardPlane) {
  const auto [a, b] = null_lines_in_plane(SubspaceFrame::span(R41, {e(0), e(4)}));
  const double r = 1 / std::sqrt(2.0);
  EXPECT_TRUE(a.isApprox(Vec(r * (e(0) + e(4)))));
  EXPECT_TRUE(b.isApprox(Vec(r * (e(0) - e(4)))));
}

TEST(Linalg, NoNullLinesInDefinitePlane) {
  try {
    null_lines_in_plane(SubspaceFrame::span(R41, {e(0), e(1)}));
    FAIL();
  } catch (const GeometryError& err) {
    EXPECT_EQ(err.kind(), ErrorKind::wrong_signature);
    EXPECT_NE(std::string(err.what()).find("no null lines"), std::string::npos);
  }
}

TEST(Linalg, NullLinesOfBoostedPlane) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-3, 3), rap(-0.9, 0.9);
  for (int t = 0; t < 20; ++t) {
    const double phi = rap(rng), th = ang(rng);
    const Vec s = std::cos(th) * e(0) + std::sin(th) * e(1);
    const Vec x = std::cosh(phi) * s + std::sinh(phi) * e(4);
    const Vec y = std::sinh(phi) * s + std::cosh(phi) * e(4) + 0.3 * x;
    const auto [a, b] = null_lines_in_plane(SubspaceFrame::span(R41, {x, y}));
    EXPECT_LT(std::abs(R41.inner(a, a)), 1e-12);
    EXPECT_LT(std::abs(R41.inner(b, b)), 1e-12);
    Eigen::MatrixXd ab(5, 2);
    ab << a, b;
    EXPECT_EQ(orthonormal_span(ab).cols(), 2);
  }
}

// ---------------------------------------------------------------- jets

TEST(Jets, ProductOfCoordinates) {
  const ScalarJet p = variable_u(2, 0, 0) * variable_v(2, 0, 0);
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; i + j <= 2; ++j) EXPECT_DOUBLE_EQ(p(i, j), (i == 1 && j == 1) ? 1.0 : 0.0);
}

TEST(Jets, QuotientByItselfIsOne) {
  const ScalarJet a = variable_u(4, 0, 0) * variable_v(4, 0, 0) + ScalarJet::constant(4, 2.0) +
                      elementary(variable_u(4, 0, 0), Elementary::sin);
  const ScalarJet q = a / a;
  EXPECT_NEAR(q(0, 0), 1.0, 1e-15);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      if (i + j > 0) EXPECT_NEAR(q(i, j), 0.0, 1e-14);
}

TEST(Jets, GeometricSeriesTruncates) {
  const ScalarJet u = variable_u(4, 0, 0), one = ScalarJet::constant(4, 1.0);
  const ScalarJet s = one - u + u * u - u * u * u + u * u * u * u;
  const ScalarJet p = (one + u) * s;
  EXPECT_NEAR(p(0, 0), 1.0, 1e-15);
  for (int i = 1; i <= 4; ++i) EXPECT_NEAR(p(i, 0), 0.0, 1e-15);
}

TEST(Jets, ElementarySeries) {
  const ScalarJet s = elementary(variable_u(3, 0, 0), Elementary::sin);
  EXPECT_NEAR(s(1, 0), 1.0, 1e-15);
  EXPECT_NEAR(s(3, 0), -1.0 / 6, 1e-15);
  const ScalarJet one = elementary(ScalarJet::constant(3, 0.0), Elementary::exp);
  EXPECT_NEAR(one(0, 0), 1.0, 1e-15);
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      if (i + j > 0) EXPECT_EQ(one(i, j), 0.0);
}

TEST(Jets, CoshOfSumAgainstFiniteDifferences) {
  const ScalarJet c = elementary(variable_u(2, 0, 0) + variable_v(2, 0, 0), Elementary::cosh);
  EXPECT_NEAR(c(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(c(2, 0), 0.5, 1e-15);
  EXPECT_NEAR(c(0, 2), 0.5, 1e-15);
  EXPECT_NEAR(c(1, 1), 1.0, 1e-15);
  const double h = 1e-5;
  auto f = [](double u, double v) { return std::cosh(u + v); };
  const double fuu = (f(h, 0) - 2 * f(0, 0) + f(-h, 0)) / (h * h);
  const double fuv = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
  EXPECT_NEAR(c.partial(2, 0), fuu, 1e-5);
  EXPECT_NEAR(c.partial(1, 1), fuv, 1e-5);
}

TEST(Jets, ExtractPartial) {
  const ScalarJet u = variable_u(3, 0, 0);
  EXPECT_DOUBLE_EQ((u * u).partial(2, 0), 2.0);
  EXPECT_DOUBLE_EQ(ScalarJet::constant(3, 4.0).partial(1, 0), 0.0);
  const ScalarJet f = elementary(u, Elementary::sin) * elementary(variable_v(3, 0, 0), Elementary::cosh);
  EXPECT_NEAR(f.partial(1, 2), 1.0, 1e-14);
}

TEST(Jets, OrderGuards) {
  const ScalarJet u = variable_u(2, 0, 0);
  EXPECT_THROW(u.partial(3, 0), GeometryError);
  EXPECT_THROW(ScalarJet(kMaxJetOrder + 1, 0.0), GeometryError);
  EXPECT_THROW(u + variable_u(2, 1, 0), GeometryError);
  EXPECT_EQ((u * variable_u(4, 0, 0)).order(), 2);
}

TEST(Jets, DerivativeLowersOrder) {
  const ScalarJet u = variable_u(4, 0.5, 0), f = elementary(u, Elementary::exp);
  const ScalarJet d = f.du();
  EXPECT_EQ(d.order(), 3);
  EXPECT_NEAR(d(0, 0), std::exp(0.5), 1e-14);
  EXPECT_NEAR(d.partial(2, 0), std::exp(0.5), 1e-13);
}

TEST(Jets, InverseMatrix) {
  Mat m0(2, 2);
  m0 << 2, 1, 0, 3;
  MatJet m = MatJet::constant(3, m0);
  Mat m1(2, 2);
  m1 << 0, 1, 1, 0;
  m(1, 0) = m1;
  const MatJet p = m * inverse_matrix(m);
  EXPECT_TRUE(p.value().isApprox(Mat::Identity(2, 2)));
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j)
      if (i + j > 0) EXPECT_LT(p(i, j).norm(), 1e-14);
}

// ---------------------------------------------------------------- expressions

TEST(Expr, ParsesFunctionsAndPrecedence) {
  const Expr a = parse_expr("sin(u)*cosh(v)");
  ASSERT_EQ(a->kind, NodeKind::mul);
  EXPECT_EQ(a->lhs->kind, NodeKind::func);
  EXPECT_EQ(a->lhs->name, "sin");
  EXPECT_EQ(a->rhs->name, "cosh");
  const Expr b = parse_expr("u + v*u");
  ASSERT_EQ(b->kind, NodeKind::add);
  EXPECT_EQ(b->lhs->kind, NodeKind::var_u);
  EXPECT_EQ(b->rhs->kind, NodeKind::mul);
}

TEST(Expr, IncompleteExpressionReportsOffset) {
  try {
    parse_expr("u +");
    FAIL();
  } catch (const ParseError& err) {
    EXPECT_EQ(err.kind(), ErrorKind::parse);
    EXPECT_EQ(err.offset(), 3u);
  }
}

TEST(Expr, UnknownIdentifierAndArity) {
  const ParamTable none;
  EXPECT_THROW(parse_expr("w*u", &none), ParseError);
  EXPECT_NO_THROW(parse_expr("w*u"));
  EXPECT_THROW(parse_expr("sin(u, v)"), ParseError);
  const ParamTable p{{"r", 2.0}};
  EXPECT_DOUBLE_EQ(eval_expr(parse_expr("r*u", &p), 3, 0, p), 6.0);
}

TEST(Expr, PrintRoundTrip) {
  for (const char* text : {"sin(u)*cosh(v)", "u + v*u", "-u^2/(1 + v^2) - pi", "sqrt(1 + u)*exp(-v)"}) {
    const Expr a = parse_expr(text);
    EXPECT_TRUE(same_structure(a, parse_expr(print_expr(a)))) << text;
  }
}

TEST(Expr, JetEvaluation) {
  const ScalarJet sq = eval_expr_jet(parse_expr("u*u"), 3, 0, 2);
  EXPECT_DOUBLE_EQ(sq(0, 0), 9);
  EXPECT_DOUBLE_EQ(sq(1, 0), 6);
  EXPECT_DOUBLE_EQ(sq(2, 0), 1);
  const ScalarJet one = eval_expr_jet(parse_expr("exp(0*u)"), 0.7, -0.2, 3);
  EXPECT_DOUBLE_EQ(one(0, 0), 1);
  EXPECT_DOUBLE_EQ(one(1, 0), 0);
  const ScalarJet r = eval_expr_jet(parse_expr("sqrt(1+u)"), 0, 0, 2);
  EXPECT_NEAR(r(0, 0), 1, 1e-15);
  EXPECT_NEAR(r(1, 0), 0.5, 1e-15);
  EXPECT_NEAR(r(2, 0), -0.125, 1e-15);
}

TEST(Expr, JetMatchesValue) {
  const Expr e = parse_expr("cosh(v)*cos(u) + u^3/3 - 2*v^2");
  for (double u : {-0.4, 0.3})
    EXPECT_NEAR(eval_expr_jet(e, u, 0.2, 3)(0, 0), eval_expr(e, u, 0.2), 1e-14);
}

// ---------------------------------------------------------------- surface model

TEST(Surface, EuclideanOriginLiftsToO) {
  SurfaceSpec s;
  s.components = {"0", "0", "0"};
  const SurfaceModel m(s);
  EXPECT_TRUE(m.lift_value(0.1, 0.2).isApprox(*m.gauge()->o));
}

TEST(Surface, SphereLikeLiftIsNull) {
  const SurfaceModel m(catalog_surface("round_sphere"));
  for (double u : {-0.5, 0.0, 0.8}) {
    const VecJet F = m.lift(u, 0.3, 2);
    const ScalarJet ff = inner(m.space(), F, F);
    for (int i = 0; i <= 2; ++i)
      for (int j = 0; i + j <= 2; ++j) EXPECT_NEAR(ff(i, j), 0.0, 1e-14);
  }
}

TEST(Surface, CatenoidLift) {
  const SurfaceModel m(catalog_surface("catenoid"));
  const Vec F = m.lift_value(0.0, 1.0);
  EXPECT_NEAR(F(1), std::cosh(1.0), 1e-15);
  EXPECT_NEAR(F(3), 1.0, 1e-15);
  EXPECT_LT(std::abs(m.space().inner(F, F)), 1e-12);
  EXPECT_NEAR(m.space().inner(F, m.gauge()->q), -1.0, 1e-12);
}

TEST(Surface, CatalogParameters) {
  const SurfaceSpec s = catalog_surface("cmc_cylinder", {{"H", 1.0}});
  EXPECT_DOUBLE_EQ(s.params.at("r"), 0.5);
  EXPECT_THROW(catalog_surface("cmc_cylinder", {{"R", 1.0}}), GeometryError);
  EXPECT_THROW(catalog_surface("klein_bottle"), GeometryError);
}

TEST(Surface, CliffordTorusIsConformalEverywhere) {
  const SurfaceModel m(catalog_surface("clifford_torus"));
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const double u = 0.7 * i, v = 0.7 * j;
      std::vector<ScalarJet> c;
      for (const auto& t : m.spec().components) c.push_back(eval_expr_jet(parse_expr(t), u, v, 1));
      double uu = 0, vv = 0, uv = 0;
      for (const auto& k : c) {
        uu += k.partial(1, 0) * k.partial(1, 0);
        vv += k.partial(0, 1) * k.partial(0, 1);
        uv += k.partial(1, 0) * k.partial(0, 1);
      }
      EXPECT_NEAR(uu, 0.5, 1e-14);
      EXPECT_NEAR(vv, 0.5, 1e-14);
      EXPECT_NEAR(uv, 0.0, 1e-14);
    }
}

TEST(Surface, DirectNullLiftIsValidated) {
  SurfaceSpec s;
  s.lift_kind = LiftKind::direct_null;
  s.components = {"u", "v", "0", "0", "0"};
  const SurfaceModel m(s);
  EXPECT_THROW(m.lift(0.3, 0.2, 2), GeometryError);
}

TEST(Surface, ValidationErrors) {
  SurfaceSpec s;
  s.components = {"u", "v"};
  EXPECT_THROW(validate(s), GeometryError);
  s.components = {"u", "v", "0"};
  s.domain = {{{1.0, 0.0}, {0.0, 1.0}}};
  EXPECT_THROW(validate(s), GeometryError);
}

TEST(Surface, JsonRoundTrip) {
  const SurfaceSpec s = catalog_surface("enneper");
  const SurfaceSpec t = spec_from_json(to_json(s));
  EXPECT_EQ(t.components, s.components);
  EXPECT_EQ(t.domain, s.domain);
  const SurfaceSpec c = spec_from_json(nlohmann::json{{"catalog", "cmc_cylinder"}, {"params", {{"H", 2.0}}}});
  EXPECT_DOUBLE_EQ(c.params.at("r"), 0.25);
  EXPECT_THROW(spec_from_json(nlohmann::json{{"signature", 3}}), GeometryError);
}

// ---------------------------------------------------------------- conformal frame

TEST(ConformalFrame, CatalogChartsAreConformal) {
  for (const char* name : {"clifford_torus", "catenoid", "round_sphere", "enneper", "cmc_torus"}) {
    const SurfaceModel m(catalog_surface(name));
    const auto& d = m.spec().domain;
    for (double a : {0.2, 0.5, 0.9}) {
      const double u = d[0][0] + a * (d[0][1] - d[0][0]), v = d[1][0] + (1 - a) * (d[1][1] - d[1][0]);
      EXPECT_LT(conformality_check(m.space(), m.lift(u, v, 1), 0), 1e-12) << name;
    }
  }
}

TEST(ConformalFrame, RejectsNonConformalChart) {
  SurfaceSpec s;
  s.components = {"u", "v^2", "0"};
  const SurfaceModel m(s);
  const VecJet F = m.lift(1, 1, 2);
  EXPECT_GT(conformality_check(m.space(), F, 0), 0.1);
  try {
    null_frame(m.space(), F, 0);
    FAIL();
  } catch (const GeometryError& err) {
    EXPECT_EQ(err.kind(), ErrorKind::not_conformal);
  }
}

TEST(ConformalFrame, NullDirectionDerivatives) {
  const SurfaceModel m(catalog_surface("catenoid"));
  const VecJet F = m.lift(0.4, 0.3, 2);
  const NullFrame nf = null_frame(m.space(), F, 0);
  const CVec expected = 0.5 * (complexify(F.partial(1, 0)) - cplx(0, 1) * complexify(F.partial(0, 1)));
  EXPECT_LT((nf.dF_plus - expected).norm(), 1e-15);
  EXPECT_LT(std::abs(m.space().inner(nf.dF_plus, nf.dF_plus)), 1e-10);

  const SurfaceModel t(catalog_surface("timelike_cmc_cylinder"));
  const VecJet G = t.lift(0.1, 0.2, 2);
  const NullFrame tf = null_frame(t.space(), G, 1);
  EXPECT_LT((tf.dF_plus - complexify(G.partial(1, 0))).norm(), 1e-15);
  EXPECT_LT(std::abs(t.space().inner(tf.dF_plus, tf.dF_plus)), 1e-10);
}

TEST(ConformalFrame, NullDirectionRoundTrip) {
  for (int eps : {0, 1}) {
    const NullDirections nd(eps);
    const cplx wu(0.3, 0.1), wv(-1.2, 0.4);
    const cplx wp = nd.plus[0] * wu + nd.plus[1] * wv, wm = nd.minus[0] * wu + nd.minus[1] * wv;
    const auto back = nd.to_uv(wp, wm);
    EXPECT_LT(std::abs(back[0] - wu), 1e-15);
    EXPECT_LT(std::abs(back[1] - wv), 1e-15);
  }
}
