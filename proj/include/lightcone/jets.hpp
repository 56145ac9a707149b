#pragma once

// Bivariate truncated Taylor polynomials ("jets") in (u,v).
//
// A Jet<T> of order K at (u0,v0) stores the coefficients
// c[i][j] = (d/du)^i (d/dv)^j f / (i! j!) for i + j <= K. The coefficient
// type T can be a scalar, a complex scalar, or an Eigen vector or matrix;
// products are truncated Cauchy products, so jets of matrices multiply
// like matrix-valued power series.

#include <array>
#include <cmath>
#include <complex>
#include <type_traits>
#include <utility>
#include <vector>

#include "lightcone/linalg.hpp"

namespace lightcone {

inline constexpr int kMaxJetOrder = 6;

constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }
constexpr int jet_index(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }

inline double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

namespace detail {

template <class X>
auto evaluated(X&& x) {
  if constexpr (requires { x.eval(); }) {
    return x.eval();
  } else {
    return std::decay_t<X>(std::forward<X>(x));
  }
}

template <class X>
X zero_like(const X& x) {
  if constexpr (std::is_arithmetic_v<X>) {
    return X{0};
  } else if constexpr (std::is_same_v<X, cplx>) {
    return X{0};
  } else {
    return X::Zero(x.rows(), x.cols());
  }
}

}  // namespace detail

template <class T>
class Jet {
 public:
  using value_type = T;

  Jet() = default;

  /// All coefficients set to `zero` (which fixes the shape for Eigen types).
  Jet(int order, const T& zero, double u0 = 0.0, double v0 = 0.0)
      : order_(order), u0_(u0), v0_(v0) {
    if (order < 0 || order > kMaxJetOrder)
      throw GeometryError(ErrorKind::jet_order, "jet order out of range");
    c_.assign(static_cast<std::size_t>(jet_size(order)), detail::zero_like(zero));
  }

  static Jet constant(int order, const T& value, double u0 = 0.0, double v0 = 0.0) {
    Jet j(order, value, u0, v0);
    j.c_[0] = value;
    return j;
  }

  int order() const noexcept { return order_; }
  double u0() const noexcept { return u0_; }
  double v0() const noexcept { return v0_; }

  T& operator()(int i, int j) { return c_[static_cast<std::size_t>(jet_index(i, j))]; }
  const T& operator()(int i, int j) const {
    return c_[static_cast<std::size_t>(jet_index(i, j))];
  }
  const T& value() const { return c_[0]; }

  /// Coefficient access guarded against orders beyond the jet.
  const T& coefficient(int i, int j) const {
    if (i < 0 || j < 0 || i + j > order_)
      throw GeometryError(ErrorKind::jet_order, "requested order exceeds jet order");
    return (*this)(i, j);
  }

  /// The true partial derivative i! j! c[i][j].
  T partial(int i, int j) const {
    return detail::evaluated(coefficient(i, j) * (factorial(i) * factorial(j)));
  }

  Jet truncated(int k) const {
    if (k > order_) throw GeometryError(ErrorKind::jet_order, "cannot raise jet order");
    Jet out(k, c_[0], u0_, v0_);
    for (int d = 0; d <= k; ++d)
      for (int j = 0; j <= d; ++j) out(d - j, j) = (*this)(d - j, j);
    return out;
  }

  /// d/du; the result has one order less.
  Jet du() const { return derivative(true); }
  Jet dv() const { return derivative(false); }

  template <class F>
  auto map(F&& f) const {
    using R = decltype(detail::evaluated(f(std::declval<const T&>())));
    Jet<R> out(order_, detail::evaluated(f(c_[0])), u0_, v0_);
    for (std::size_t k = 0; k < c_.size(); ++k) out.raw()[k] = detail::evaluated(f(c_[k]));
    return out;
  }

  std::vector<T>& raw() noexcept { return c_; }
  const std::vector<T>& raw() const noexcept { return c_; }

  Jet& operator+=(const Jet& o) {
    same_point(o);
    const int k = std::min(order_, o.order_);
    if (k < order_) *this = truncated(k);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    same_point(o);
    const int k = std::min(order_, o.order_);
    if (k < order_) *this = truncated(k);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator-(const Jet& a) {
    return a.map([](const T& x) { return detail::evaluated(-x); });
  }

  template <class O>
  void same_point(const Jet<O>& o) const {
    if (u0_ != o.u0() || v0_ != o.v0())
      throw GeometryError(ErrorKind::jet_order, "jets at different base points");
  }

 private:
  Jet derivative(bool along_u) const {
    if (order_ == 0) throw GeometryError(ErrorKind::jet_order, "cannot differentiate order-0 jet");
    Jet out(order_ - 1, c_[0], u0_, v0_);
    for (int d = 0; d < order_; ++d)
      for (int j = 0; j <= d; ++j) {
        const int i = d - j;
        out(i, j) = along_u ? detail::evaluated((*this)(i + 1, j) * double(i + 1))
                            : detail::evaluated((*this)(i, j + 1) * double(j + 1));
      }
    return out;
  }

  int order_ = 0;
  double u0_ = 0.0;
  double v0_ = 0.0;
  std::vector<T> c_;
};

/// Truncated Cauchy product with an arbitrary bilinear coefficient product.
template <class A, class B, class F>
auto cauchy(const Jet<A>& a, const Jet<B>& b, F&& f) {
  a.same_point(b);
  const int k = std::min(a.order(), b.order());
  using R = decltype(detail::evaluated(f(a.value(), b.value())));
  Jet<R> out(k, detail::evaluated(f(a.value(), b.value())), a.u0(), a.v0());
  for (int d = 0; d <= k; ++d)
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      R acc = detail::evaluated(f(a(0, 0), b(i, j)));
      for (int i1 = 0; i1 <= i; ++i1)
        for (int j1 = 0; j1 <= j; ++j1)
          if (i1 + j1 > 0) acc += f(a(i1, j1), b(i - i1, j - j1));
      out(i, j) = std::move(acc);
    }
  return out;
}

template <class A, class B>
auto operator*(const Jet<A>& a, const Jet<B>& b) {
  return cauchy(a, b, [](const A& x, const B& y) { return x * y; });
}

template <class T, class S>
  requires(std::is_arithmetic_v<S> || std::is_same_v<S, cplx>)
auto operator*(const Jet<T>& a, S s) {
  return a.map([s](const T& x) { return x * s; });
}

template <class T, class S>
  requires(std::is_arithmetic_v<S> || std::is_same_v<S, cplx>)
auto operator*(S s, const Jet<T>& a) {
  return a.map([s](const T& x) { return x * s; });
}

/// Left or right multiplication by a constant coefficient.
template <class T, class C>
auto left_multiply(const C& m, const Jet<T>& a) {
  return a.map([&m](const T& x) { return m * x; });
}

template <class T>
auto transpose(const Jet<T>& a) {
  return a.map([](const T& x) { return x.transpose(); });
}

inline CVec complexify(const Vec& v) { return v.cast<cplx>(); }
inline CMat complexify(const Mat& m) { return m.cast<cplx>(); }
inline cplx complexify(double x) { return {x, 0.0}; }
inline const CVec& complexify(const CVec& v) { return v; }
inline const CMat& complexify(const CMat& m) { return m; }
inline cplx complexify(cplx x) { return x; }

template <class T>
auto complexify(const Jet<T>& a) {
  return a.map([](const T& x) { return complexify(x); });
}

/// Constant-coefficient directional derivative cu*d/du + cv*d/dv.
template <class T>
auto directional(const Jet<T>& a, cplx cu, cplx cv) {
  return complexify(a.du()) * cu + complexify(a.dv()) * cv;
}

/// Jet of a scalar or scalar-like variable u - u0 at (u0, v0).
inline Jet<double> variable_u(int order, double u0, double v0) {
  Jet<double> j = Jet<double>::constant(order, u0, u0, v0);
  if (order >= 1) j(1, 0) = 1.0;
  return j;
}

inline Jet<double> variable_v(int order, double u0, double v0) {
  Jet<double> j = Jet<double>::constant(order, v0, u0, v0);
  if (order >= 1) j(0, 1) = 1.0;
  return j;
}

/// 1/a for scalar jets (real or complex).
template <class S>
Jet<S> reciprocal(const Jet<S>& a) {
  const S a0 = a.value();
  if (std::abs(a0) <= 1e-300)
    throw GeometryError(ErrorKind::jet_domain, "division by jet with vanishing constant term");
  Jet<S> x(a.order(), S{0}, a.u0(), a.v0());
  x(0, 0) = S{1} / a0;
  for (int d = 1; d <= a.order(); ++d)
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      S acc{0};
      for (int i1 = 0; i1 <= i; ++i1)
        for (int j1 = 0; j1 <= j; ++j1) {
          if (i1 == 0 && j1 == 0) continue;
          acc += a(i1, j1) * x(i - i1, j - j1);
        }
      x(i, j) = -acc / a0;
    }
  return x;
}

template <class S>
Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  return a * reciprocal(b);
}

/// Inverse of a square-matrix-valued jet.
template <class M>
Jet<M> inverse_matrix(const Jet<M>& a) {
  const M a0 = a.value();
  Eigen::FullPivLU<M> lu(a0);
  if (!lu.isInvertible())
    throw GeometryError(ErrorKind::jet_domain, "matrix jet with singular constant term");
  const M x0 = lu.inverse();
  Jet<M> x(a.order(), a0, a.u0(), a.v0());
  x(0, 0) = x0;
  for (int d = 1; d <= a.order(); ++d)
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      M acc = M::Zero(a0.rows(), a0.cols());
      for (int i1 = 0; i1 <= i; ++i1)
        for (int j1 = 0; j1 <= j; ++j1) {
          if (i1 == 0 && j1 == 0) continue;
          acc.noalias() += a(i1, j1) * x(i - i1, j - j1);
        }
      x(i, j) = -x0 * acc;
    }
  return x;
}

/// Composes a univariate function, given by its derivatives f^(k)(a0)
/// for k = 0..order, with the jet a.
template <class S>
Jet<S> compose(const Jet<S>& a, const std::vector<S>& derivs) {
  Jet<S> h = a;
  h(0, 0) = S{0};
  Jet<S> out = Jet<S>::constant(a.order(), derivs[0], a.u0(), a.v0());
  Jet<S> power = Jet<S>::constant(a.order(), S{1}, a.u0(), a.v0());
  for (int k = 1; k <= a.order(); ++k) {
    power = power * h;
    out += power * (derivs[static_cast<std::size_t>(k)] / factorial(k));
  }
  return out;
}

enum class Elementary { sin, cos, sinh, cosh, exp, log, sqrt, pow_const };

/// Elementary function of a real jet. `exponent` is used by pow_const.
inline Jet<double> elementary(const Jet<double>& a, Elementary fn, double exponent = 1.0) {
  const double x = a.value();
  const int n = a.order();
  std::vector<double> d(static_cast<std::size_t>(n + 1));
  switch (fn) {
    case Elementary::sin:
    case Elementary::cos: {
      const double s = std::sin(x), c = std::cos(x);
      const std::array<double, 4> cycle{s, c, -s, -c};
      const int shift = fn == Elementary::sin ? 0 : 1;
      for (int k = 0; k <= n; ++k) d[k] = cycle[static_cast<std::size_t>((k + shift) % 4)];
      break;
    }
    case Elementary::sinh:
      for (int k = 0; k <= n; ++k) d[k] = (k % 2 == 0) ? std::sinh(x) : std::cosh(x);
      break;
    case Elementary::cosh:
      for (int k = 0; k <= n; ++k) d[k] = (k % 2 == 0) ? std::cosh(x) : std::sinh(x);
      break;
    case Elementary::exp:
      for (int k = 0; k <= n; ++k) d[k] = std::exp(x);
      break;
    case Elementary::log:
      if (!(x > 0)) throw GeometryError(ErrorKind::jet_domain, "log of nonpositive value");
      d[0] = std::log(x);
      for (int k = 1; k <= n; ++k)
        d[k] = ((k % 2 == 1) ? 1.0 : -1.0) * factorial(k - 1) / std::pow(x, k);
      break;
    case Elementary::sqrt:
      exponent = 0.5;
      [[fallthrough]];
    case Elementary::pow_const: {
      const double rounded = std::round(exponent);
      const bool integral = std::abs(exponent - rounded) < 1e-15;
      if (integral && rounded >= 0) {
        // Exact for negative bases too.
        Jet<double> out = Jet<double>::constant(n, 1.0, a.u0(), a.v0());
        for (int k = 0; k < static_cast<int>(rounded); ++k) out = out * a;
        return out;
      }
      if (integral && std::abs(x) > 1e-300) {
        Jet<double> inv = reciprocal(a);
        Jet<double> out = Jet<double>::constant(n, 1.0, a.u0(), a.v0());
        for (int k = 0; k < static_cast<int>(-rounded); ++k) out = out * inv;
        return out;
      }
      if (!(x > 0))
        throw GeometryError(ErrorKind::jet_domain,
                            fn == Elementary::sqrt ? "sqrt of nonpositive value"
                                                   : "non-integer power of nonpositive value");
      double coef = 1.0;
      for (int k = 0; k <= n; ++k) {
        d[k] = coef * std::pow(x, exponent - k);
        coef *= (exponent - k);
      }
      break;
    }
  }
  return compose(a, d);
}

using ScalarJet = Jet<double>;
using VecJet = Jet<Vec>;
using MatJet = Jet<Mat>;
using CScalarJet = Jet<cplx>;
using CVecJet = Jet<CVec>;
using CMatJet = Jet<CMat>;

/// Ambient-vector jet from per-component scalar jets.
inline VecJet assemble(const std::vector<ScalarJet>& comps) {
  const int n = static_cast<int>(comps.size());
  const ScalarJet& c0 = comps.at(0);
  VecJet out(c0.order(), Vec::Zero(n), c0.u0(), c0.v0());
  for (int k = 0; k < n; ++k) {
    comps[k].same_point(c0);
    if (comps[k].order() != c0.order())
      throw GeometryError(ErrorKind::jet_order, "component jets of different order");
    for (std::size_t m = 0; m < out.raw().size(); ++m) out.raw()[m](k) = comps[k].raw()[m];
  }
  return out;
}

inline ScalarJet component(const VecJet& v, int k) {
  return v.map([k](const Vec& x) { return x(k); });
}

/// Bilinear ambient pairing of two vector jets.
template <class A, class B>
auto inner(const AmbientSpace& space, const Jet<A>& a, const Jet<B>& b) {
  return cauchy(a, b, [&space](const A& x, const B& y) { return space.inner(x, y); });
}

/// Jet of the outer product x (G y)^T, i.e. the endomorphism z -> (y,z) x.
template <class A, class B>
auto outer_lowered(const AmbientSpace& space, const Jet<A>& x, const Jet<B>& y) {
  return cauchy(x, y,
                [&space](const A& a, const B& b) { return detail::evaluated(a * space.lower(b).transpose()); });
}

}  // namespace lightcone
