#pragma once

// Linear algebra in the indefinite inner-product space R^{p+1,q+1}.
//
// The metric is diagonal: the first p+1 basis vectors are spacelike (+1),
// the remaining q+1 are timelike (-1). Bivectors are stored as skew (with
// respect to the metric) endomorphisms, so that the wedge a^b acts by
// (a^b)c = (a,c)b - (b,c)a.

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace lightcone {

inline constexpr int kMaxDim = 10;

using cplx = std::complex<double>;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using CMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

enum class ErrorKind {
  dimension_mismatch,
  degenerate_subspace,
  indeterminate_signature,
  wrong_signature,
  wrong_rank,
  jet_domain,
  jet_order,
  parse,
  unknown_identifier,
  arity,
  invalid_spec,
  not_conformal,
  not_null,
  branch_mismatch,
  internal,
};

class GeometryError : public std::runtime_error {
 public:
  GeometryError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// R^{p+1,q+1} with the diagonal metric (+...+, -...-).
class AmbientSpace {
 public:
  AmbientSpace(int p_plus, int q_plus) : p_plus_(p_plus), q_plus_(q_plus) {
    if (p_plus < 1 || q_plus < 1 || p_plus + q_plus > kMaxDim)
      throw GeometryError(ErrorKind::invalid_spec,
                          "ambient signature must satisfy p+1>=1, q+1>=1, total <= 10");
  }

  int p_plus() const noexcept { return p_plus_; }
  int q_plus() const noexcept { return q_plus_; }
  int dim() const noexcept { return p_plus_ + q_plus_; }
  double metric(int i) const noexcept { return i < p_plus_ ? 1.0 : -1.0; }

  Mat gram() const {
    Mat g = Mat::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) g(i, i) = metric(i);
    return g;
  }

  Vec basis(int i) const {
    Vec e = Vec::Zero(dim());
    e(i) = 1.0;
    return e;
  }

  /// Bilinear (never Hermitian) pairing, also for complexified vectors.
  template <class A, class B>
  auto inner(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) const {
    check(x.size());
    check(y.size());
    using S = decltype(x(0) * y(0));
    S s{0};
    for (int i = 0; i < dim(); ++i) s += metric(i) * (x(i) * y(i));
    return s;
  }

  /// G x, the covector paired with x.
  template <class A>
  auto lower(const Eigen::MatrixBase<A>& x) const {
    check(x.size());
    typename A::PlainObject out = x;
    for (int i = p_plus_; i < dim(); ++i) out(i) = -out(i);
    return out;
  }

  void check(Eigen::Index n) const {
    if (n != dim())
      throw GeometryError(ErrorKind::dimension_mismatch,
                          "vector of size " + std::to_string(n) + " in ambient dimension " +
                              std::to_string(dim()));
  }

  friend bool operator==(const AmbientSpace& a, const AmbientSpace& b) {
    return a.p_plus_ == b.p_plus_ && a.q_plus_ == b.q_plus_;
  }

 private:
  int p_plus_;
  int q_plus_;
};

/// (a^b)c = (a,c)b - (b,c)a
template <class A, class B, class C>
auto wedge_apply(const AmbientSpace& space, const Eigen::MatrixBase<A>& a,
                 const Eigen::MatrixBase<B>& b, const Eigen::MatrixBase<C>& c) {
  return (space.inner(a, c) * b - space.inner(b, c) * a).eval();
}

/// Matrix of a^b acting on column vectors: b (Ga)^T - a (Gb)^T.
template <class A, class B>
auto wedge_matrix(const AmbientSpace& space, const Eigen::MatrixBase<A>& a,
                  const Eigen::MatrixBase<B>& b) {
  return (b * space.lower(a).transpose() - a * space.lower(b).transpose()).eval();
}

/// Invariant pairing on bivectors; (a^b, c^d) = (a,c)(b,d) - (a,d)(b,c).
/// On skew endomorphisms this is -tr(xi eta)/2.
template <class A, class B>
auto pairing(const Eigen::MatrixBase<A>& xi, const Eigen::MatrixBase<B>& eta) {
  return -0.5 * (xi * eta).trace();
}

template <class A, class B>
auto commutator(const Eigen::MatrixBase<A>& xi, const Eigen::MatrixBase<B>& eta) {
  return (xi * eta - eta * xi).eval();
}

/// Frobenius norm in the standard basis. Because the basis is orthonormal,
/// this is the positive-definite norm obtained from the indefinite pairing
/// by flipping the sign of its negative part.
template <class A>
double norm(const Eigen::MatrixBase<A>& x) {
  return x.norm();
}

/// Bivector: a skew endomorphism of R^{p+1,q+1}.
class Bivector {
 public:
  Bivector(const AmbientSpace& space, Mat m) : space_(space), m_(std::move(m)) {
    if (m_.rows() != space.dim() || m_.cols() != space.dim())
      throw GeometryError(ErrorKind::dimension_mismatch, "bivector matrix size");
  }

  static Bivector wedge(const AmbientSpace& space, const Vec& a, const Vec& b) {
    return {space, wedge_matrix(space, a, b)};
  }

  Vec apply(const Vec& x) const {
    space_.check(x.size());
    return m_ * x;
  }

  const Mat& matrix() const noexcept { return m_; }
  const AmbientSpace& space() const noexcept { return space_; }

  friend Bivector operator+(const Bivector& a, const Bivector& b) {
    a.same(b);
    return {a.space_, a.m_ + b.m_};
  }
  friend Bivector operator*(double s, const Bivector& a) { return {a.space_, s * a.m_}; }

  friend double pairing(const Bivector& a, const Bivector& b) {
    a.same(b);
    return pairing(a.m_, b.m_);
  }
  friend Bivector commutator(const Bivector& a, const Bivector& b) {
    a.same(b);
    return {a.space_, commutator(a.m_, b.m_)};
  }

  /// max |(xi x, y) + (x, xi y)| over basis pairs.
  double skewness_defect() const {
    Mat g = space_.gram();
    return (m_.transpose() * g + g * m_).cwiseAbs().maxCoeff();
  }

 private:
  void same(const Bivector& o) const {
    if (!(space_ == o.space_))
      throw GeometryError(ErrorKind::dimension_mismatch, "bivectors from different spaces");
  }

  AmbientSpace space_;
  Mat m_;
};

struct Signature {
  int positive = 0;
  int negative = 0;
  int nullity = 0;
  bool indeterminate = false;

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.positive == b.positive && a.negative == b.negative && a.nullity == b.nullity;
  }
};

inline constexpr double kRankTolerance = 1e-9;

/// Signature of a symmetric form from eigenvalue signs; |lambda| below
/// tol * max|lambda| counts as null, and eigenvalues within a factor ten
/// of that cutoff mark the result indeterminate.
inline Signature signature_of_gram(const Eigen::MatrixXd& gram, double tol = kRankTolerance) {
  Signature s;
  if (gram.rows() == 0) return s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const double cut = tol * (scale > 0 ? scale : 1.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double l = ev(i);
    if (std::abs(l) < cut) {
      ++s.nullity;
    } else {
      if (std::abs(l) < 10 * cut) s.indeterminate = true;
      (l > 0 ? s.positive : s.negative)++;
    }
  }
  return s;
}

/// Euclidean-orthonormal basis of the column span of b, with numerical rank.
inline Eigen::MatrixXd orthonormal_span(const Eigen::MatrixXd& b, double tol = 1e-10) {
  if (b.cols() == 0) return Eigen::MatrixXd(b.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, sv(0))) ++rank;
  return svd.matrixU().leftCols(rank);
}

/// Right null space of m (Euclidean orthonormal columns).
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double tol = 1e-10) {
  const auto n = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = sv.size() ? std::max(sv(0), 1e-300) : 1.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * scale) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

/// Sine of the largest principal angle between two column spans
/// (Euclidean); 1 if the dimensions differ.
inline double max_principal_angle_sin(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd qa = orthonormal_span(a);
  Eigen::MatrixXd qb = orthonormal_span(b);
  if (qa.cols() != qb.cols()) return 1.0;
  if (qa.cols() == 0) return 0.0;
  Eigen::MatrixXd r = qb - qa * (qa.transpose() * qb);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return std::min(1.0, svd.singularValues()(0));
}

inline double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return std::asin(max_principal_angle_sin(a, b));
}

/// A pointwise subspace given by linearly independent spanning vectors.
class SubspaceFrame {
 public:
  SubspaceFrame(const AmbientSpace& space, Eigen::MatrixXd basis)
      : space_(space), basis_(std::move(basis)) {
    if (basis_.rows() != space.dim())
      throw GeometryError(ErrorKind::dimension_mismatch, "frame vectors have wrong size");
    if (basis_.cols() > 0) {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_);
      const auto& sv = svd.singularValues();
      if (sv(sv.size() - 1) <= kRankTolerance * std::max(1.0, sv(0)))
        throw GeometryError(ErrorKind::wrong_rank, "spanning set is linearly dependent");
    }
    Eigen::MatrixXd g = space.gram().cast<double>();
    gram_ = basis_.transpose() * g * basis_;
    gram_ = 0.5 * (gram_ + gram_.transpose());
    signature_ = signature_of_gram(gram_);
  }

  static SubspaceFrame span(const AmbientSpace& space, const std::vector<Vec>& vs) {
    Eigen::MatrixXd b(space.dim(), static_cast<Eigen::Index>(vs.size()));
    for (std::size_t i = 0; i < vs.size(); ++i) {
      space.check(vs[i].size());
      b.col(static_cast<Eigen::Index>(i)) = vs[i];
    }
    return {space, b};
  }

  const AmbientSpace& space() const noexcept { return space_; }
  int rank() const noexcept { return static_cast<int>(basis_.cols()); }
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  const Eigen::MatrixXd& gram() const noexcept { return gram_; }
  const Signature& signature() const noexcept { return signature_; }

  SubspaceFrame orthogonal_complement() const {
    Eigen::MatrixXd g = space_.gram().cast<double>();
    Eigen::MatrixXd ns = null_space(basis_.transpose() * g);
    return {space_, ns};
  }

  SubspaceFrame intersect(const SubspaceFrame& other) const {
    Eigen::MatrixXd stacked(space_.dim(), rank() + other.rank());
    stacked << basis_, -other.basis_;
    Eigen::MatrixXd ns = null_space(stacked);
    Eigen::MatrixXd vecs = basis_ * ns.topRows(rank());
    return {space_, orthonormal_span(vecs)};
  }

  /// Orthogonal projection onto the frame; requires nondegeneracy.
  Vec project(const Vec& x) const {
    space_.check(x.size());
    if (signature_.nullity > 0)
      throw GeometryError(ErrorKind::degenerate_subspace, "projection onto degenerate subspace");
    if (signature_.indeterminate)
      throw GeometryError(ErrorKind::indeterminate_signature, "indeterminate signature");
    Eigen::VectorXd rhs = basis_.transpose() * space_.lower(x).cast<double>();
    Eigen::VectorXd c = gram_.lu().solve(rhs);
    Vec out = basis_ * c;
    return out;
  }

 private:
  AmbientSpace space_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd gram_;
  Signature signature_;
};

/// Lexicographic comparison, larger first.
inline bool lex_greater(const Vec& a, const Vec& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i) - b(i)) > 1e-12) return a(i) > b(i);
  }
  return false;
}

/// Unit (Euclidean) vector whose first nonzero entry is positive.
inline Vec sign_normalized(Vec v) {
  v /= v.norm();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0) v = -v;
      break;
    }
  }
  return v;
}

/// The two null lines of a (1,1)-plane, as unit (Euclidean) vectors with
/// positive leading entry, ordered lexicographically (larger first).
inline std::pair<Vec, Vec> null_lines_in_plane(const SubspaceFrame& plane) {
  if (plane.rank() != 2)
    throw GeometryError(ErrorKind::wrong_rank, "null lines need a 2-plane");
  const Signature& s = plane.signature();
  if (s.indeterminate || s.positive != 1 || s.negative != 1)
    throw GeometryError(ErrorKind::wrong_signature, "no null lines: plane is not of signature (1,1)");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(plane.gram());
  const auto& ev = es.eigenvalues();  // ascending: negative then positive
  Eigen::VectorXd timelike = plane.basis() * es.eigenvectors().col(0) / std::sqrt(-ev(0));
  Eigen::VectorXd spacelike = plane.basis() * es.eigenvectors().col(1) / std::sqrt(ev(1));
  Vec a = sign_normalized(Vec(spacelike + timelike));
  Vec b = sign_normalized(Vec(spacelike - timelike));
  if (lex_greater(b, a)) std::swap(a, b);
  return {a, b};
}

}  // namespace lightcone
