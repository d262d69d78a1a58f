#pragma once

#include "c4out/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

namespace c4out {

// t x n matrix: rows are realisations, columns are marginals.
template <typename Scalar>
using DataMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using DataMatrix = DataMatrixT<double>;

template <typename Scalar>
using SquareMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

inline constexpr int kMaxTensorOrder = 4;

// Throws unless X has at least two rows, one column and only finite values.
template <typename Derived>
void check_data(const Eigen::MatrixBase<Derived>& X)
{
  if (X.cols() < 1)
    throw DomainError("data matrix has no columns");
  if (X.rows() < 2)
    throw InsufficientDataError("data matrix needs at least 2 rows, got " + std::to_string(X.rows()));
  if (!X.allFinite())
    throw DomainError("data matrix contains non-finite values");
}

namespace detail {

inline std::int64_t binomial(std::int64_t m, std::int64_t k)
{
  if (k < 0 || m < k)
    return 0;
  std::int64_t r = 1;
  for (std::int64_t i = 1; i <= k; ++i)
    r = r * (m - k + i) / i;
  return r;
}

inline void check_order(int order)
{
  if (order < 2 || order > kMaxTensorOrder)
    throw InvalidOrderError(order);
}

} // namespace detail

using MultiIndex = std::array<Index, kMaxTensorOrder>;

/// Fully symmetric order-d tensor over n dimensions.
///
/// Only the entries with a non-decreasing multi-index i1 <= ... <= id are
/// stored, C(n+d-1, d) values in colexicographic order. Accessors sort the
/// requested multi-index, so every permutation reads the same stored value.
template <typename Scalar>
class SymmetricTensor
{
public:
  SymmetricTensor(int order, Index dim) : order_(order), dim_(dim)
  {
    detail::check_order(order);
    if (dim < 1)
      throw DomainError("tensor dimension must be positive");
    values_.assign(static_cast<std::size_t>(stored_size(order, dim)), Scalar(0));
  }

  static Index stored_size(int order, Index dim) { return detail::binomial(dim + order - 1, order); }

  int order() const noexcept { return order_; }
  Index dim() const noexcept { return dim_; }
  Index size() const noexcept { return static_cast<Index>(values_.size()); }
  std::span<const Scalar> values() const noexcept { return values_; }
  std::span<Scalar> values() noexcept { return values_; }

  /// Storage position of a multi-index given in any order.
  Index offset(std::span<const Index> idx) const
  {
    if (static_cast<int>(idx.size()) != order_)
      throw DomainError("multi-index length does not match tensor order");
    MultiIndex s{};
    std::copy(idx.begin(), idx.end(), s.begin());
    std::sort(s.begin(), s.begin() + order_);
    if (s[0] < 0 || s[order_ - 1] >= dim_)
      throw DomainError("multi-index out of range");
    return sorted_offset(s);
  }

  Scalar at(std::span<const Index> idx) const { return values_[static_cast<std::size_t>(offset(idx))]; }
  Scalar& at(std::span<const Index> idx) { return values_[static_cast<std::size_t>(offset(idx))]; }

  template <typename... I>
  Scalar operator()(I... idx) const
  {
    const std::array<Index, sizeof...(I)> a{static_cast<Index>(idx)...};
    return at(a);
  }

  template <typename... I>
  Scalar& operator()(I... idx)
  {
    const std::array<Index, sizeof...(I)> a{static_cast<Index>(idx)...};
    return at(a);
  }

  /// Visits every stored multi-index (sorted ascending) with its storage offset.
  template <typename F>
  void for_each_index(F&& f) const
  {
    visit_indices(order_, dim_, std::forward<F>(f));
  }

  /// Mode-1 unfolding: n x n^(d-1) matrix, column index is i2 + n*i3 + n^2*i4.
  SquareMatrixT<Scalar> unfold() const
  {
    Index cols = 1;
    for (int k = 1; k < order_; ++k)
      cols *= dim_;
    SquareMatrixT<Scalar> U(dim_, cols);
    MultiIndex idx{};
    for (Index c = 0; c < cols; ++c) {
      Index rem = c;
      for (int k = 1; k < order_; ++k) {
        idx[k] = rem % dim_;
        rem /= dim_;
      }
      for (Index i = 0; i < dim_; ++i) {
        idx[0] = i;
        U(i, c) = at(std::span<const Index>(idx.data(), static_cast<std::size_t>(order_)));
      }
    }
    return U;
  }

  friend bool operator==(const SymmetricTensor& a, const SymmetricTensor& b)
  {
    return a.order_ == b.order_ && a.dim_ == b.dim_ && a.values_ == b.values_;
  }

  template <typename F>
  static void visit_indices(int order, Index dim, F&& f)
  {
    MultiIndex idx{};
    visit_rec(order, dim, 0, 0, idx, f);
  }

private:
  Index sorted_offset(const MultiIndex& s) const
  {
    // Colex rank of the strictly increasing combination s[k] + k.
    Index r = 0;
    for (int k = 0; k < order_; ++k)
      r += detail::binomial(s[k] + k, k + 1);
    return r;
  }

  template <typename F>
  static void visit_rec(int order, Index dim, int pos, Index lo, MultiIndex& idx, F& f)
  {
    if (pos == order) {
      Index r = 0;
      for (int k = 0; k < order; ++k)
        r += detail::binomial(idx[k] + k, k + 1);
      f(std::span<const Index>(idx.data(), static_cast<std::size_t>(order)), r);
      return;
    }
    for (Index i = lo; i < dim; ++i) {
      idx[pos] = i;
      visit_rec(order, dim, pos + 1, i, idx, f);
    }
  }

  int order_;
  Index dim_;
  std::vector<Scalar> values_;
};

/// Column-centred copy of X.
template <typename Derived>
auto center(const Eigen::MatrixBase<Derived>& X)
{
  using Scalar = typename Derived::Scalar;
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mu = X.colwise().mean();
  DataMatrixT<Scalar> Y = X.rowwise() - mu;
  return Y;
}

/// Central moment tensor of order d, normalised by t.
template <typename Derived>
SymmetricTensor<typename Derived::Scalar> central_moment(const Eigen::MatrixBase<Derived>& X, int order)
{
  using Scalar = typename Derived::Scalar;
  detail::check_order(order);
  check_data(X);
  const DataMatrixT<Scalar> Y = center(X);
  const Index t = Y.rows();
  const Index n = Y.cols();
  const Scalar inv_t = Scalar(1) / static_cast<Scalar>(t);

  SymmetricTensor<Scalar> m(order, n);
  if (order == 2) {
    m.for_each_index([&](std::span<const Index> i, Index off) {
      m.values()[off] = Y.col(i[0]).dot(Y.col(i[1])) * inv_t;
    });
    return m;
  }

  // Pairwise column products, reused across all higher-order entries.
  const Index npairs = n * (n + 1) / 2;
  DataMatrixT<Scalar> P(t, npairs);
  auto pair_col = [n](Index a, Index b) { return a * n - a * (a - 1) / 2 + (b - a); };
  for (Index a = 0; a < n; ++a)
    for (Index b = a; b < n; ++b)
      P.col(pair_col(a, b)) = Y.col(a).cwiseProduct(Y.col(b));

  if (order == 3) {
    m.for_each_index([&](std::span<const Index> i, Index off) {
      m.values()[off] = P.col(pair_col(i[0], i[1])).dot(Y.col(i[2])) * inv_t;
    });
  } else {
    m.for_each_index([&](std::span<const Index> i, Index off) {
      m.values()[off] = P.col(pair_col(i[0], i[1])).dot(P.col(pair_col(i[2], i[3]))) * inv_t;
    });
  }
  return m;
}

template <typename Scalar>
struct Cumulants
{
  SymmetricTensor<Scalar> c2;
  SymmetricTensor<Scalar> c3;
  SymmetricTensor<Scalar> c4;
};

/// Fourth cumulant from the 4th and 2nd central moments (three-pairing formula).
template <typename Scalar>
SymmetricTensor<Scalar> fourth_cumulant(const SymmetricTensor<Scalar>& m4, const SymmetricTensor<Scalar>& m2)
{
  SymmetricTensor<Scalar> c4 = m4;
  c4.for_each_index([&](std::span<const Index> i, Index off) {
    c4.values()[off] -= m2(i[0], i[1]) * m2(i[2], i[3]) + m2(i[0], i[2]) * m2(i[1], i[3]) +
                        m2(i[0], i[3]) * m2(i[1], i[2]);
  });
  return c4;
}

template <typename Derived>
SymmetricTensor<typename Derived::Scalar> fourth_cumulant(const Eigen::MatrixBase<Derived>& X)
{
  return fourth_cumulant(central_moment(X, 4), central_moment(X, 2));
}

template <typename Derived>
Cumulants<typename Derived::Scalar> cumulants_upto_4(const Eigen::MatrixBase<Derived>& X)
{
  auto c2 = central_moment(X, 2);
  auto c3 = central_moment(X, 3);
  auto c4 = fourth_cumulant(central_moment(X, 4), c2);
  return {std::move(c2), std::move(c3), std::move(c4)};
}

/// n x n matrix contracting the tensor with itself over all modes but the first.
/// Computed as U U^T of the mode-1 unfolding; only the lower triangle is
/// accumulated, so the result is exactly symmetric.
template <typename Scalar>
SquareMatrixT<Scalar> contract_self(const SymmetricTensor<Scalar>& C)
{
  const SquareMatrixT<Scalar> U = C.unfold();
  SquareMatrixT<Scalar> M = SquareMatrixT<Scalar>::Zero(C.dim(), C.dim());
  M.template selfadjointView<Eigen::Lower>().rankUpdate(U);
  M.template triangularView<Eigen::StrictlyUpper>() = M.transpose();
  return M;
}

template <typename Scalar>
struct SpectralDirections
{
  SquareMatrixT<Scalar> directions;                     // n x r, column i is W_i
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> eigenvalues;  // descending, length r
};

namespace detail {

template <typename Derived>
Index dominant_coordinate(const Eigen::MatrixBase<Derived>& v)
{
  Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  return arg;
}

} // namespace detail

/// First r eigenpairs of a symmetric matrix, eigenvalues descending.
///
/// Equal eigenvalues (within 1e-12 relative) are ordered by the position of
/// the dominant coordinate of their eigenvector, lowest first. Each direction is
/// flipped so that its first non-negligible coordinate is positive.
template <typename Derived>
SpectralDirections<typename Derived::Scalar> leading_directions(const Eigen::MatrixBase<Derived>& M, Index r)
{
  using Scalar = typename Derived::Scalar;
  const Index n = M.rows();
  if (M.cols() != n)
    throw InvalidMatrixError("matrix is not square");
  if (r < 1 || r > n)
    throw DomainError("direction count r=" + std::to_string(r) + " outside [1, " + std::to_string(n) + "]");
  if (!M.allFinite())
    throw InvalidMatrixError("matrix contains non-finite values");
  const Scalar scale = std::max(Scalar(1), M.cwiseAbs().maxCoeff());
  const Scalar asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > Scalar(1e-8) * scale) {
    std::ostringstream os;
    os << "matrix is not symmetric (max asymmetry " << asym << ")";
    throw InvalidMatrixError(os.str());
  }

  Eigen::SelfAdjointEigenSolver<SquareMatrixT<Scalar>> es(M);
  if (es.info() != Eigen::Success)
    throw NumericError("symmetric eigensolver did not converge");
  const auto& vals = es.eigenvalues();
  const auto& vecs = es.eigenvectors();

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index(0));
  std::vector<Index> dominant(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    dominant[static_cast<std::size_t>(i)] = detail::dominant_coordinate(vecs.col(i));
  const Scalar tie_tol = Scalar(1e-12) * std::max(Scalar(1), vals.cwiseAbs().maxCoeff());
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    if (std::abs(vals(a) - vals(b)) > tie_tol)
      return vals(a) > vals(b);
    return dominant[static_cast<std::size_t>(a)] < dominant[static_cast<std::size_t>(b)];
  });

  SpectralDirections<Scalar> out;
  out.directions.resize(n, r);
  out.eigenvalues.resize(r);
  for (Index k = 0; k < r; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    auto w = vecs.col(src);
    Scalar sign = 1;
    for (Index i = 0; i < n; ++i) {
      if (std::abs(w(i)) > Scalar(1e-12)) {
        sign = w(i) < 0 ? Scalar(-1) : Scalar(1);
        break;
      }
    }
    out.directions.col(k) = sign * w;
    out.eigenvalues(k) = vals(src);
  }
  return out;
}

/// Inverse principal square root of the t-normalised sample covariance of X.
/// Throws SingularCovarianceError when an eigenvalue falls below 1e-10 of the largest.
template <typename Derived>
SquareMatrixT<typename Derived::Scalar> inverse_sqrt_covariance(const Eigen::MatrixBase<Derived>& X)
{
  using Scalar = typename Derived::Scalar;
  check_data(X);
  const DataMatrixT<Scalar> Y = center(X);
  const SquareMatrixT<Scalar> C2 = (Y.transpose() * Y) / static_cast<Scalar>(Y.rows());
  Eigen::SelfAdjointEigenSolver<SquareMatrixT<Scalar>> es(C2);
  if (es.info() != Eigen::Success)
    throw NumericError("covariance eigensolver did not converge");
  const auto& lambda = es.eigenvalues();
  const Scalar top = lambda.maxCoeff();
  const Scalar floor = Scalar(1e-10) * top;
  for (Index i = 0; i < lambda.size(); ++i) {
    if (!(lambda(i) > floor) || !(top > 0)) {
      std::ostringstream os;
      os << "singular covariance: eigenvalue " << lambda(i) << " <= 1e-10 * " << top;
      throw SingularCovarianceError(os.str());
    }
  }
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> inv_root = lambda.cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_root.asDiagonal() * es.eigenvectors().transpose();
}

/// (X - mu) C2^{-1/2}: zero mean, identity sample covariance.
template <typename Derived>
DataMatrixT<typename Derived::Scalar> whiten(const Eigen::MatrixBase<Derived>& X)
{
  const auto W = inverse_sqrt_covariance(X);
  return center(X) * W;
}

/// t-normalised sample covariance.
template <typename Derived>
SquareMatrixT<typename Derived::Scalar> covariance(const Eigen::MatrixBase<Derived>& X)
{
  check_data(X);
  const auto Y = center(X);
  return (Y.transpose() * Y) / static_cast<typename Derived::Scalar>(Y.rows());
}

/// Pearson correlation matrix; zero-variance columns are rejected.
template <typename Derived>
SquareMatrixT<typename Derived::Scalar> correlation(const Eigen::MatrixBase<Derived>& X)
{
  using Scalar = typename Derived::Scalar;
  SquareMatrixT<Scalar> C = covariance(X);
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sd = C.diagonal().cwiseSqrt();
  if ((sd.array() <= 0).any())
    throw DomainError("correlation of a constant column is undefined");
  C = sd.cwiseInverse().asDiagonal() * C * sd.cwiseInverse().asDiagonal();
  C.diagonal().setOnes();
  return C;
}

} // namespace c4out
