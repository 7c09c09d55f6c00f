#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "wcr/numerics/error.hpp"

namespace wcr {

/// Small dense symmetric matrix. Only the upper triangle is ever written; the
/// lower triangle is mirrored, so symmetry is exact.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim) : m_(Eigen::MatrixXd::Zero(idx(dim), idx(dim))) {}

  /// Takes the upper triangle of `a`.
  static SymMatrix from_upper(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw DomainError("SymMatrix: matrix must be square");
    SymMatrix s(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = i; j < a.cols(); ++j) s.set(i, j, a(i, j));
    return s;
  }

  static SymMatrix identity(std::size_t dim) {
    SymMatrix s(dim);
    for (std::size_t i = 0; i < dim; ++i) s.set(i, i, 1.0);
    return s;
  }

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }

  double operator()(std::size_t i, std::size_t j) const { return m_(idx(i), idx(j)); }

  template <class I, class J>
  void set(I i, J j, double v) {
    m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    m_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
  }

  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

  double trace() const { return m_.trace(); }

  SymMatrix scaled(double s) const {
    SymMatrix r = *this;
    r.m_ *= s;
    return r;
  }

  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    check_same(a, b);
    SymMatrix r = a;
    r.m_ -= b.m_;
    return r;
  }
  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    check_same(a, b);
    SymMatrix r = a;
    r.m_ += b.m_;
    return r;
  }

  /// Ascending eigenvalues.
  std::vector<double> eigenvalues() const {
    if (dim() == 0) return {};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
  }

  double min_eigenvalue() const {
    const auto ev = eigenvalues();
    return ev.empty() ? 0.0 : ev.front();
  }

  double max_abs_eigenvalue() const {
    double r = 0.0;
    for (double v : eigenvalues()) r = std::max(r, std::abs(v));
    return r;
  }

  /// Unit eigenvector of the smallest eigenvalue.
  Eigen::VectorXd min_eigenvector() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_);
    return es.eigenvectors().col(0);
  }

  /// PSD up to an eigenvalue floor of -rel_tol * |trace|.
  bool is_psd(double rel_tol = 1e-10) const {
    return min_eigenvalue() >= -rel_tol * std::abs(trace());
  }

  SymMatrix inverse() const {
    const auto ev = eigenvalues();
    double largest = 0.0;
    double smallest = std::numeric_limits<double>::infinity();
    for (double v : ev) {
      largest = std::max(largest, std::abs(v));
      smallest = std::min(smallest, std::abs(v));
    }
    if (ev.empty() || !(smallest > 1e-13 * largest)) {
      throw DomainError("SymMatrix::inverse: matrix is singular");
    }
    return from_upper(m_.ldlt().solve(Eigen::MatrixXd::Identity(m_.rows(), m_.cols())));
  }

  double max_abs_diff(const SymMatrix& other) const {
    check_same(*this, other);
    return (m_ - other.m_).cwiseAbs().maxCoeff();
  }

 private:
  static Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }
  static void check_same(const SymMatrix& a, const SymMatrix& b) {
    if (a.dim() != b.dim()) throw DomainError("SymMatrix: dimension mismatch");
  }

  Eigen::MatrixXd m_;
};

}  // namespace wcr
