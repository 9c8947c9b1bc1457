#pragma once

#include <Eigen/Dense>

#include <vector>

namespace nmsub {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A point, tangent vector or ambient vector split into one dense block per
/// manifold component. Non-product manifolds use a single block; vectors are
/// stored as n-by-1 matrices.
using Blocks = std::vector<Matrix>;

namespace blocks {

inline Blocks zerosLike(const Blocks& a) {
  Blocks out;
  out.reserve(a.size());
  for (const Matrix& m : a) out.push_back(Matrix::Zero(m.rows(), m.cols()));
  return out;
}

inline bool sameShape(const Blocks& a, const Blocks& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return false;
  return true;
}

inline double dot(const Blocks& a, const Blocks& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i].array() * b[i].array()).sum();
  return s;
}

inline double squaredNorm(const Blocks& a) {
  double s = 0.0;
  for (const Matrix& m : a) s += m.squaredNorm();
  return s;
}

inline double norm(const Blocks& a) { return std::sqrt(squaredNorm(a)); }

inline Blocks scaled(const Blocks& a, double c) {
  Blocks out = a;
  for (Matrix& m : out) m *= c;
  return out;
}

inline Blocks sum(const Blocks& a, const Blocks& b) {
  Blocks out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Blocks difference(const Blocks& a, const Blocks& b) {
  Blocks out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

// y += c * x
inline void axpy(double c, const Blocks& x, Blocks& y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

inline Index totalSize(const Blocks& a) {
  Index n = 0;
  for (const Matrix& m : a) n += m.size();
  return n;
}

/// Column-stacks all blocks into one flat vector (used by L-BFGS memory).
inline Vector flatten(const Blocks& a) {
  Vector v(totalSize(a));
  Index off = 0;
  for (const Matrix& m : a) {
    v.segment(off, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    off += m.size();
  }
  return v;
}

/// Inverse of flatten, with shapes taken from a template.
inline Blocks unflatten(const Vector& v, const Blocks& shape) {
  Blocks out = zerosLike(shape);
  Index off = 0;
  for (Matrix& m : out) {
    m = Eigen::Map<const Matrix>(v.data() + off, m.rows(), m.cols());
    off += m.size();
  }
  return out;
}

}  // namespace blocks
}  // namespace nmsub
