#pragma once

#include "nmsub/blocks.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace nmsub {

/// Error for malformed inputs (shape mismatches, invalid parameters).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class StiefelRetraction { Polar, Qr };

/// Descriptor of an embedded submanifold. Grassmann points are carried as
/// Stiefel representatives; Product is always flat (no nested products).
class Manifold {
 public:
  enum class Kind { Euclidean, Sphere, Stiefel, Grassmann, Product };

  static Manifold euclidean(Index rows, Index cols = 1) {
    if (rows < 1 || cols < 1) throw InvalidInput("euclidean: dimensions must be positive");
    return Manifold(Kind::Euclidean, rows, cols);
  }

  static Manifold sphere(Index ambient_dim) {
    if (ambient_dim < 2) throw InvalidInput("sphere: ambient dimension must be >= 2");
    return Manifold(Kind::Sphere, ambient_dim, 1);
  }

  static Manifold stiefel(Index n, Index p, StiefelRetraction r = StiefelRetraction::Polar) {
    if (p < 1 || n < p) throw InvalidInput("stiefel: requires n >= p >= 1");
    Manifold m(Kind::Stiefel, n, p);
    m.stiefel_retraction_ = r;
    return m;
  }

  static Manifold grassmann(Index n, Index p, StiefelRetraction r = StiefelRetraction::Polar) {
    if (p < 1 || n < p) throw InvalidInput("grassmann: requires n >= p >= 1");
    Manifold m(Kind::Grassmann, n, p);
    m.stiefel_retraction_ = r;
    return m;
  }

  static Manifold product(std::vector<Manifold> parts) {
    if (parts.empty()) throw InvalidInput("product: needs at least one component");
    std::vector<Manifold> flat;
    for (Manifold& p : parts) {
      if (p.kind() == Kind::Product)
        flat.insert(flat.end(), p.parts_.begin(), p.parts_.end());
      else
        flat.push_back(std::move(p));
    }
    Manifold m(Kind::Product, 0, 0);
    m.parts_ = std::move(flat);
    return m;
  }

  /// Product of `count` copies of `base` (centroid tuples live on M^l).
  static Manifold power(const Manifold& base, int count) {
    if (count < 1) throw InvalidInput("power: count must be >= 1");
    return product(std::vector<Manifold>(count, base));
  }

  Kind kind() const { return kind_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  StiefelRetraction stiefelRetraction() const { return stiefel_retraction_; }

  Index blockCount() const {
    return kind_ == Kind::Product ? static_cast<Index>(parts_.size()) : 1;
  }

  const Manifold& block(Index i) const {
    return kind_ == Kind::Product ? parts_[static_cast<std::size_t>(i)] : *this;
  }

  bool isEuclidean() const {
    if (kind_ == Kind::Euclidean) return true;
    if (kind_ != Kind::Product) return false;
    for (const Manifold& p : parts_)
      if (p.kind_ != Kind::Euclidean) return false;
    return true;
  }

  Index ambientSize() const {
    if (kind_ == Kind::Product) {
      Index n = 0;
      for (const Manifold& p : parts_) n += p.ambientSize();
      return n;
    }
    return rows_ * cols_;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::Euclidean:
        return cols_ == 1 ? "R^" + std::to_string(rows_)
                          : "R^(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
      case Kind::Sphere:
        return "S^" + std::to_string(rows_ - 1);
      case Kind::Stiefel:
        return "St(" + std::to_string(cols_) + "," + std::to_string(rows_) + ")";
      case Kind::Grassmann:
        return "Gr(" + std::to_string(cols_) + "," + std::to_string(rows_) + ")";
      case Kind::Product: {
        std::string s = parts_.front().describe();
        bool uniform = true;
        for (const Manifold& p : parts_)
          if (p.describe() != s) uniform = false;
        if (uniform) return s + "^" + std::to_string(parts_.size());
        s = parts_.front().describe();
        for (std::size_t i = 1; i < parts_.size(); ++i) s += " x " + parts_[i].describe();
        return s;
      }
    }
    return "?";
  }

 private:
  Manifold(Kind k, Index r, Index c) : kind_(k), rows_(r), cols_(c) {}

  Kind kind_;
  Index rows_, cols_;
  StiefelRetraction stiefel_retraction_ = StiefelRetraction::Polar;
  std::vector<Manifold> parts_;
};

/// A manifold point: coordinates in ambient blocks plus its descriptor.
struct Point {
  Manifold manifold;
  Blocks coords;
};

}  // namespace nmsub
