#pragma once

#include "nmsub/manifold.hpp"
#include "nmsub/rng.hpp"

namespace nmsub::geometry {

// Tolerance ladder: membership checks, construction targets, exact algebra.
inline constexpr double kMembershipTol = 1e-8;
inline constexpr double kConstructionTol = 1e-10;
inline constexpr double kAlgebraTol = 1e-12;

/// Throws InvalidInput unless v has the ambient block shapes of M.
void checkShapes(const Manifold& m, const Blocks& v, const char* what);

/// Orthogonal projection of an ambient vector onto the tangent space at x.
Blocks tangentProject(const Manifold& m, const Blocks& x, const Blocks& v);

/// Retraction: Euclidean x+xi, sphere normalization, Stiefel polar or QR.
Blocks retract(const Manifold& m, const Blocks& x, const Blocks& xi);

/// Distance-to-manifold surrogate: |  ||x|| - 1 | on the sphere,
/// || X^T X - I ||_F on Stiefel, max over components on products.
double membershipResidual(const Manifold& m, const Blocks& x);

inline bool onManifold(const Manifold& m, const Blocks& x, double tol = kMembershipTol) {
  return membershipResidual(m, x) <= tol;
}

/// Residual of the tangent-space defining equations for xi at x.
double tangencyResidual(const Manifold& m, const Blocks& x, const Blocks& xi);

/// Seeded random point: Gaussian on Euclidean, normalized Gaussian on the
/// sphere, QR-orthonormalized Gaussian on Stiefel/Grassmann.
Blocks randomPoint(const Manifold& m, Rng& rng);

/// Random tangent vector at x (tangent projection of a Gaussian draw).
Blocks randomTangent(const Manifold& m, const Blocks& x, Rng& rng);

}  // namespace nmsub::geometry
