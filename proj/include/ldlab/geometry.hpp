#pragma once

#include <vector>

#include "ldlab/errors.hpp"
#include "ldlab/vec.hpp"

namespace ldlab {

/// Half-space {x : <x - base, normal> >= 0} (closed) or > 0 (open).
/// The normal is normalized to unit length at construction.
struct HalfSpace {
  Vec base;
  Vec normal;
  bool closed = true;

  HalfSpace() = default;
  HalfSpace(Vec base_, Vec normal_, bool closed_);

  /// signed distance of x from the bounding hyperplane
  double margin(const Vec& x) const;
};

/// Sorted, deduplicated indices into the closed face list of a Polyhedron.
using FaceIndex = std::vector<int>;

/// State space E: intersection of closed and open half-spaces.
/// Face activity uses an absolute tolerance in state units; every
/// downstream selection of boundary pieces inherits that tolerance.
class Polyhedron {
 public:
  /// witness must be an interior point (margin > tol on every face);
  /// it certifies that E is nonempty and contained in the closure of
  /// its interior.
  Polyhedron(int dim, std::vector<HalfSpace> closed_faces,
             std::vector<HalfSpace> open_faces, Vec witness,
             double tol = 1e-9);

  int dim() const { return dim_; }
  double tol() const { return tol_; }
  const Vec& witness() const { return witness_; }
  const std::vector<HalfSpace>& closed_faces() const { return closed_; }
  const std::vector<HalfSpace>& open_faces() const { return open_; }

  /// x in E: margin >= -tol on closed faces, > tol on open faces
  bool contains(const Vec& x) const;

  /// J*(x): closed faces with |margin| <= tol. Open faces never become
  /// active; they carry no boundary Hamiltonian.
  FaceIndex active_set(const Vec& x) const;

  /// v in the tangent cone Gamma_{J*(x)}: <v, n_i> >= -tol for active i
  bool tangent_cone_contains(const Vec& x, const Vec& v) const;

  /// Euclidean projection of v onto Gamma_{J*(x)} (half-spaces through 0)
  Vec project_tangent(const Vec& x, const Vec& v) const;

  /// Euclidean projection of a point into E (clipped to closed faces,
  /// nudged strictly inside open faces). Feasibility repair utility.
  Vec project_point(const Vec& x) const;

 private:
  void check_dim(const Vec& x) const;

  int dim_;
  std::vector<HalfSpace> closed_;
  std::vector<HalfSpace> open_;
  Vec witness_;
  double tol_;
};

/// E = [0, inf)^d with one closed face per coordinate.
Polyhedron orthant(int dim, double tol = 1e-9);

/// E = [lo, hi] (hi may be +inf for a half line)
Polyhedron interval(double lo, double hi, double tol = 1e-9);

}  // namespace ldlab
