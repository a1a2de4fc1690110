#include "ldlab/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace ldlab {

HalfSpace::HalfSpace(Vec base_, Vec normal_, bool closed_)
    : base(std::move(base_)), normal(std::move(normal_)), closed(closed_) {
  const double n = norm2(normal);
  if (!(n > 0.0)) throw ValidationError("half-space normal must be nonzero");
  for (double& c : normal) c /= n;
  if (base.size() != normal.size())
    throw ValidationError("half-space base/normal dimension mismatch");
}

double HalfSpace::margin(const Vec& x) const {
  double s = 0.0;
  for (std::size_t i = 0; i < normal.size(); ++i) s += (x[i] - base[i]) * normal[i];
  return s;
}

Polyhedron::Polyhedron(int dim, std::vector<HalfSpace> closed_faces,
                       std::vector<HalfSpace> open_faces, Vec witness,
                       double tol)
    : dim_(dim),
      closed_(std::move(closed_faces)),
      open_(std::move(open_faces)),
      witness_(std::move(witness)),
      tol_(tol) {
  if (dim_ <= 0) throw ValidationError("polyhedron dimension must be positive");
  if (!(tol_ > 0.0)) throw ValidationError("tolerance must be positive");
  for (const auto& h : closed_)
    if (static_cast<int>(h.normal.size()) != dim_)
      throw ValidationError("closed face dimension mismatch");
  for (const auto& h : open_)
    if (static_cast<int>(h.normal.size()) != dim_)
      throw ValidationError("open face dimension mismatch");
  check_dim(witness_);
  for (const auto& h : closed_)
    if (!(h.margin(witness_) > tol_))
      throw ValidationError("witness point is not interior to a closed face");
  for (const auto& h : open_)
    if (!(h.margin(witness_) > tol_))
      throw ValidationError("witness point is not interior to an open face");
}

void Polyhedron::check_dim(const Vec& x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw ValidationError("point dimension mismatch");
}

bool Polyhedron::contains(const Vec& x) const {
  check_dim(x);
  for (const auto& h : closed_)
    if (h.margin(x) < -tol_) return false;
  for (const auto& h : open_)
    if (!(h.margin(x) > tol_)) return false;
  return true;
}

FaceIndex Polyhedron::active_set(const Vec& x) const {
  if (!contains(x)) throw ValidationError("active_set: point outside E");
  FaceIndex J;
  for (std::size_t i = 0; i < closed_.size(); ++i)
    if (std::abs(closed_[i].margin(x)) <= tol_) J.push_back(static_cast<int>(i));
  return J;
}

bool Polyhedron::tangent_cone_contains(const Vec& x, const Vec& v) const {
  check_dim(v);
  for (int i : active_set(x))
    if (dot(v, closed_[static_cast<std::size_t>(i)].normal) < -tol_) return false;
  return true;
}

Vec Polyhedron::project_tangent(const Vec& x, const Vec& v) const {
  check_dim(v);
  const FaceIndex J = active_set(x);
  if (J.empty()) return v;
  // Dykstra's alternating projections onto {w : <w, n_i> >= 0}, i in J.
  // For half-spaces each cycle projects exactly; correction terms make the
  // limit the Euclidean projection onto the intersection.
  Vec w = v;
  std::vector<Vec> corr(J.size(), Vec(static_cast<std::size_t>(dim_), 0.0));
  for (int iter = 0; iter < 1000; ++iter) {
    double change = 0.0;
    for (std::size_t k = 0; k < J.size(); ++k) {
      const Vec& n = closed_[static_cast<std::size_t>(J[k])].normal;
      Vec y = w + corr[k];
      const double m = dot(y, n);
      Vec w_new = y;
      if (m < 0.0) axpy(-m, n, w_new);
      corr[k] = y - w_new;
      change += norm_inf(w_new - w);
      w = std::move(w_new);
    }
    if (change < 1e-15 * (1.0 + norm2(v))) break;
  }
  // exact feasibility clip (idempotence under the stated tolerance)
  for (int i : J) {
    const Vec& n = closed_[static_cast<std::size_t>(i)].normal;
    const double m = dot(w, n);
    if (m < 0.0) axpy(-m, n, w);
  }
  return w;
}

Vec Polyhedron::project_point(const Vec& x) const {
  check_dim(x);
  Vec y = x;
  std::vector<Vec> corr(closed_.size(), Vec(static_cast<std::size_t>(dim_), 0.0));
  for (int iter = 0; iter < 1000; ++iter) {
    double change = 0.0;
    for (std::size_t k = 0; k < closed_.size(); ++k) {
      const auto& h = closed_[k];
      Vec z = y + corr[k];
      const double m = h.margin(z);
      Vec y_new = z;
      if (m < 0.0) axpy(-m, h.normal, y_new);
      corr[k] = z - y_new;
      change += norm_inf(y_new - y);
      y = std::move(y_new);
    }
    if (change < 1e-15 * (1.0 + norm2(x))) break;
  }
  for (const auto& h : closed_) {
    const double m = h.margin(y);
    if (m < 0.0) axpy(-m, h.normal, y);
  }
  // open faces: strict membership, nudge inward by a hair past the tolerance
  for (const auto& h : open_) {
    const double m = h.margin(y);
    if (m <= tol_) axpy(2.0 * tol_ - m, h.normal, y);
  }
  return y;
}

Polyhedron orthant(int dim, double tol) {
  std::vector<HalfSpace> faces;
  for (int i = 0; i < dim; ++i) {
    Vec n(static_cast<std::size_t>(dim), 0.0);
    n[static_cast<std::size_t>(i)] = 1.0;
    faces.emplace_back(Vec(static_cast<std::size_t>(dim), 0.0), n, true);
  }
  return Polyhedron(dim, std::move(faces), {}, Vec(static_cast<std::size_t>(dim), 1.0), tol);
}

Polyhedron interval(double lo, double hi, double tol) {
  std::vector<HalfSpace> faces;
  faces.emplace_back(Vec{lo}, Vec{1.0}, true);
  double wit = lo + 1.0;
  if (std::isfinite(hi)) {
    faces.emplace_back(Vec{hi}, Vec{-1.0}, true);
    wit = 0.5 * (lo + hi);
  }
  return Polyhedron(1, std::move(faces), {}, Vec{wit}, tol);
}

}  // namespace ldlab
