#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ldlab {

using Vec = std::vector<double>;

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

inline Vec operator+(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec operator-(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
  return a;
}

inline Vec operator*(double c, Vec a) {
  for (double& x : a) x *= c;
  return a;
}

inline void axpy(double c, const Vec& x, Vec& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

/// exp with saturated exponent: arguments above +700 yield +inf, below
/// -700 yield 0, so downstream sums never see NaN from overflow.
inline double safe_exp(double a) {
  if (a > 700.0) return kInf;
  if (a < -700.0) return 0.0;
  return std::exp(a);
}

/// Solve A s = rhs for symmetric positive (semi)definite A of tiny dimension
/// by Gaussian elimination with partial pivoting. Throws on singularity.
inline Vec solve_dense(std::vector<Vec> A, Vec rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    if (std::abs(A[piv][c]) < 1e-300) throw std::runtime_error("singular system");
    std::swap(A[piv], A[c]);
    std::swap(rhs[piv], rhs[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      rhs[r] -= f * rhs[c];
    }
  }
  Vec s(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double acc = rhs[ri];
    for (std::size_t k = ri + 1; k < n; ++k) acc -= A[ri][k] * s[k];
    s[ri] = acc / A[ri][ri];
  }
  return s;
}

/// Nonnegative least squares min ||G c - v|| over c >= 0 (Lawson-Hanson
/// active set). G is given by columns. Returns the fitted point G c.
/// Used to project velocities onto finitely generated cones.
inline Vec nnls_cone_point(const std::vector<Vec>& cols, const Vec& v,
                           int max_iter = 200) {
  const std::size_t m = cols.size();
  if (m == 0) return Vec(v.size(), 0.0);
  std::vector<char> active(m, 0);
  Vec c(m, 0.0);
  auto fit = [&](void) {
    Vec p(v.size(), 0.0);
    for (std::size_t j = 0; j < m; ++j)
      if (c[j] != 0.0) axpy(c[j], cols[j], p);
    return p;
  };
  for (int it = 0; it < max_iter; ++it) {
    // residual gradient: pick most violated inactive generator
    Vec r = v - fit();
    int best = -1;
    double best_g = 1e-12 * (1.0 + norm2(v));
    for (std::size_t j = 0; j < m; ++j) {
      if (active[j]) continue;
      const double g = dot(cols[j], r);
      if (g > best_g) { best_g = g; best = static_cast<int>(j); }
    }
    if (best < 0) break;
    active[best] = 1;
    // solve the unconstrained LS on the active set, clipping negatives
    for (int inner = 0; inner < max_iter; ++inner) {
      std::vector<int> idx;
      for (std::size_t j = 0; j < m; ++j)
        if (active[j]) idx.push_back(static_cast<int>(j));
      const std::size_t k = idx.size();
      std::vector<Vec> A(k, Vec(k, 0.0));
      Vec rhs(k, 0.0);
      for (std::size_t a = 0; a < k; ++a) {
        rhs[a] = dot(cols[idx[a]], v);
        for (std::size_t b = 0; b < k; ++b) A[a][b] = dot(cols[idx[a]], cols[idx[b]]);
        A[a][a] += 1e-12;
      }
      Vec z = solve_dense(A, rhs);
      bool ok = true;
      for (std::size_t a = 0; a < k; ++a)
        if (z[a] < 0.0) ok = false;
      if (ok) {
        for (std::size_t j = 0; j < m; ++j) c[j] = 0.0;
        for (std::size_t a = 0; a < k; ++a) c[idx[a]] = z[a];
        break;
      }
      // step toward z until the first coefficient hits zero; deactivate it
      double alpha = 1.0;
      int drop = -1;
      for (std::size_t a = 0; a < k; ++a) {
        if (z[a] < 0.0) {
          const double cj = c[idx[a]];
          const double t = cj / (cj - z[a]);
          if (t < alpha) { alpha = t; drop = idx[a]; }
        }
      }
      for (std::size_t a = 0; a < k; ++a) {
        const int j = idx[a];
        c[j] += alpha * (z[a] - c[j]);
        if (c[j] < 1e-14) c[j] = 0.0;
      }
      if (drop >= 0) { active[drop] = 0; c[drop] = 0.0; }
    }
  }
  return fit();
}

}  // namespace ldlab
