#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace gapopt {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline double sqr(double x) { return x * x; }

// sign(0) = 0; used for subgradients of |x| where any value in [-1,1] is valid.
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

inline double soft_threshold(double v, double tau) {
  if (v > tau) return v - tau;
  if (v < -tau) return v + tau;
  return 0.0;
}

inline Vec uniform_vec(Rng& rng, int dim, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = d(rng);
  return v;
}

}  // namespace gapopt
