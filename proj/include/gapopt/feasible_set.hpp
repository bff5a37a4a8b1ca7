#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"

namespace gapopt {

// Euclidean projection onto the standard simplex {x >= 0, sum x = 1}.
// Sort-based; exact up to rounding.
inline Vec project_simplex(const Vec& v) {
  const int n = static_cast<int>(v.size());
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cssv = 0.0;
  double theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    cssv += u[i];
    const double t = (cssv - 1.0) / (i + 1);
    if (u[i] - t > 0.0) {
      rho = i + 1;
      theta = t;
    }
  }
  (void)rho;
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0);
  return out;
}

class FeasibleSet {
 public:
  enum class Kind { AllOfRn, Simplex, Box, L2Ball, SimplexProduct };

  static FeasibleSet all_of_rn(int dim) {
    FeasibleSet s;
    s.kind_ = Kind::AllOfRn;
    s.dim_ = require_dim(dim);
    return s;
  }

  static FeasibleSet simplex(int dim) {
    FeasibleSet s;
    s.kind_ = Kind::Simplex;
    s.dim_ = require_dim(dim);
    s.blocks_ = {dim};
    return s;
  }

  static FeasibleSet box(Vec lower, Vec upper) {
    if (lower.size() != upper.size() || lower.size() == 0)
      throw DomainError("box: bound dimensions disagree or empty");
    for (int j = 0; j < lower.size(); ++j)
      if (!(lower[j] < upper[j])) throw DomainError("box: need lower[j] < upper[j]");
    FeasibleSet s;
    s.kind_ = Kind::Box;
    s.dim_ = static_cast<int>(lower.size());
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
  }

  static FeasibleSet l2_ball(Vec center, double radius) {
    if (!(radius > 0.0)) throw DomainError("l2_ball: radius must be positive");
    FeasibleSet s;
    s.kind_ = Kind::L2Ball;
    s.dim_ = static_cast<int>(center.size());
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
  }

  // Cartesian product of standard simplices; the block structure the
  // saddle-point solvers use for simplex x simplex games.
  static FeasibleSet simplex_product(std::vector<int> block_dims) {
    if (block_dims.empty()) throw DomainError("simplex_product: no blocks");
    int total = 0;
    for (int b : block_dims) total += require_dim(b);
    FeasibleSet s;
    s.kind_ = Kind::SimplexProduct;
    s.dim_ = total;
    s.blocks_ = std::move(block_dims);
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec& lower() const { return lower_; }
  const Vec& upper() const { return upper_; }
  const Vec& ball_center() const { return center_; }
  double ball_radius() const { return radius_; }
  const std::vector<int>& blocks() const { return blocks_; }

  bool bounded() const { return kind_ != Kind::AllOfRn; }

  static constexpr double kMembershipTol = 1e-12;

  bool contains(const Vec& x, double tol = kMembershipTol) const {
    if (x.size() != dim_) return false;
    switch (kind_) {
      case Kind::AllOfRn:
        return all_finite(x);
      case Kind::Simplex:
        return simplex_contains(x, 0, dim_, tol);
      case Kind::Box:
        for (int j = 0; j < dim_; ++j)
          if (x[j] < lower_[j] - tol || x[j] > upper_[j] + tol) return false;
        return true;
      case Kind::L2Ball:
        return (x - center_).norm() <= radius_ + tol;
      case Kind::SimplexProduct: {
        int off = 0;
        for (int b : blocks_) {
          if (!simplex_contains(x, off, b, tol)) return false;
          off += b;
        }
        return true;
      }
    }
    return false;
  }

  Vec project(const Vec& x) const {
    if (!all_finite(x)) throw NonFinite("project: non-finite input");
    switch (kind_) {
      case Kind::AllOfRn:
        return x;
      case Kind::Simplex:
        return project_simplex(x);
      case Kind::Box: {
        Vec out(dim_);
        for (int j = 0; j < dim_; ++j) out[j] = std::clamp(x[j], lower_[j], upper_[j]);
        return out;
      }
      case Kind::L2Ball: {
        const Vec d = x - center_;
        const double nd = d.norm();
        if (nd <= radius_) return x;
        return center_ + (radius_ / nd) * d;
      }
      case Kind::SimplexProduct: {
        Vec out(dim_);
        int off = 0;
        for (int b : blocks_) {
          out.segment(off, b) = project_simplex(x.segment(off, b));
          off += b;
        }
        return out;
      }
    }
    throw Unsupported("project: unknown set kind");
  }

  // argmin over the set of <g, u>. Deterministic tie-breaking: lowest
  // coordinate index wins on simplices, lower bound wins on boxes.
  Vec linear_minimizer(const Vec& g) const {
    if (!all_finite(g)) throw NonFinite("linear_minimizer: non-finite input");
    switch (kind_) {
      case Kind::Simplex: {
        Vec v = Vec::Zero(dim_);
        v[argmin_index(g, 0, dim_)] = 1.0;
        return v;
      }
      case Kind::Box: {
        Vec v(dim_);
        for (int j = 0; j < dim_; ++j) v[j] = (g[j] > 0.0) ? lower_[j] : (g[j] < 0.0 ? upper_[j] : lower_[j]);
        return v;
      }
      case Kind::L2Ball: {
        const double ng = g.norm();
        if (ng == 0.0) return center_;
        return center_ - (radius_ / ng) * g;
      }
      case Kind::SimplexProduct: {
        Vec v = Vec::Zero(dim_);
        int off = 0;
        for (int b : blocks_) {
          v[off + argmin_index(g, off, b)] = 1.0;
          off += b;
        }
        return v;
      }
      case Kind::AllOfRn:
        throw NoLMO("linear_minimizer: unbounded set");
    }
    throw NoLMO("linear_minimizer: unknown set kind");
  }

  // l2 diameter, used by the Frank-Wolfe bounds.
  double diameter2() const {
    switch (kind_) {
      case Kind::Simplex:
        return dim_ >= 2 ? std::sqrt(2.0) : 0.0;
      case Kind::Box:
        return (upper_ - lower_).norm();
      case Kind::L2Ball:
        return 2.0 * radius_;
      case Kind::SimplexProduct: {
        double s = 0.0;
        for (int b : blocks_)
          if (b >= 2) s += 2.0;
        return std::sqrt(s);
      }
      case Kind::AllOfRn:
        throw UnboundedSet("diameter2: unbounded set");
    }
    throw UnboundedSet("diameter2: unknown set kind");
  }

  // Extreme points, for probe sets in the VI gap. Boxes enumerate up to
  // 2^dim vertices so callers keep dim small there.
  std::vector<Vec> vertices() const {
    std::vector<Vec> vs;
    switch (kind_) {
      case Kind::Simplex:
        for (int j = 0; j < dim_; ++j) {
          Vec v = Vec::Zero(dim_);
          v[j] = 1.0;
          vs.push_back(std::move(v));
        }
        return vs;
      case Kind::Box: {
        if (dim_ > 16) throw Unsupported("vertices: box dimension too large to enumerate");
        const int count = 1 << dim_;
        for (int m = 0; m < count; ++m) {
          Vec v(dim_);
          for (int j = 0; j < dim_; ++j) v[j] = (m >> j) & 1 ? upper_[j] : lower_[j];
          vs.push_back(std::move(v));
        }
        return vs;
      }
      case Kind::SimplexProduct: {
        // vertex = one basis vector per block; enumerate the product
        long count = 1;
        for (int b : blocks_) count *= b;
        if (count > 4096) throw Unsupported("vertices: simplex product too large to enumerate");
        std::vector<int> idx(blocks_.size(), 0);
        for (long m = 0; m < count; ++m) {
          Vec v = Vec::Zero(dim_);
          long r = m;
          int off = 0;
          for (size_t bi = 0; bi < blocks_.size(); ++bi) {
            v[off + static_cast<int>(r % blocks_[bi])] = 1.0;
            r /= blocks_[bi];
            off += blocks_[bi];
          }
          vs.push_back(std::move(v));
        }
        return vs;
      }
      default:
        throw Unsupported("vertices: set has no finite vertex list");
    }
  }

  Vec sample(Rng& rng) const {
    switch (kind_) {
      case Kind::AllOfRn:
        return uniform_vec(rng, dim_, -3.0, 3.0);
      case Kind::Simplex:
        return sample_simplex(rng, dim_);
      case Kind::Box: {
        Vec x(dim_);
        for (int j = 0; j < dim_; ++j) {
          std::uniform_real_distribution<double> d(lower_[j], upper_[j]);
          x[j] = d(rng);
        }
        return x;
      }
      case Kind::L2Ball: {
        Vec g = uniform_vec(rng, dim_, -1.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double nm = g.norm();
        if (nm == 0.0) return center_;
        return center_ + radius_ * std::pow(u(rng), 1.0 / dim_) * g / nm;
      }
      case Kind::SimplexProduct: {
        Vec x(dim_);
        int off = 0;
        for (int b : blocks_) {
          x.segment(off, b) = sample_simplex(rng, b);
          off += b;
        }
        return x;
      }
    }
    throw Unsupported("sample: unknown set kind");
  }

 private:
  static int require_dim(int dim) {
    if (dim <= 0) throw DomainError("set dimension must be positive");
    return dim;
  }

  static bool simplex_contains(const Vec& x, int off, int len, double tol) {
    double s = 0.0;
    for (int j = off; j < off + len; ++j) {
      if (x[j] < -tol) return false;
      s += x[j];
    }
    return std::abs(s - 1.0) <= tol * len;
  }

  static int argmin_index(const Vec& g, int off, int len) {
    int best = 0;
    for (int j = 1; j < len; ++j)
      if (g[off + j] < g[off + best]) best = j;
    return best;
  }

  static Vec sample_simplex(Rng& rng, int n) {
    std::exponential_distribution<double> e(1.0);
    Vec x(n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      x[j] = e(rng);
      s += x[j];
    }
    return x / s;
  }

  Kind kind_ = Kind::AllOfRn;
  int dim_ = 0;
  Vec lower_, upper_;
  Vec center_;
  double radius_ = 0.0;
  std::vector<int> blocks_;
};

}  // namespace gapopt
