#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"
#include "gapopt/feasible_set.hpp"

namespace gapopt {

// ---------------------------------------------------------------------------
// Composite part psi of an objective f + psi. Kept separate from the base
// regularizer so the composite-mode conjugate can absorb it with the running
// weight A.
// ---------------------------------------------------------------------------
class CompositePart {
 public:
  enum class Kind { Zero, L1, Indicator };

  static CompositePart zero() { return CompositePart(); }

  static CompositePart l1(double weight) {
    if (!(weight >= 0.0)) throw DomainError("l1 weight must be nonnegative");
    CompositePart p;
    p.kind_ = Kind::L1;
    p.weight_ = weight;
    return p;
  }

  static CompositePart indicator(FeasibleSet set) {
    CompositePart p;
    p.kind_ = Kind::Indicator;
    p.set_ = std::move(set);
    return p;
  }

  Kind kind() const { return kind_; }
  double weight() const { return weight_; }
  const FeasibleSet& set() const { return *set_; }
  bool is_zero() const { return kind_ == Kind::Zero; }

  double value(const Vec& x) const {
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::L1:
        return weight_ * x.lpNorm<1>();
      case Kind::Indicator:
        return set_->contains(x) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

 private:
  Kind kind_ = Kind::Zero;
  double weight_ = 0.0;
  std::optional<FeasibleSet> set_;
};

// ---------------------------------------------------------------------------
// MirrorMap: the base regularizer phi, anchored so that min phi = 0 on the
// set. Euclidean maps anchor at an explicit center; entropy maps anchor at
// the uniform distribution (the +log n shift).
// ---------------------------------------------------------------------------
class MirrorMap {
 public:
  enum class Kind { Euclidean, Entropy };

  static MirrorMap euclidean(FeasibleSet set, Vec center, double scale = 1.0) {
    if (!(scale > 0.0)) throw DomainError("euclidean map scale must be positive");
    if (center.size() != set.dim()) throw DomainError("euclidean map center dimension mismatch");
    if (!set.contains(center, 1e-9)) throw DomainError("euclidean map center must lie in the set");
    MirrorMap m;
    m.kind_ = Kind::Euclidean;
    m.set_ = std::move(set);
    m.center_ = std::move(center);
    m.scale_ = scale;
    m.strong_convexity_ = scale;
    return m;
  }

  static MirrorMap entropy(FeasibleSet set, double scale = 1.0) {
    if (!(scale > 0.0)) throw DomainError("entropy map scale must be positive");
    const auto k = set.kind();
    if (k != FeasibleSet::Kind::Simplex && k != FeasibleSet::Kind::SimplexProduct)
      throw DomainError("entropy map requires a simplex or simplex-product set");
    MirrorMap m;
    m.kind_ = Kind::Entropy;
    m.scale_ = scale;
    // over a product of simplices the l1 strong-convexity constant halves
    m.strong_convexity_ = (k == FeasibleSet::Kind::SimplexProduct && set.blocks().size() > 1)
                              ? scale / 2.0
                              : scale;
    m.set_ = std::move(set);
    m.center_ = m.uniform_point();
    return m;
  }

  Kind kind() const { return kind_; }
  const FeasibleSet& set() const { return set_; }
  const Vec& center() const { return center_; }
  double scale() const { return scale_; }
  double strong_convexity() const { return strong_convexity_; }

  // phi(x); entropy coordinates at exactly 0 contribute 0 (the x log x limit).
  double value(const Vec& x) const {
    switch (kind_) {
      case Kind::Euclidean:
        return 0.5 * scale_ * (x - center_).squaredNorm();
      case Kind::Entropy: {
        double s = 0.0;
        int off = 0;
        for (int b : block_dims()) {
          double e = std::log(static_cast<double>(b));
          for (int j = off; j < off + b; ++j)
            if (x[j] > 0.0) e += x[j] * std::log(x[j]);
          s += e;
          off += b;
        }
        return scale_ * s;
      }
    }
    return 0.0;
  }

  // gradient of phi at an interior point
  Vec gradient(const Vec& x) const {
    switch (kind_) {
      case Kind::Euclidean:
        return scale_ * (x - center_);
      case Kind::Entropy: {
        Vec g(x.size());
        for (int j = 0; j < x.size(); ++j) {
          if (!(x[j] > 0.0)) throw DomainError("entropy gradient requires strictly positive coordinates");
          g[j] = scale_ * (std::log(x[j]) + 1.0);
        }
        return g;
      }
    }
    throw Unsupported("gradient: unknown map kind");
  }

  // D_phi(x, y) = phi(x) - phi(y) - <grad phi(y), x - y>
  double bregman(const Vec& x, const Vec& y) const {
    switch (kind_) {
      case Kind::Euclidean:
        return 0.5 * scale_ * (x - y).squaredNorm();
      case Kind::Entropy: {
        // KL(x || y); y coordinates below 1e-300 are out of domain
        double s = 0.0;
        for (int j = 0; j < x.size(); ++j) {
          if (y[j] < 1e-300) throw DomainError("entropy bregman: second argument has (near-)zero coordinate");
          if (x[j] > 0.0) s += x[j] * std::log(x[j] / y[j]);
          s += y[j] - x[j];  // exact zero for on-simplex arguments, keeps off-simplex use sane
        }
        return scale_ * s;
      }
    }
    throw Unsupported("bregman: unknown map kind");
  }

  // The norm the map is strongly convex against: l2 for euclidean, l1 for entropy.
  double norm(const Vec& v) const {
    return kind_ == Kind::Euclidean ? v.norm() : v.lpNorm<1>();
  }

  std::vector<int> block_dims() const {
    if (set_.kind() == FeasibleSet::Kind::SimplexProduct) return set_.blocks();
    return {set_.dim()};
  }

  Vec uniform_point() const {
    Vec u(set_.dim());
    int off = 0;
    for (int b : block_dims()) {
      u.segment(off, b).setConstant(1.0 / b);
      off += b;
    }
    return u;
  }

 private:
  Kind kind_ = Kind::Euclidean;
  FeasibleSet set_ = FeasibleSet::all_of_rn(1);
  Vec center_;
  double scale_ = 1.0;
  double strong_convexity_ = 1.0;
};

// ---------------------------------------------------------------------------
// TimeVaryingMap: phi_t built from a base map. Three modes:
//   static        phi_t = phi
//   composite     phi_t = A * psi + phi
//   accumulation  phi_t = sum_j a_j (sigma/2) ||x - x_j||^2 + phi
// ---------------------------------------------------------------------------
class TimeVaryingMap {
 public:
  enum class Mode { Static, Composite, Accumulation };

  static TimeVaryingMap static_map(MirrorMap base) {
    TimeVaryingMap m;
    m.base_ = std::move(base);
    m.mode_ = Mode::Static;
    return m;
  }

  static TimeVaryingMap composite(MirrorMap base, CompositePart psi, double accumulated_weight = 0.0) {
    TimeVaryingMap m;
    m.base_ = std::move(base);
    m.mode_ = Mode::Composite;
    m.psi_ = std::move(psi);
    m.A_ = accumulated_weight;
    return m;
  }

  static TimeVaryingMap accumulation(MirrorMap base, double sigma) {
    if (!(sigma > 0.0)) throw NotStronglyConvex("accumulation mode needs sigma > 0");
    if (base.kind() != MirrorMap::Kind::Euclidean)
      throw Unsupported("accumulation mode supports euclidean base maps only");
    TimeVaryingMap m;
    m.base_ = std::move(base);
    m.mode_ = Mode::Accumulation;
    m.sigma_ = sigma;
    m.sum_ax_ = Vec::Zero(m.base_.set().dim());
    return m;
  }

  Mode mode() const { return mode_; }
  const MirrorMap& base() const { return base_; }
  const CompositePart& psi() const { return psi_; }
  double accumulated_weight() const { return A_; }
  double sigma() const { return sigma_; }

  // set the running composite weight A^(i)
  void set_accumulated_weight(double A) {
    if (mode_ != Mode::Composite) throw Unsupported("set_accumulated_weight: not a composite map");
    if (A < A_ - 1e-15) throw DomainError("composite weight must be nondecreasing");
    A_ = A;
  }

  // add an anchor (a_j, x_j) in accumulation mode
  void add_anchor(double a, const Vec& x) {
    if (mode_ != Mode::Accumulation) throw Unsupported("add_anchor: not an accumulation map");
    if (!(a > 0.0)) throw DomainError("anchor weight must be positive");
    sum_a_ += a;
    sum_ax_ += a * x;
    sum_axx_ += a * x.squaredNorm();
    anchors_.emplace_back(a, x);
  }

  const std::vector<std::pair<double, Vec>>& anchors() const { return anchors_; }
  double anchor_weight_sum() const { return sum_a_; }
  const Vec& anchor_weighted_sum() const { return sum_ax_; }

  // effective strong convexity of phi_t
  double strong_convexity() const {
    double s = base_.strong_convexity();
    if (mode_ == Mode::Accumulation) s += sigma_ * sum_a_;
    return s;
  }

  double value(const Vec& x) const {
    double v = base_.value(x);
    switch (mode_) {
      case Mode::Static:
        break;
      case Mode::Composite:
        v += A_ * psi_.value(x);
        break;
      case Mode::Accumulation:
        v += 0.5 * sigma_ * (sum_a_ * x.squaredNorm() - 2.0 * sum_ax_.dot(x) + sum_axx_);
        break;
    }
    return v;
  }

  // gradient of phi_t where it is differentiable (everything except l1 composite)
  Vec gradient(const Vec& x) const {
    Vec g = base_.gradient(x);
    switch (mode_) {
      case Mode::Static:
        break;
      case Mode::Composite:
        if (psi_.kind() == CompositePart::Kind::L1)
          throw Unsupported("gradient: l1 composite part is not differentiable");
        break;  // indicator/zero contribute nothing on the set
      case Mode::Accumulation:
        g += sigma_ * (sum_a_ * x - sum_ax_);
        break;
    }
    return g;
  }

  // grad phi_t^*(z) = argmin_{u in set} { -<z,u> + phi_t(u) }
  Vec grad_conjugate(const Vec& z) const {
    if (!all_finite(z)) throw NonFinite("grad_conjugate: z contains NaN/Inf");
    if (z.size() != base_.set().dim()) throw DomainError("grad_conjugate: dual dimension mismatch");
    switch (mode_) {
      case Mode::Static:
        return static_conjugate(z);
      case Mode::Composite:
        return composite_conjugate(z);
      case Mode::Accumulation: {
        const double s_eff = strong_convexity();
        const Vec c = (z + sigma_ * sum_ax_ + base_.scale() * base_.center()) / s_eff;
        return base_.set().project(c);
      }
    }
    throw Unsupported("grad_conjugate: unknown mode");
  }

  // phi_t^*(z) = <z, u*> - phi_t(u*)
  double conjugate_value(const Vec& z) const {
    const Vec u = grad_conjugate(z);
    return z.dot(u) - value(u);
  }

  // D_{phi_t^*}(z1, z2) via the primal identity
  //   phi(grad*(z2)) - phi(grad*(z1)) - <z1, grad*(z2) - grad*(z1)>
  double bregman_dual(const Vec& z1, const Vec& z2) const {
    if (!all_finite(z1) || !all_finite(z2)) throw NonFinite("bregman_dual: non-finite dual vector");
    const Vec u1 = grad_conjugate(z1);
    const Vec u2 = grad_conjugate(z2);
    return value(u2) - value(u1) - z1.dot(u2 - u1);
  }

 private:
  Vec static_conjugate(const Vec& z) const {
    switch (base_.kind()) {
      case MirrorMap::Kind::Euclidean:
        return base_.set().project(base_.center() + z / base_.scale());
      case MirrorMap::Kind::Entropy:
        return softmax(z);
    }
    throw Unsupported("static_conjugate: unknown base kind");
  }

  Vec softmax(const Vec& z) const {
    Vec u(z.size());
    int off = 0;
    for (int b : base_.block_dims()) {
      const double m = z.segment(off, b).maxCoeff();
      double s = 0.0;
      for (int j = off; j < off + b; ++j) {
        u[j] = std::exp((z[j] - m) / base_.scale());
        s += u[j];
      }
      u.segment(off, b) /= s;
      off += b;
    }
    return u;
  }

  Vec composite_conjugate(const Vec& z) const {
    const auto& set = base_.set();
    switch (psi_.kind()) {
      case CompositePart::Kind::Zero:
        return static_conjugate(z);
      case CompositePart::Kind::Indicator: {
        if (base_.kind() != MirrorMap::Kind::Euclidean)
          throw Unsupported("indicator composite requires a euclidean base map");
        // indicator weight is scale-free; minimize over the indicated set
        return psi_.set().project(base_.center() + z / base_.scale());
      }
      case CompositePart::Kind::L1: {
        if (base_.kind() != MirrorMap::Kind::Euclidean)
          throw Unsupported("l1 composite requires a euclidean base map");
        const double tau = A_ * psi_.weight() / base_.scale();
        const Vec w = base_.center() + z / base_.scale();
        if (set.kind() == FeasibleSet::Kind::AllOfRn) {
          Vec u(w.size());
          for (int j = 0; j < w.size(); ++j) u[j] = soft_threshold(w[j], tau);
          return u;
        }
        if (set.kind() == FeasibleSet::Kind::Box) {
          // separable: 1-d convex pieces, clamp the unconstrained minimizer
          Vec u(w.size());
          for (int j = 0; j < w.size(); ++j)
            u[j] = std::clamp(soft_threshold(w[j], tau), set.lower()[j], set.upper()[j]);
          return u;
        }
        return fallback_solve(z);
      }
    }
    throw Unsupported("composite_conjugate: unknown composite kind");
  }

 public:
  // Proximal-gradient fallback for composite combinations without a closed
  // form. The prox of (psi + set indicator) is applied as soft-threshold
  // followed by projection, exact only for separable sets; the result is
  // certified by a directional-derivative probe and Unsupported is thrown
  // if it fails. Exposed for tests.
  Vec fallback_solve(const Vec& z) const {
    if (base_.kind() != MirrorMap::Kind::Euclidean)
      throw Unsupported("fallback solver requires a euclidean base map");
    const auto& set = base_.set();
    const double s0 = base_.scale();
    const double tau = (psi_.kind() == CompositePart::Kind::L1) ? A_ * psi_.weight() / s0 : 0.0;
    Vec u = set.project(base_.center());
    const int max_iters = 100000;
    const double tol = 1e-13 * (1.0 + z.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < max_iters; ++it) {
      // half step on -<z,u> + (s0/2)||u - x0||^2
      Vec w = u - 0.5 * (s0 * (u - base_.center()) - z) / s0;
      if (tau > 0.0)
        for (int j = 0; j < w.size(); ++j) w[j] = soft_threshold(w[j], 0.5 * tau);
      w = set.project(w);
      const double delta = (w - u).lpNorm<Eigen::Infinity>();
      u = w;
      if (delta <= tol) break;
    }
    const double res = fallback_residual(z, u);
    if (res > 1e-10 * (1.0 + z.lpNorm<Eigen::Infinity>()))
      throw Unsupported("composite conjugate: fallback solver failed to reach tolerance");
    return u;
  }

 private:
  // Largest descent rate of -<z,u> + phi_t(u) at u over probe directions
  // d = x - u with x feasible; nonpositive directional derivatives mean a
  // better point exists in that direction.
  double fallback_residual(const Vec& z, const Vec& u) const {
    const double lam = (psi_.kind() == CompositePart::Kind::L1) ? A_ * psi_.weight() : 0.0;
    const Vec gsm = base_.scale() * (u - base_.center()) - z;
    const auto dir_deriv = [&](const Vec& x) {
      const Vec d = x - u;
      double dd = gsm.dot(d);
      if (lam > 0.0)
        for (int j = 0; j < d.size(); ++j)
          dd += lam * (u[j] != 0.0 ? sgn(u[j]) * d[j] : std::abs(d[j]));
      const double nd = d.norm();
      return nd > 0.0 ? dd / nd : 0.0;
    };
    double worst = 0.0;
    Rng rng(12345);
    for (int t = 0; t < 256; ++t) worst = std::min(worst, dir_deriv(base_.set().sample(rng)));
    if (base_.set().kind() == FeasibleSet::Kind::Box || base_.set().kind() == FeasibleSet::Kind::Simplex) {
      if (base_.set().dim() <= 12)
        for (const Vec& v : base_.set().vertices()) worst = std::min(worst, dir_deriv(v));
    }
    return -worst;
  }

  MirrorMap base_ = MirrorMap::euclidean(FeasibleSet::all_of_rn(1), Vec::Zero(1));
  Mode mode_ = Mode::Static;
  CompositePart psi_;
  double A_ = 0.0;
  double sigma_ = 0.0;
  double sum_a_ = 0.0;
  Vec sum_ax_;
  double sum_axx_ = 0.0;
  std::vector<std::pair<double, Vec>> anchors_;
};

// Free-function forms mirroring the module operations.
inline Vec grad_conjugate(const TimeVaryingMap& map, const Vec& z) { return map.grad_conjugate(z); }

inline double bregman(const MirrorMap& map, const Vec& x, const Vec& y) { return map.bregman(x, y); }

inline double bregman_dual(const TimeVaryingMap& map, const Vec& z1, const Vec& z2) {
  return map.bregman_dual(z1, z2);
}

}  // namespace gapopt
