#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"
#include "gapopt/feasible_set.hpp"
#include "gapopt/mirror_map.hpp"

namespace gapopt {

// Declared, certified constants of an objective. Each is optional; a solver
// that needs one and finds it missing raises the matching error.
struct Constants {
  std::optional<double> lipschitz;        // ||grad f(x)||_* <= lipschitz
  std::optional<double> smooth;           // gradient lipschitz constant L
  std::optional<double> strongly_convex;  // sigma
  std::optional<double> hoelder_l;        // (L_nu, nu) pair
  std::optional<double> hoelder_nu;
};

class Objective {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradFn = std::function<Vec(const Vec&)>;

  Objective() = default;
  Objective(int dim, ValueFn f, GradFn g, Constants c = {}, CompositePart psi = CompositePart::zero())
      : dim_(dim), f_(std::move(f)), g_(std::move(g)), constants_(c), psi_(std::move(psi)) {}

  int dim() const { return dim_; }
  double value(const Vec& x) const { return f_(x); }
  Vec gradient(const Vec& x) const { return g_(x); }
  const Constants& constants() const { return constants_; }
  const CompositePart& composite() const { return psi_; }
  bool is_composite() const { return !psi_.is_zero(); }

  // f-bar = f + psi
  double composite_value(const Vec& x) const { return f_(x) + psi_.value(x); }

  double smooth_or_throw() const {
    if (!constants_.smooth) throw NotSmooth("objective has no certified smoothness constant");
    return *constants_.smooth;
  }
  double strongly_convex_or_throw() const {
    if (!constants_.strongly_convex)
      throw NotStronglyConvex("objective has no certified strong-convexity constant");
    return *constants_.strongly_convex;
  }
  double lipschitz_or_throw() const {
    if (!constants_.lipschitz) throw MissingConstant("objective has no certified Lipschitz constant");
    return *constants_.lipschitz;
  }

 private:
  int dim_ = 0;
  ValueFn f_;
  GradFn g_;
  Constants constants_;
  CompositePart psi_;
};

class MonotoneOp {
 public:
  using OpFn = std::function<Vec(const Vec&)>;

  MonotoneOp() = default;
  MonotoneOp(int dim, OpFn op, double smooth) : dim_(dim), op_(std::move(op)), smooth_(smooth) {}

  int dim() const { return dim_; }
  Vec operator()(const Vec& x) const { return op_(x); }
  double smooth() const { return smooth_; }

 private:
  int dim_ = 0;
  OpFn op_;
  double smooth_ = 0.0;
};

class SaddleProblem {
 public:
  using PhiFn = std::function<double(const Vec&, const Vec&)>;
  using GradBlockFn = std::function<Vec(const Vec&, const Vec&)>;

  SaddleProblem() = default;
  SaddleProblem(FeasibleSet v_set, FeasibleSet w_set, PhiFn phi, GradBlockFn grad_v, GradBlockFn grad_w,
                double smooth)
      : v_set_(std::move(v_set)),
        w_set_(std::move(w_set)),
        phi_(std::move(phi)),
        grad_v_(std::move(grad_v)),
        grad_w_(std::move(grad_w)),
        smooth_(smooth) {}

  const FeasibleSet& v_set() const { return v_set_; }
  const FeasibleSet& w_set() const { return w_set_; }
  int v_dim() const { return v_set_.dim(); }
  int w_dim() const { return w_set_.dim(); }
  int dim() const { return v_dim() + w_dim(); }

  double value(const Vec& v, const Vec& w) const { return phi_(v, w); }
  Vec grad_v(const Vec& v, const Vec& w) const { return grad_v_(v, w); }
  Vec grad_w(const Vec& v, const Vec& w) const { return grad_w_(v, w); }

  // stacked monotone operator F(x) = [grad_v Phi, -grad_w Phi]
  MonotoneOp induced_operator() const {
    const int dv = v_dim();
    const int dw = w_dim();
    auto phi = phi_;
    auto gv = grad_v_;
    auto gw = grad_w_;
    (void)phi;
    return MonotoneOp(
        dv + dw,
        [dv, dw, gv, gw](const Vec& x) {
          const Vec v = x.head(dv);
          const Vec w = x.tail(dw);
          Vec out(dv + dw);
          out.head(dv) = gv(v, w);
          out.tail(dw) = -gw(v, w);
          return out;
        },
        smooth_);
  }

 private:
  FeasibleSet v_set_ = FeasibleSet::all_of_rn(1);
  FeasibleSet w_set_ = FeasibleSet::all_of_rn(1);
  PhiFn phi_;
  GradBlockFn grad_v_, grad_w_;
  double smooth_ = 0.0;
};

struct GroundTruth {
  enum class Method { ClosedForm, ReferenceSolve };
  Vec x_star;
  double f_star = 0.0;
  Method method = Method::ClosedForm;
};

// ---------------------------------------------------------------------------
// Certification: check declared constants against sampled points. Throws
// CertificationError on the first violation so bad instances never reach a
// solver.
// ---------------------------------------------------------------------------
inline void certify_objective(const Objective& f, const FeasibleSet& set, Rng& rng) {
  const int n = f.dim();
  // central-difference gradient check
  for (int t = 0; t < 50; ++t) {
    const Vec x = set.sample(rng);
    const Vec g = f.gradient(x);
    const double gn = g.norm();
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      if (!set.contains(xp, 1e-9) || !set.contains(xm, 1e-9)) continue;  // one-sided near boundary: skip
      const double fd = (f.value(xp) - f.value(xm)) / (2.0 * h);
      if (std::abs(fd - g[j]) > 1e-5 * (1.0 + gn))
        throw CertificationError("gradient oracle disagrees with central differences");
    }
  }
  const auto& c = f.constants();
  for (int t = 0; t < 500; ++t) {
    const Vec x = set.sample(rng);
    const Vec y = set.sample(rng);
    const Vec gx = f.gradient(x);
    const Vec gy = f.gradient(y);
    const double dxy = (x - y).norm();
    const double dg = (gx - gy).norm();
    if (c.lipschitz && gx.norm() > *c.lipschitz * (1.0 + 1e-9) + 1e-12)
      throw CertificationError("declared Lipschitz constant violated");
    if (c.smooth && dg > *c.smooth * dxy * (1.0 + 1e-9) + 1e-12)
      throw CertificationError("declared smoothness constant violated");
    if (c.strongly_convex &&
        (gx - gy).dot(x - y) < *c.strongly_convex * dxy * dxy * (1.0 - 1e-9) - 1e-12)
      throw CertificationError("declared strong-convexity constant violated");
    if (c.hoelder_l && dg > *c.hoelder_l * std::pow(dxy, *c.hoelder_nu) * (1.0 + 1e-9) + 1e-12)
      throw CertificationError("declared Hoelder constants violated");
  }
}

inline void certify_monotone(const MonotoneOp& op, const FeasibleSet& set, Rng& rng) {
  for (int t = 0; t < 500; ++t) {
    const Vec x = set.sample(rng);
    const Vec y = set.sample(rng);
    const Vec fx = op(x);
    const Vec fy = op(y);
    if ((fx - fy).dot(x - y) < -1e-10) throw CertificationError("operator is not monotone");
    if (op.smooth() > 0.0 && (fx - fy).norm() > op.smooth() * (x - y).norm() * (1.0 + 1e-9) + 1e-12)
      throw CertificationError("declared operator smoothness violated");
  }
}

// max over probes u of <F(u), xhat - u>; a probe-restricted certificate for
// the variational-inequality gap.
inline double restricted_vi_gap(const MonotoneOp& op, const Vec& xhat, const std::vector<Vec>& probes) {
  if (probes.empty()) throw EmptyProbeSet("restricted_vi_gap: no probes");
  double g = -std::numeric_limits<double>::infinity();
  for (const Vec& u : probes) g = std::max(g, op(u).dot(xhat - u));
  return g;
}

}  // namespace gapopt
