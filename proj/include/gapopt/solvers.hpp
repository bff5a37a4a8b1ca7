#pragma once

#include <functional>
#include <utility>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"
#include "gapopt/gap.hpp"
#include "gapopt/history.hpp"
#include "gapopt/mirror_map.hpp"
#include "gapopt/objective.hpp"
#include "gapopt/schedule.hpp"

namespace gapopt {

// Grad(x) = argmin_{u in X} { <g, u - x> + (L/2) ||u - x||^2 } — a euclidean
// projection of the gradient step.
inline Vec grad_step(const FeasibleSet& set, const Vec& x, const Vec& g, double L) {
  return set.project(x - g / L);
}

// lmo for the generalized Frank-Wolfe term min_u { <g, u> + psi(u) } over the
// set; plain linear minimization when psi is an indicator or zero.
inline Vec fw_lmo(const FeasibleSet& set, const Vec& g, const CompositePart& psi) {
  switch (psi.kind()) {
    case CompositePart::Kind::Zero:
    case CompositePart::Kind::Indicator:
      return set.linear_minimizer(g);
    case CompositePart::Kind::L1: {
      if (set.kind() != FeasibleSet::Kind::Box)
        throw NoLMO("composite frank-wolfe with l1 needs a box set");
      const double lam = psi.weight();
      Vec v(set.dim());
      for (int j = 0; j < set.dim(); ++j) {
        const double lo = set.lower()[j], hi = set.upper()[j];
        double best = lo, bestval = g[j] * lo + lam * std::abs(lo);
        const double vhi = g[j] * hi + lam * std::abs(hi);
        if (vhi < bestval) {
          best = hi;
          bestval = vhi;
        }
        if (lo < 0.0 && hi > 0.0 && 0.0 < bestval) best = 0.0;
        v[j] = best;
      }
      return v;
    }
  }
  throw NoLMO("fw_lmo: unknown composite kind");
}

struct RunResult {
  IterateHistory history;
  std::vector<GapRecord> records;
};

namespace detail {

inline void push_iterate(IterateHistory& h, double a, double A, Vec x, Vec xhat, Vec z, Vec g,
                         double fx, double fxhat) {
  h.a.push_back(a);
  h.A.push_back(A);
  h.x.push_back(std::move(x));
  h.xhat.push_back(std::move(xhat));
  h.z.push_back(std::move(z));
  h.grad.push_back(std::move(g));
  h.fx.push_back(fx);
  h.fxhat.push_back(fxhat);
}

inline void check_feasible(const FeasibleSet& set, const Vec& x, int k, const char* what) {
  if (!set.contains(x, 1e-9))
    throw InvariantViolation(k, "feasibility", std::string(what) + " left the feasible set");
}

// z must equal -sum a_i grad_i; re-accumulated independently at power-of-two
// steps and at the end of the run.
inline void check_dual_aggregate(const IterateHistory& h, int k) {
  Vec acc = Vec::Zero(h.z[k].size());
  for (int i = 0; i <= k; ++i) acc -= h.a[i] * h.grad[i];
  const double scale = 1.0 + h.z[k].lpNorm<Eigen::Infinity>();
  if ((acc - h.z[k]).lpNorm<Eigen::Infinity>() > 1e-12 * scale)
    throw InvariantViolation(k, "dual-aggregate", "z != -sum a_i grad f(x_i)");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Individual step functions. Each advances state from i-1 to i using the
// paper's update block; run() wires them to the history and tracker.
// ---------------------------------------------------------------------------

inline void md_step(SolverState& s, const Objective& f, const TimeVaryingMap& map,
                    const Schedule& sched, int i) {
  const Vec xi = map.grad_conjugate(s.z);
  const Vec gi = f.gradient(xi);
  s.z -= sched.a(i) * gi;
  s.xhat = (sched.A(i - 1) * s.xhat + sched.a(i) * xi) / sched.A(i);
  s.x = xi;
  s.k = i;
}

inline void mp_step(SolverState& s, const std::function<Vec(const Vec&)>& g_oracle,
                    const TimeVaryingMap& map, const Schedule& sched, int i) {
  const double a = sched.a(i);
  s.x_tilde = map.grad_conjugate(s.z);
  s.z_tilde = s.z - a * g_oracle(s.x_tilde);
  const Vec xi = map.grad_conjugate(s.z_tilde);
  const Vec gi = g_oracle(xi);
  s.z -= a * gi;
  const double A_prev = sched.A(i - 1);
  s.xhat = A_prev > 0.0 ? ((A_prev * s.xhat + a * xi) / sched.A(i)).eval() : xi;
  s.x = xi;
  s.k = i;
}

inline void amd_step(SolverState& s, const Objective& f, const TimeVaryingMap& map,
                     const Schedule& sched, int i) {
  const double L = f.smooth_or_throw();
  const double a = sched.a(i);
  const Vec xi = (sched.A(i - 1) * s.xhat + a * map.grad_conjugate(s.z)) / sched.A(i);
  const Vec gi = f.gradient(xi);
  s.z -= a * gi;
  s.xhat = grad_step(map.base().set(), xi, gi, L);
  s.x = xi;
  s.k = i;
}

inline void gd_step(SolverState& s, const Objective& f, const TimeVaryingMap& map,
                    const Schedule& sched, int i) {
  const double sigma = map.base().scale();
  const Vec x0 = map.base().center();
  const Vec xi = x0 + s.z / sigma;
  // lazy form coincides with the classical step x_{i-1} - (a_{i-1}/sigma) grad
  const Vec classical = s.x - (sched.a(i - 1) / sigma) * f.gradient(s.x);
  if ((xi - classical).lpNorm<Eigen::Infinity>() > 1e-12 * (1.0 + xi.lpNorm<Eigen::Infinity>()))
    throw InvariantViolation(i, "gd-equivalence", "lazy and classical gradient-descent steps diverge");
  const Vec gi = f.gradient(xi);
  s.z -= sched.a(i) * gi;
  s.xhat = x0 + s.z / sigma;  // x^(i+1), the value U^(i) reads
  s.x = xi;
  s.k = i;
}

inline void asc_step(SolverState& s, const Objective& f, TimeVaryingMap& map, const Schedule& sched,
                     int i) {
  const double L = f.smooth_or_throw();
  const double a = sched.a(i);
  const Vec xi = (sched.A(i - 1) * s.xhat + a * map.grad_conjugate(s.z)) / sched.A(i);
  map.add_anchor(a, xi);
  const Vec gi = f.gradient(xi);
  s.z -= a * gi;
  s.xhat = grad_step(map.base().set(), xi, gi, L);
  s.x = xi;
  s.k = i;
}

// Unconstrained variant: x^(i) mixes grad phi_i^*(z^(i-1)), whose anchor
// includes x^(i) itself; solved in closed form.
inline void asc_unconstrained_step(SolverState& s, const Objective& f, TimeVaryingMap& map,
                                   const Schedule& sched, int i) {
  const double L = f.smooth_or_throw();
  const double a = sched.a(i);
  const double A = sched.A(i);
  const double A_prev = sched.A(i - 1);
  const double sigma = map.sigma();
  const double sigma0 = map.base().scale();
  const double sigma_i = sigma * A + sigma0;
  const Vec c = (s.z + sigma * map.anchor_weighted_sum() + sigma0 * map.base().center()) / sigma_i;
  // sigma * a^2 / sigma_i evaluated as a * (sigma * a / sigma_i) so the
  // geometric growth of a cannot overflow the intermediate
  const Vec xi = (A_prev * s.xhat + a * c) / (A - a * (sigma * a / sigma_i));
  map.add_anchor(a, xi);
  const Vec gi = f.gradient(xi);
  s.z -= a * gi;
  s.xhat = xi - gi / L;
  s.x = xi;
  s.k = i;
}

inline void cmd_step(SolverState& s, const Objective& f, TimeVaryingMap& map, const Schedule& sched,
                     int i) {
  map.set_accumulated_weight(sched.A(i));
  const Vec xi = map.grad_conjugate(s.z);
  const Vec gi = f.gradient(xi);
  s.z -= sched.a(i) * gi;
  s.xhat = (sched.A(i - 1) * s.xhat + sched.a(i) * xi) / sched.A(i);
  s.x = xi;
  s.k = i;
}

inline void fw_step(SolverState& s, const Objective& f, const FeasibleSet& set, const Schedule& sched,
                    int i) {
  const Vec xi = (sched.A(i - 1) * s.x + sched.a(i) * s.fw_vertex) / sched.A(i);
  const Vec gi = f.gradient(xi);
  s.fw_vertex = fw_lmo(set, gi, f.composite());
  s.x = xi;
  s.xhat = xi;
  s.z = -gi;  // zhat in the paper's notation
  s.k = i;
}

// ---------------------------------------------------------------------------
// run(): full solve with optional gap tracking. The map is taken by value;
// evolving modes mutate the copy.
// ---------------------------------------------------------------------------
inline RunResult run(Setting setting, const Objective& f, const FeasibleSet& set, TimeVaryingMap map,
                     const Schedule& sched, int k_max, const Vec& x0, TrackerConfig tracker = {}) {
  if (k_max < 0 || sched.max_index() < k_max)
    throw IncompatibleConfiguration("schedule shorter than the requested horizon");
  if (!set.contains(x0, 1e-9)) throw IncompatibleConfiguration("start point outside the feasible set");

  // per-setting preconditions
  switch (setting) {
    case Setting::Gd:
      if (set.kind() != FeasibleSet::Kind::AllOfRn)
        throw Unsupported("gradient descent requires an unconstrained set");
      if (map.base().kind() != MirrorMap::Kind::Euclidean || map.mode() != TimeVaryingMap::Mode::Static)
        throw IncompatibleConfiguration("gradient descent needs a static euclidean map");
      f.smooth_or_throw();
      break;
    case Setting::Amd:
      f.smooth_or_throw();
      if (map.mode() != TimeVaryingMap::Mode::Static)
        throw IncompatibleConfiguration("amd needs a static map");
      break;
    case Setting::Asc:
    case Setting::AscUnconstrained:
      f.smooth_or_throw();
      f.strongly_convex_or_throw();
      if (map.mode() != TimeVaryingMap::Mode::Accumulation)
        throw IncompatibleConfiguration("asc needs an accumulation-mode map");
      if (setting == Setting::AscUnconstrained && set.kind() != FeasibleSet::Kind::AllOfRn)
        throw Unsupported("the unconstrained asc variant requires all of R^n");
      break;
    case Setting::Cmd:
      if (map.mode() != TimeVaryingMap::Mode::Composite)
        throw IncompatibleConfiguration("cmd needs a composite-mode map");
      break;
    case Setting::Fw:
      if (!set.bounded()) throw NoLMO("frank-wolfe requires a bounded set");
      break;
    default:
      break;
  }

  const bool composite = f.is_composite() || setting == Setting::Fw;
  GapTracker tracked(setting, &f, tracker);
  tracked.set_map_sigma(map.base().strong_convexity());

  IterateHistory h;
  h.setting = setting;
  RunResult out;

  SolverState s;
  s.x = x0;
  s.xhat = x0;
  const Vec g0 = f.gradient(x0);
  const double a0 = sched.a(0);
  s.z = -a0 * g0;

  // initialization per setting
  double fxhat0 = f.value(x0);
  switch (setting) {
    case Setting::Amd:
      s.xhat = grad_step(set, x0, g0, f.smooth_or_throw());
      fxhat0 = f.value(s.xhat);
      break;
    case Setting::Asc:
      map.add_anchor(a0, x0);
      s.xhat = grad_step(set, x0, g0, f.smooth_or_throw());
      fxhat0 = f.value(s.xhat);
      break;
    case Setting::AscUnconstrained:
      map.add_anchor(a0, x0);
      s.xhat = x0 - g0 / f.smooth_or_throw();
      fxhat0 = f.value(s.xhat);
      break;
    case Setting::Gd:
      s.xhat = map.base().center() + s.z / map.base().scale();
      fxhat0 = f.value(s.xhat);
      break;
    case Setting::Cmd:
      map.set_accumulated_weight(sched.A(0));
      fxhat0 = f.composite_value(x0);
      break;
    case Setting::Fw:
      s.fw_vertex = fw_lmo(set, g0, f.composite());
      s.z = -g0;
      fxhat0 = f.composite_value(x0);
      break;
    case Setting::Md:
    case Setting::Mp:
      break;
  }

  detail::push_iterate(h, a0, sched.A(0), x0, s.xhat, s.z, g0, f.value(x0), fxhat0);
  if (composite) h.psi_x.push_back(f.composite().value(x0));
  if (setting == Setting::Fw) {
    h.lmo.push_back(s.fw_vertex);
    const double psiv = f.composite().value(s.fw_vertex);
    h.psi_lmo.push_back(psiv);
    h.fw_min.push_back(f.value(x0) + g0.dot(s.fw_vertex - x0) + psiv);
  }
  tracked.record(h, map, 0);

  for (int i = 1; i <= k_max; ++i) {
    switch (setting) {
      case Setting::Md:
        md_step(s, f, map, sched, i);
        break;
      case Setting::Mp:
        mp_step(s, [&f](const Vec& p) { return f.gradient(p); }, map, sched, i);
        break;
      case Setting::Amd:
        amd_step(s, f, map, sched, i);
        break;
      case Setting::Gd:
        gd_step(s, f, map, sched, i);
        break;
      case Setting::Asc:
        asc_step(s, f, map, sched, i);
        break;
      case Setting::AscUnconstrained:
        asc_unconstrained_step(s, f, map, sched, i);
        break;
      case Setting::Cmd:
        cmd_step(s, f, map, sched, i);
        break;
      case Setting::Fw:
        fw_step(s, f, set, sched, i);
        break;
    }

    detail::check_feasible(set, s.x, i, "x");
    detail::check_feasible(set, s.xhat, i, "xhat");

    const Vec gi = setting == Setting::Fw ? (-s.z).eval() : f.gradient(s.x);
    double fxh = f.value(s.xhat);
    if (setting == Setting::Cmd || setting == Setting::Fw) fxh += f.composite().value(s.xhat);
    detail::push_iterate(h, sched.a(i), sched.A(i), s.x, s.xhat, s.z, gi, f.value(s.x), fxh);
    if (composite) h.psi_x.push_back(f.composite().value(s.x));
    if (setting == Setting::Fw) {
      h.lmo.push_back(s.fw_vertex);
      const double psiv = f.composite().value(s.fw_vertex);
      h.psi_lmo.push_back(psiv);
      h.fw_min.push_back(h.fx.back() + gi.dot(s.fw_vertex - s.x) + psiv);
    }
    if (setting != Setting::Fw && ((i & (i - 1)) == 0 || i == k_max))
      detail::check_dual_aggregate(h, i);
    tracked.record(h, map, i);
  }

  out.history = std::move(h);
  out.records = tracked.records();
  return out;
}

}  // namespace gapopt
