#pragma once

#include <map>
#include <string>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"
#include "gapopt/feasible_set.hpp"
#include "gapopt/objective.hpp"

namespace gapopt {

// huber_delta(t): t^2/(2 delta) for |t| <= delta, |t| - delta/2 beyond.
inline double huber(double t, double delta) {
  const double a = std::abs(t);
  return a <= delta ? t * t / (2.0 * delta) : a - delta / 2.0;
}
inline double huber_grad(double t, double delta) { return std::clamp(t / delta, -1.0, 1.0); }

struct InstanceSpec {
  std::string family;
  int dim = 2;
  std::string set_kind = "rn";  // rn | box | simplex | ball
  std::map<std::string, double> params;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct Instance {
  enum class Type { Minimization, Operator, Saddle };
  Type type = Type::Minimization;
  FeasibleSet set = FeasibleSet::all_of_rn(1);
  Objective objective;
  MonotoneOp op;
  SaddleProblem saddle;
  GroundTruth gt;
  std::string family;
};

// ---------------------------------------------------------------------------
// Reference solvers for ground truths without a closed form. Capped at 1e6
// iterations; the caller certifies the residual afterwards.
// ---------------------------------------------------------------------------
inline Vec reference_projected_gradient(const Objective& f, const FeasibleSet& set, Vec x0) {
  const double L = f.smooth_or_throw();
  Vec x = set.project(std::move(x0));
  for (long it = 0; it < 1000000; ++it) {
    const Vec xn = set.project(x - f.gradient(x) / L);
    const double res = (xn - x).lpNorm<Eigen::Infinity>() * L;
    x = xn;
    if (res <= 1e-13) break;
  }
  return x;
}

inline Vec reference_fista_l1(const Objective& f, double lambda, Vec x0) {
  // FISTA on f + lambda ||x||_1 over R^n
  const double L = f.smooth_or_throw();
  Vec x = std::move(x0);
  Vec y = x;
  double t = 1.0;
  for (long it = 0; it < 1000000; ++it) {
    Vec xn = y - f.gradient(y) / L;
    for (int j = 0; j < xn.size(); ++j) xn[j] = soft_threshold(xn[j], lambda / L);
    const double tn = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
    y = xn + ((t - 1.0) / tn) * (xn - x);
    const double res = (xn - x).lpNorm<Eigen::Infinity>() * L;
    x = xn;
    t = tn;
    if (res <= 1e-13 && it > 10) break;
  }
  return x;
}

// Optimality residual of a ground truth: gradient norm when unconstrained,
// fixed-point (VI / prox) residual otherwise.
inline double ground_truth_residual(const Instance& inst) {
  const auto& f = inst.objective;
  const Vec& xs = inst.gt.x_star;
  const double scale = f.constants().smooth.value_or(1.0);
  if (inst.set.kind() == FeasibleSet::Kind::AllOfRn && !f.is_composite()) return f.gradient(xs).norm();
  Vec step = xs - f.gradient(xs) / scale;
  if (f.composite().kind() == CompositePart::Kind::L1) {
    const double tau = f.composite().weight() / scale;
    for (int j = 0; j < step.size(); ++j) step[j] = soft_threshold(step[j], tau);
  }
  return (xs - inst.set.project(step)).norm() * scale;
}

// ---------------------------------------------------------------------------
// Built-in instance families, deterministic in the seed.
// ---------------------------------------------------------------------------
namespace detail {

inline FeasibleSet make_set(const InstanceSpec& spec, Rng& rng) {
  if (spec.set_kind == "rn") return FeasibleSet::all_of_rn(spec.dim);
  if (spec.set_kind == "simplex") return FeasibleSet::simplex(spec.dim);
  if (spec.set_kind == "ball")
    return FeasibleSet::l2_ball(Vec::Zero(spec.dim), spec.param("radius", 1.0));
  if (spec.set_kind == "box") {
    const double half = spec.param("half_width", 1.0);
    Vec lo(spec.dim), hi(spec.dim);
    for (int j = 0; j < spec.dim; ++j) {
      std::uniform_real_distribution<double> d(0.5 * half, half);
      const double w = d(rng);
      lo[j] = -w;
      hi[j] = w;
    }
    return FeasibleSet::box(lo, hi);
  }
  throw UnknownFamily("unknown set kind: " + spec.set_kind);
}

// diagonal spectrum with the extremes pinned so kappa is exact
inline Vec spectrum(Rng& rng, int dim, double sigma, double L) {
  Vec d(dim);
  std::uniform_real_distribution<double> u(sigma, L);
  for (int j = 0; j < dim; ++j) d[j] = u(rng);
  d[0] = L;
  d[dim - 1] = sigma;
  return d;
}

inline Instance quadratic_instance(const InstanceSpec& spec, Rng& rng) {
  const int n = spec.dim;
  const double sigma = spec.param("sigma", 1.0);
  const double L = spec.param("L", 4.0);
  if (!(sigma > 0.0) || L < sigma) throw DomainError("quadratic: need 0 < sigma <= L");
  const Vec q = spectrum(rng, n, sigma, L);
  const Vec xs_target = uniform_vec(rng, n, -1.0, 1.0);
  const Vec b = q.cwiseProduct(xs_target);  // so the unconstrained minimizer is xs_target

  Instance inst;
  inst.family = spec.family;
  inst.set = make_set(spec, rng);
  Constants c;
  c.smooth = L;
  c.strongly_convex = sigma;
  c.hoelder_l = L;
  c.hoelder_nu = 1.0;
  inst.objective = Objective(
      n, [q, b](const Vec& x) { return 0.5 * x.dot(q.cwiseProduct(x)) - b.dot(x); },
      [q, b](const Vec& x) { return (q.cwiseProduct(x) - b).eval(); }, c);

  if (inst.set.kind() == FeasibleSet::Kind::AllOfRn) {
    inst.gt.x_star = xs_target;
    inst.gt.method = GroundTruth::Method::ClosedForm;
  } else if (inst.set.kind() == FeasibleSet::Kind::Box) {
    // separable: clamp coordinatewise
    Vec xs(n);
    for (int j = 0; j < n; ++j) xs[j] = std::clamp(xs_target[j], inst.set.lower()[j], inst.set.upper()[j]);
    inst.gt.x_star = xs;
    inst.gt.method = GroundTruth::Method::ClosedForm;
  } else {
    inst.gt.x_star = reference_projected_gradient(inst.objective, inst.set, inst.set.sample(rng));
    inst.gt.method = GroundTruth::Method::ReferenceSolve;
  }
  inst.gt.f_star = inst.objective.value(inst.gt.x_star);
  return inst;
}

inline Instance simplex_quadratic_instance(const InstanceSpec& spec, Rng& rng) {
  InstanceSpec s = spec;
  s.set_kind = "simplex";
  const int n = s.dim;
  const double sigma = s.param("sigma", 1.0);
  const double L = s.param("L", 2.0);
  const Vec q = spectrum(rng, n, sigma, L);
  // center inside or outside the simplex depending on params.interior
  Vec c;
  if (s.param("interior", 1.0) > 0.5) {
    c = FeasibleSet::simplex(n).sample(rng) * 0.8;
    c.array() += 0.2 / n;  // keep strictly inside
  } else {
    c = uniform_vec(rng, n, -1.0, 1.0);
  }

  Instance inst;
  inst.family = spec.family;
  inst.set = FeasibleSet::simplex(n);
  Constants cc;
  cc.smooth = L;
  cc.strongly_convex = sigma;
  cc.hoelder_l = L;
  cc.hoelder_nu = 1.0;
  inst.objective = Objective(
      n, [q, c](const Vec& x) { return (0.5 * (x - c).dot(q.cwiseProduct(x - c))); },
      [q, c](const Vec& x) { return q.cwiseProduct(x - c).eval(); }, cc);
  if (s.param("interior", 1.0) > 0.5 && std::abs(c.sum() - 1.0) < 1e-12) {
    inst.gt.x_star = c;
    inst.gt.method = GroundTruth::Method::ClosedForm;
  } else {
    inst.gt.x_star = reference_projected_gradient(inst.objective, inst.set, inst.set.sample(rng));
    inst.gt.method = GroundTruth::Method::ReferenceSolve;
  }
  inst.gt.f_star = inst.objective.value(inst.gt.x_star);
  return inst;
}

// 1-d minimizer of w*huber_delta(u - c) + lam*|u|, then clamped to [lo, hi].
inline double huber_l1_min_1d(double w, double delta, double c, double lam, double lo, double hi) {
  double u;
  if (lam <= 0.0) {
    u = c;
  } else if (w * std::abs(huber_grad(-c, delta)) <= lam + 1e-300) {
    u = 0.0;  // 0 is stationary: |w * clamp(c/delta)| <= lam
  } else if (c > 0.0) {
    u = c - delta * lam / w;  // linear region of the huber gradient
  } else {
    u = c + delta * lam / w;
  }
  return std::clamp(u, lo, hi);
}

inline Instance huber_instance(const InstanceSpec& spec, Rng& rng) {
  const int n = spec.dim;
  const double delta = spec.param("delta", 0.25);
  const double lam = spec.param("lambda", 0.0);
  const Vec w = uniform_vec(rng, n, 0.5, 2.0);
  const Vec c = uniform_vec(rng, n, -1.0, 1.0);

  Instance inst;
  inst.family = spec.family;
  inst.set = make_set(spec, rng);
  Constants cc;
  cc.lipschitz = w.norm();  // gradient coordinates bounded by w_j
  cc.smooth = w.maxCoeff() / delta;
  CompositePart psi = lam > 0.0 ? CompositePart::l1(lam) : CompositePart::zero();
  inst.objective = Objective(
      n,
      [w, c, delta](const Vec& x) {
        double s = 0.0;
        for (int j = 0; j < x.size(); ++j) s += w[j] * huber(x[j] - c[j], delta);
        return s;
      },
      [w, c, delta](const Vec& x) {
        Vec g(x.size());
        for (int j = 0; j < x.size(); ++j) g[j] = w[j] * huber_grad(x[j] - c[j], delta);
        return g;
      },
      cc, psi);

  Vec xs(n);
  for (int j = 0; j < n; ++j) {
    const double lo = inst.set.kind() == FeasibleSet::Kind::Box ? inst.set.lower()[j] : -1e18;
    const double hi = inst.set.kind() == FeasibleSet::Kind::Box ? inst.set.upper()[j] : 1e18;
    xs[j] = huber_l1_min_1d(w[j], delta, c[j], lam, lo, hi);
  }
  inst.gt.x_star = xs;
  inst.gt.method = GroundTruth::Method::ClosedForm;
  inst.gt.f_star = inst.objective.composite_value(xs);
  return inst;
}

inline Instance lasso_instance(const InstanceSpec& spec, Rng& rng) {
  const int n = spec.dim;
  const double lam = spec.param("lambda", 0.5);
  const bool diagonal = spec.param("diagonal", 1.0) > 0.5;
  Mat A;
  if (diagonal) {
    A = uniform_vec(rng, n, 0.7, 1.5).asDiagonal();
  } else {
    A = Mat::NullaryExpr(n, n, [&rng]() {
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      return d(rng);
    });
    A += 1.5 * Mat::Identity(n, n);  // keep it well conditioned
  }
  const Vec b = uniform_vec(rng, n, -1.0, 1.0);
  const double L = (A.transpose() * A).operatorNorm();

  Instance inst;
  inst.family = spec.family;
  inst.set = FeasibleSet::all_of_rn(n);
  Constants cc;
  cc.smooth = L * (1.0 + 1e-12);
  inst.objective = Objective(
      n, [A, b](const Vec& x) { return 0.5 * (A * x - b).squaredNorm(); },
      [A, b](const Vec& x) { return (A.transpose() * (A * x - b)).eval(); }, cc, CompositePart::l1(lam));

  if (diagonal) {
    Vec xs(n);
    for (int j = 0; j < n; ++j) {
      const double a = A(j, j);
      xs[j] = soft_threshold(a * b[j], lam) / (a * a);
    }
    inst.gt.x_star = xs;
    inst.gt.method = GroundTruth::Method::ClosedForm;
  } else {
    inst.gt.x_star = reference_fista_l1(inst.objective, lam, Vec::Zero(n));
    inst.gt.method = GroundTruth::Method::ReferenceSolve;
  }
  inst.gt.f_star = inst.objective.composite_value(inst.gt.x_star);
  return inst;
}

inline Instance hoelder_instance(const InstanceSpec& spec, Rng& rng) {
  // f(x) = sum (2/3)|x_j - c_j|^{3/2}: Hoelder gradients with nu = 1/2
  const int n = spec.dim;
  InstanceSpec s = spec;
  if (s.set_kind == "rn") s.set_kind = "box";
  Instance inst;
  inst.family = spec.family;
  inst.set = make_set(s, rng);
  Vec c(n);
  for (int j = 0; j < n; ++j) {
    std::uniform_real_distribution<double> d(inst.set.lower()[j], inst.set.upper()[j]);
    c[j] = d(rng);
  }
  Constants cc;
  cc.hoelder_l = std::pow(static_cast<double>(n), 0.25);
  cc.hoelder_nu = 0.5;
  inst.objective = Objective(
      n,
      [c](const Vec& x) {
        double sum = 0.0;
        for (int j = 0; j < x.size(); ++j) sum += (2.0 / 3.0) * std::pow(std::abs(x[j] - c[j]), 1.5);
        return sum;
      },
      [c](const Vec& x) {
        Vec g(x.size());
        for (int j = 0; j < x.size(); ++j) g[j] = sgn(x[j] - c[j]) * std::sqrt(std::abs(x[j] - c[j]));
        return g;
      },
      cc);
  inst.gt.x_star = c;  // c lies in the box by construction
  inst.gt.method = GroundTruth::Method::ClosedForm;
  inst.gt.f_star = 0.0;
  return inst;
}

inline Instance bilinear_instance(const InstanceSpec& spec, Rng& rng) {
  // Phi(v, w) = v^T M w on a symmetric box; the saddle point is the origin.
  const int m = spec.dim;
  const double half = spec.param("half_width", 1.0);
  Mat M = Mat::NullaryExpr(m, m, [&rng]() {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    return d(rng);
  });
  if (spec.param("identity", 0.0) > 0.5) M = Mat::Identity(m, m);
  const double L = M.operatorNorm();

  Instance inst;
  inst.family = spec.family;
  inst.type = Instance::Type::Saddle;
  const Vec lo = Vec::Constant(m, -half);
  const Vec hi = Vec::Constant(m, half);
  FeasibleSet vset = FeasibleSet::box(lo, hi);
  FeasibleSet wset = FeasibleSet::box(lo, hi);
  inst.set = FeasibleSet::box((Vec(2 * m) << lo, lo).finished(), (Vec(2 * m) << hi, hi).finished());
  inst.saddle = SaddleProblem(
      vset, wset, [M](const Vec& v, const Vec& w) { return v.dot(M * w); },
      [M](const Vec&, const Vec& w) { return (M * w).eval(); },
      [M](const Vec& v, const Vec&) { return (M.transpose() * v).eval(); }, L);
  inst.op = inst.saddle.induced_operator();
  inst.gt.x_star = Vec::Zero(2 * m);
  inst.gt.f_star = 0.0;
  inst.gt.method = GroundTruth::Method::ClosedForm;
  return inst;
}

// Exact equilibrium of a small zero-sum matrix game by support enumeration;
// v minimizes, w maximizes v^T M w.
inline bool game_equilibrium(const Mat& M, Vec& v_star, Vec& w_star, double& game_value) {
  const int m = static_cast<int>(M.rows());
  const int n = static_cast<int>(M.cols());
  if (m > 5 || n > 5) return false;
  for (int k = 1; k <= std::min(m, n); ++k) {
    for (int si = 0; si < (1 << m); ++si) {
      if (__builtin_popcount(si) != k) continue;
      for (int sj = 0; sj < (1 << n); ++sj) {
        if (__builtin_popcount(sj) != k) continue;
        std::vector<int> I, J;
        for (int i = 0; i < m; ++i)
          if (si >> i & 1) I.push_back(i);
        for (int j = 0; j < n; ++j)
          if (sj >> j & 1) J.push_back(j);
        // unknowns: w on J and value; rows in I have equal payoff = value
        Mat Aw = Mat::Zero(k + 1, k + 1);
        Vec bw = Vec::Zero(k + 1);
        for (int r = 0; r < k; ++r) {
          for (int cidx = 0; cidx < k; ++cidx) Aw(r, cidx) = M(I[r], J[cidx]);
          Aw(r, k) = -1.0;
        }
        Aw.row(k).head(k).setOnes();
        bw[k] = 1.0;
        const Vec solw = Aw.fullPivLu().solve(bw);
        if ((Aw * solw - bw).norm() > 1e-9) continue;
        // unknowns: v on I and value
        Mat Av = Mat::Zero(k + 1, k + 1);
        Vec bv = Vec::Zero(k + 1);
        for (int cidx = 0; cidx < k; ++cidx) {
          for (int r = 0; r < k; ++r) Av(cidx, r) = M(I[r], J[cidx]);
          Av(cidx, k) = -1.0;
        }
        Av.row(k).head(k).setOnes();
        bv[k] = 1.0;
        const Vec solv = Av.fullPivLu().solve(bv);
        if ((Av * solv - bv).norm() > 1e-9) continue;

        Vec v = Vec::Zero(m), w = Vec::Zero(n);
        bool ok = true;
        for (int r = 0; r < k; ++r) {
          if (solv[r] < -1e-12 || solw[r] < -1e-12) ok = false;
          v[I[r]] = std::max(solv[r], 0.0);
          w[J[r]] = std::max(solw[r], 0.0);
        }
        if (!ok) continue;
        const double val = solw[k];
        // off-support optimality: rows >= val (v minimizes), columns <= val
        const Vec row_payoff = M * w;
        const Vec col_payoff = M.transpose() * v;
        for (int i = 0; i < m && ok; ++i)
          if (row_payoff[i] < val - 1e-9) ok = false;
        for (int j = 0; j < n && ok; ++j)
          if (col_payoff[j] > val + 1e-9) ok = false;
        if (!ok) continue;
        v_star = v;
        w_star = w;
        game_value = val;
        return true;
      }
    }
  }
  return false;
}

inline Instance matrix_game_instance(const InstanceSpec& spec, Rng& rng) {
  const int m = spec.dim;
  Mat M;
  if (spec.param("pennies", 0.0) > 0.5) {
    M = Mat(2, 2);
    M << 1, -1, -1, 1;
  } else {
    M = Mat::NullaryExpr(m, m, [&rng]() {
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      return d(rng);
    });
  }
  const int rows = static_cast<int>(M.rows());
  const int cols = static_cast<int>(M.cols());

  Instance inst;
  inst.family = spec.family;
  inst.type = Instance::Type::Saddle;
  FeasibleSet vset = FeasibleSet::simplex(rows);
  FeasibleSet wset = FeasibleSet::simplex(cols);
  inst.set = FeasibleSet::simplex_product({rows, cols});
  const double L = M.cwiseAbs().maxCoeff();  // smoothness wrt l1/linf pairing
  inst.saddle = SaddleProblem(
      vset, wset, [M](const Vec& v, const Vec& w) { return v.dot(M * w); },
      [M](const Vec&, const Vec& w) { return (M * w).eval(); },
      [M](const Vec& v, const Vec&) { return (M.transpose() * v).eval(); }, L);
  inst.op = inst.saddle.induced_operator();

  Vec vs, ws;
  double val = 0.0;
  if (!game_equilibrium(M, vs, ws, val)) throw Unsupported("matrix game equilibrium not found");
  inst.gt.x_star = (Vec(rows + cols) << vs, ws).finished();
  inst.gt.f_star = val;
  inst.gt.method = GroundTruth::Method::ClosedForm;
  return inst;
}

}  // namespace detail

inline Instance make_instance(const InstanceSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  if (spec.family == "quadratic")
    inst = detail::quadratic_instance(spec, rng);
  else if (spec.family == "simplex-quadratic")
    inst = detail::simplex_quadratic_instance(spec, rng);
  else if (spec.family == "huber")
    inst = detail::huber_instance(spec, rng);
  else if (spec.family == "lasso")
    inst = detail::lasso_instance(spec, rng);
  else if (spec.family == "hoelder")
    inst = detail::hoelder_instance(spec, rng);
  else if (spec.family == "bilinear-box")
    inst = detail::bilinear_instance(spec, rng);
  else if (spec.family == "matrix-game")
    inst = detail::matrix_game_instance(spec, rng);
  else
    throw UnknownFamily("unknown instance family: " + spec.family);

  // build-time gate: certify constants and ground truth before handing out
  Rng crng(seed ^ 0x9e3779b97f4a7c15ull);
  if (inst.type == Instance::Type::Minimization) {
    certify_objective(inst.objective, inst.set, crng);
    if (ground_truth_residual(inst) > 1e-10)
      throw CertificationError("ground truth failed the optimality-residual gate");
  } else {
    certify_monotone(inst.op, inst.set, crng);
  }
  return inst;
}

}  // namespace gapopt
