#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"
#include "gapopt/history.hpp"
#include "gapopt/mirror_map.hpp"
#include "gapopt/objective.hpp"
#include "gapopt/schedule.hpp"

namespace gapopt {

// Per-iteration gap certificate. Ed is the recorded discretization error:
// the exact per-step change of A*G where the setting admits an equality
// form, an upper bound otherwise (ed_is_equality tells which).
struct GapRecord {
  int k = 0;
  double A = 0.0;
  double f_xhat = 0.0;
  double U = 0.0;
  double L = 0.0;
  double G = 0.0;
  double Ed = 0.0;
  bool ed_is_equality = true;
  double scaled_gap = 0.0;
  double theorem_bound = 0.0;
  double f_best = 0.0;
};

// Constants a theorem's right-hand side needs.
struct TheoremParams {
  std::optional<double> lipschitz;   // objective Lipschitz constant
  std::optional<double> smooth;      // objective or operator smoothness L
  std::optional<double> sigma_f;     // objective strong convexity
  std::optional<double> sigma_map;   // regularizer strong convexity
  std::optional<double> d_psi;       // D_psi(x*, x0), the initial divergence
  std::optional<double> diameter;    // feasible-set diameter (fw)
  std::optional<double> hoelder_l;   // (L_nu, nu)
  std::optional<double> hoelder_nu;
  std::optional<double> max_d_psi;   // max_x D_psi(x, x0) (mp)
  std::optional<int> horizon;        // fixed-horizon K for md/cmd schedules
};

namespace detail {
inline double need(const std::optional<double>& v, const char* what) {
  if (!v) throw MissingConstant(std::string("theorem bound needs ") + what);
  return *v;
}
}  // namespace detail

// The convergence theorem's right-hand side at iteration k. For the
// fixed-horizon settings (md, cmd) the per-k value is the theorem's own
// chain bound, which coincides with the stated rate at k = horizon.
inline double theorem_bound(Setting setting, int k, const TheoremParams& p) {
  using detail::need;
  switch (setting) {
    case Setting::Md:
    case Setting::Cmd: {
      const double L = need(p.lipschitz, "lipschitz");
      const double sig = need(p.sigma_map, "sigma_map");
      const double D = need(p.d_psi, "d_psi");
      if (!p.horizon) throw MissingConstant("theorem bound needs horizon");
      const double K1 = *p.horizon + 1.0;
      return L * std::sqrt(D / (2.0 * sig)) * (1.0 / std::sqrt(K1) + std::sqrt(K1) / (k + 1.0));
    }
    case Setting::Amd: {
      const double L = need(p.smooth, "smooth");
      const double sig = need(p.sigma_map, "sigma_map");
      const double D = need(p.d_psi, "d_psi");
      return 4.0 * L * D / (sig * (k + 1.0) * (k + 2.0));
    }
    case Setting::Gd: {
      const double L = need(p.smooth, "smooth");
      const double sig = need(p.sigma_map, "sigma_map");
      const double D = need(p.d_psi, "d_psi");
      return L * D / (sig * (k + 1.0));
    }
    case Setting::Asc: {
      const double kappa = need(p.smooth, "smooth") / need(p.sigma_f, "sigma_f");
      const double D = need(p.d_psi, "d_psi");
      const double r = (std::sqrt(4.0 * kappa + 1.0) - 1.0) / (2.0 * kappa);
      return std::pow(1.0 - r, k) * D;
    }
    case Setting::AscUnconstrained: {
      const double kappa = need(p.smooth, "smooth") / need(p.sigma_f, "sigma_f");
      const double D = need(p.d_psi, "d_psi");
      return std::pow(1.0 - 1.0 / std::sqrt(kappa), k) * D;
    }
    case Setting::Fw: {
      const double Lnu = need(p.hoelder_l, "hoelder_l");
      const double nu = need(p.hoelder_nu, "hoelder_nu");
      const double D = need(p.diameter, "diameter");
      return std::pow(2.0, 1.0 + nu) * Lnu * std::pow(D, 1.0 + nu) / std::pow(k + 1.0, nu);
    }
    case Setting::Mp: {
      const double L = need(p.smooth, "smooth");
      const double sig = need(p.sigma_map, "sigma_map");
      const double D = need(p.max_d_psi, "max_d_psi");
      if (k < 1) throw MissingConstant("mp theorem bound starts at k = 1");
      return (L / sig) * D / k;
    }
  }
  throw UnknownSetting("theorem_bound: unknown setting");
}

// ---------------------------------------------------------------------------
// Upper bound U^(k): last iterate where the setting assumes differentiability,
// weighted average otherwise. Values taken from the recorded history.
// ---------------------------------------------------------------------------
inline double upper_bound(Setting setting, const IterateHistory& h, int k) {
  h.require(k);
  switch (setting) {
    case Setting::Gd:
    case Setting::Amd:
    case Setting::Asc:
    case Setting::AscUnconstrained:
      return h.fxhat[k];
    case Setting::Md:
    case Setting::Mp:
    case Setting::Cmd: {
      double num = 0.0;
      for (int i = 0; i <= k; ++i) num += h.a[i] * (h.fx[i] + (h.psi_x.empty() ? 0.0 : h.psi_x[i]));
      if (!(h.A[k] > 0.0)) throw MissingHistory("upper_bound: zero total weight");
      return num / h.A[k];
    }
    case Setting::Fw: {
      // f(x^(k)) + averaged psi over the lmo points
      double num = h.a[0] * (h.psi_x.empty() ? 0.0 : h.psi_x[0]);
      for (int i = 1; i <= k; ++i) num += h.a[i] * h.psi_lmo[i - 1];
      return h.fx[k] + num / h.A[k];
    }
  }
  throw UnknownSetting("upper_bound: unknown setting");
}

inline double upper_bound(Setting setting, const IterateHistory& h) {
  return upper_bound(setting, h, h.steps() - 1);
}

// ---------------------------------------------------------------------------
// Lower bound L^(k). map_k must be phi_k, the regularizer state at step k.
// f_star_term carries (alpha - A) f(x*), zero in discrete time; the
// phi_correction argument carries the regularizer-at-optimum constant
// phi(x*) the bound subtracts.
// ---------------------------------------------------------------------------
inline double lower_bound(Setting setting, const IterateHistory& h, const TimeVaryingMap& map_k,
                          int k, double f_star_term = 0.0, double phi_correction = 0.0) {
  h.require(k);
  if (setting == Setting::Fw) {
    double num = 0.0;
    for (int i = 0; i <= k; ++i) num += h.a[i] * h.fw_min[i];
    return (num + f_star_term) / h.A[k];
  }
  double s_af = 0.0;   // sum a_i f(x_i)
  double s_agx = 0.0;  // sum a_i <g_i, x_i>
  for (int i = 0; i <= k; ++i) {
    s_af += h.a[i] * h.fx[i];
    s_agx += h.a[i] * h.grad[i].dot(h.x[i]);
  }
  // min_u { sum a_i <g_i, u - x_i> + phi_k(u) } = -phi_k^*(z_k) - s_agx
  const double conj = map_k.conjugate_value(h.z[k]);
  if (!(h.A[k] > 0.0)) throw MissingHistory("lower_bound: zero total weight");
  return (s_af - s_agx - conj - phi_correction + f_star_term) / h.A[k];
}

// ---------------------------------------------------------------------------
// Discretization-error kernels: the propositions' formulas as pure functions
// of their ingredients. The tracker feeds them from a live run; tests feed
// them directly.
// ---------------------------------------------------------------------------

// E_d = -a_i <g_i, conj_zi - x_i> - D_{phi*}(z_{i-1}, z_i); equality for the
// dual-averaging gap, also the mirror-prox form with g = F.
inline double ed_md(double a_i, const Vec& g_i, const Vec& x_i, const Vec& conj_zi, double dual_breg) {
  return -a_i * g_i.dot(conj_zi - x_i) - dual_breg;
}

// Accelerated smooth setting, equality form including the Grad-step change
// of the upper bound.
inline double ed_amd(double a_i, double A_i, double A_im1, double f_xhat_i, double f_xhat_im1,
                     double f_x_i, const Vec& g_i, const Vec& x_i, const Vec& conj_zi,
                     double dual_breg) {
  return A_i * f_xhat_i - A_im1 * f_xhat_im1 - a_i * f_x_i - a_i * g_i.dot(conj_zi - x_i) - dual_breg;
}

// Gradient descent with U^(i) = f(x^(i+1)).
inline double ed_gd(double a_i, double A_i, double f_x_next, double f_x_i, const Vec& g_i,
                    const Vec& x_next, const Vec& x_i, double sigma) {
  return A_i * (f_x_next - f_x_i) - a_i * g_i.dot(x_next - x_i) -
         a_i * a_i / (2.0 * sigma) * g_i.squaredNorm();
}

// Strongly convex accumulation setting: conjugate values under the evolving
// regularizer, phi_i^*(z_i) - phi_{i-1}^*(z_{i-1}).
inline double ed_asc(double a_i, double A_i, double A_im1, double f_xhat_i, double f_xhat_im1,
                     double f_x_i, const Vec& g_i, const Vec& x_i, double conj_i, double conj_im1) {
  return A_i * f_xhat_i - A_im1 * f_xhat_im1 - a_i * f_x_i + a_i * g_i.dot(x_i) + conj_i - conj_im1;
}

// Composite dual averaging, equality form; the recorded bound keeps only the
// leading Bregman term.
inline double ed_cmd_equality(double a_i, double psi_x_i, double dual_breg_i, double conj_i_zim1,
                              double conj_im1_zim1) {
  return dual_breg_i + conj_i_zim1 - conj_im1_zim1 + a_i * psi_x_i;
}

// Frank-Wolfe bound form (Cauchy-Schwarz-ready inner product of gradient and
// lmo-point differences).
inline double ed_fw_bound(double a_i, const Vec& g_i, const Vec& g_im1, const Vec& v_im1, const Vec& v_i) {
  return a_i * (g_i - g_im1).dot(v_im1 - v_i);
}

inline double ed_fw_equality(double a_i, double A_im1, double f_x_i, double f_x_im1, const Vec& g_i,
                             const Vec& v_i, const Vec& x_i, double psi_v_im1, double psi_v_i) {
  return A_im1 * (f_x_i - f_x_im1) - a_i * g_i.dot(v_i - x_i) + a_i * (psi_v_im1 - psi_v_i);
}

// ---------------------------------------------------------------------------
// GapTracker: driven by run() after every step; recomputes U, L, G, E_d
// incrementally, asserts the gap-chain and per-setting error bounds, and
// collects GapRecords.
// ---------------------------------------------------------------------------
struct TrackerConfig {
  bool enabled = false;
  const GroundTruth* gt = nullptr;
  TheoremParams params;
  bool have_theorem_bound = false;
  bool assert_invariants = true;
};

class GapTracker {
 public:
  GapTracker(Setting setting, const Objective* objective, TrackerConfig cfg)
      : setting_(setting), objective_(objective), cfg_(std::move(cfg)) {
    if (cfg_.enabled && cfg_.gt == nullptr)
      throw IncompatibleConfiguration("tracking needs a ground truth for the lower-bound correction");
  }

  const std::vector<GapRecord>& records() const { return records_; }

  // Record step k. map_k is phi_k; for evolving maps the caller invokes this
  // after the map update of step k.
  void record(const IterateHistory& h, const TimeVaryingMap& map_k, int k) {
    if (!cfg_.enabled) return;
    h.require(k);
    const bool composite = !h.psi_x.empty();
    const double f_star = cfg_.gt->f_star;
    const double phi_corr = setting_ == Setting::Fw ? 0.0 : map_k.base().value(cfg_.gt->x_star);

    // running sums
    s_af_ += h.a[k] * h.fx[k];
    s_agx_ += h.a[k] * h.grad[k].dot(h.x[k]);
    if (composite) s_apsi_ += h.a[k] * h.psi_x[k];
    if (setting_ == Setting::Fw) {
      s_am_ += h.a[k] * h.fw_min[k];
      s_apsiv_ += k == 0 ? h.a[0] * (h.psi_x.empty() ? 0.0 : h.psi_x[0]) : h.a[k] * h.psi_lmo[k - 1];
    }
    const double A = h.A[k];
    if (!(A > 0.0)) return;  // mp with a_0 = 0: records start at k = 1

    GapRecord rec;
    rec.k = k;
    rec.A = A;

    // U
    switch (setting_) {
      case Setting::Gd:
      case Setting::Amd:
      case Setting::Asc:
      case Setting::AscUnconstrained:
        rec.U = h.fxhat[k];
        break;
      case Setting::Md:
      case Setting::Mp:
      case Setting::Cmd:
        rec.U = (s_af_ + s_apsi_) / A;
        break;
      case Setting::Fw:
        rec.U = h.fx[k] + s_apsiv_ / A;
        break;
    }

    // L and the conjugate values feeding E_d
    double conj = 0.0;
    Vec conj_point;
    if (setting_ == Setting::Fw) {
      rec.L = s_am_ / A;
    } else {
      conj_point = map_k.grad_conjugate(h.z[k]);
      conj = h.z[k].dot(conj_point) - map_k.value(conj_point);
      rec.L = (s_af_ - s_agx_ - conj - phi_corr) / A;
    }
    rec.G = rec.U - rec.L;
    rec.scaled_gap = A * rec.G;
    rec.f_xhat = h.fxhat[k];
    f_best_ = std::min(f_best_, h.fxhat[k]);
    rec.f_best = f_best_;

    // E_d
    rec.Ed = 0.0;
    rec.ed_is_equality = true;
    if (!records_.empty()) {
      const int km1 = records_.back().k;
      const double a_i = h.a[k];
      switch (setting_) {
        case Setting::Md:
        case Setting::Mp: {
          const double dual_breg = prev_conj_ - conj - conj_point.dot(h.z[km1] - h.z[k]);
          rec.Ed = ed_md(a_i, h.grad[k], h.x[k], conj_point, dual_breg);
          break;
        }
        case Setting::Amd: {
          const double dual_breg = prev_conj_ - conj - conj_point.dot(h.z[km1] - h.z[k]);
          rec.Ed = ed_amd(a_i, A, h.A[km1], h.fxhat[k], h.fxhat[km1], h.fx[k], h.grad[k], h.x[k],
                          conj_point, dual_breg);
          break;
        }
        case Setting::Gd: {
          // xhat_k is x^(k+1) = grad phi^*(z_k), the Grad-mapped output
          rec.Ed = ed_gd(a_i, A, h.fxhat[k], h.fx[k], h.grad[k], h.xhat[k], h.x[k],
                         map_k.base().scale());
          break;
        }
        case Setting::Asc:
        case Setting::AscUnconstrained: {
          rec.Ed = ed_asc(a_i, A, h.A[km1], h.fxhat[k], h.fxhat[km1], h.fx[k], h.grad[k], h.x[k],
                          conj, prev_conj_);
          break;
        }
        case Setting::Cmd: {
          // D_{phi_k^*}(z_k, z_{k-1}) with grad phi_k^*(z_{k-1}) = x^(k)
          const double conj_cross = map_k.conjugate_value(h.z[km1]);
          const double dual_breg = conj - conj_cross - h.x[k].dot(h.z[k] - h.z[km1]);
          rec.Ed = dual_breg;
          rec.ed_is_equality = false;
          ed_equality_ = ed_cmd_equality(a_i, h.psi_x[k], dual_breg, conj_cross, prev_conj_);
          break;
        }
        case Setting::Fw: {
          rec.Ed = ed_fw_bound(a_i, h.grad[k], h.grad[km1], h.lmo[km1], h.lmo[k]);
          rec.ed_is_equality = false;
          ed_equality_ = ed_fw_equality(a_i, h.A[km1], h.fx[k], h.fx[km1], h.grad[k], h.lmo[k],
                                        h.x[k], h.psi_lmo[km1], h.psi_lmo[k]);
          break;
        }
      }
    }

    rec.theorem_bound =
        cfg_.have_theorem_bound ? theorem_bound(setting_, k, cfg_.params) : std::nan("");

    if (cfg_.assert_invariants) assert_invariants(rec, h, k, f_star);
    prev_conj_ = conj;
    records_.push_back(rec);
  }

 private:
  // absolute rounding allowance for quantities assembled from A-scaled sums:
  // A*U and A*L carry cancellation noise of order eps * A * max(|U|, |L|)
  double float_slack(const GapRecord& rec) const {
    return 512.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, rec.A) *
           std::max({1.0, std::abs(rec.U), std::abs(rec.L)});
  }

  void assert_invariants(const GapRecord& rec, const IterateHistory& h, int k, double f_star) {
    const double slack = float_slack(rec);
    const double scale = std::max(1.0, std::abs(rec.scaled_gap));
    const double fhat = h.fxhat[k];
    if (rec.U < fhat - 1e-9 * std::max(1.0, std::abs(fhat)))
      throw InvariantViolation(k, "upper-bound", "U < f(xhat)");
    if (rec.L > f_star + 1e-9 * std::max(1.0, std::abs(f_star)) + slack / std::max(1.0, rec.A))
      throw InvariantViolation(k, "lower-bound", "L > f*");
    if (!records_.empty()) {
      const double delta = rec.scaled_gap - records_.back().scaled_gap;
      if (delta > rec.Ed + 1e-9 * scale + slack)
        throw InvariantViolation(k, "gap-chain", "A G increment exceeds E_d");
      // per-setting discretization-error bounds
      switch (setting_) {
        case Setting::Md:
        case Setting::Cmd: {
          if (objective_ && objective_->constants().lipschitz) {
            const double L = *objective_->constants().lipschitz;
            const double sig = map_sigma_hint_ > 0 ? map_sigma_hint_ : 1.0;
            const double cap = h.a[k] * h.a[k] * L * L / (2.0 * sig);
            if (rec.Ed > cap + 1e-9 * std::max(1.0, cap) + slack)
              throw InvariantViolation(k, "ed-md-bound", "E_d exceeds a_i^2 L^2 / (2 sigma)");
          }
          break;
        }
        case Setting::Amd:
        case Setting::Gd:
        case Setting::Asc:
        case Setting::AscUnconstrained:
        case Setting::Mp:
          if (rec.Ed > 1e-9 * scale + slack)
            throw InvariantViolation(k, "ed-sign", "E_d positive for an error-cancelling setting");
          break;
        case Setting::Fw: {
          if (cfg_.params.hoelder_l && cfg_.params.hoelder_nu && cfg_.params.diameter) {
            const double nu = *cfg_.params.hoelder_nu;
            const double cap = std::pow(h.a[k], 1.0 + nu) / std::pow(h.A[k], nu) *
                               (*cfg_.params.hoelder_l) * std::pow(*cfg_.params.diameter, 1.0 + nu);
            if (rec.Ed > cap + 1e-9 * std::max(1.0, cap) + slack)
              throw InvariantViolation(k, "ed-fw-bound", "E_d exceeds the Hoelder step bound");
          }
          break;
        }
      }
    }
  }

 public:
  // the map strong convexity the md/cmd error bound divides by
  void set_map_sigma(double s) { map_sigma_hint_ = s; }
  double last_ed_equality() const { return ed_equality_; }

 private:
  Setting setting_;
  const Objective* objective_;
  TrackerConfig cfg_;
  std::vector<GapRecord> records_;
  double s_af_ = 0.0, s_agx_ = 0.0, s_apsi_ = 0.0, s_am_ = 0.0, s_apsiv_ = 0.0;
  double prev_conj_ = 0.0;
  double f_best_ = std::numeric_limits<double>::infinity();
  double map_sigma_hint_ = 0.0;
  double ed_equality_ = 0.0;
};

}  // namespace gapopt
