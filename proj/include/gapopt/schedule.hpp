#pragma once

#include <string>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"

namespace gapopt {

// Weight sequence a_i with prefix sums A^(k). Each named kind carries the
// step rule its convergence theorem prescribes.
class Schedule {
 public:
  enum class Kind { MdFixedHorizon, Amd, Gd, Asc, AscUnconstrained, Fw, Mp, Custom };

  static Schedule md_fixed_horizon(int horizon, double lipschitz, double map_sigma, double d_psi) {
    if (horizon < 1) throw DomainError("md schedule: horizon must be >= 1");
    if (!(lipschitz > 0.0) || !(map_sigma > 0.0) || !(d_psi > 0.0))
      throw MissingConstant("md schedule needs L, sigma, D_psi > 0");
    const double a = std::sqrt(2.0 * map_sigma * d_psi / (horizon + 1)) / lipschitz;
    Schedule s(Kind::MdFixedHorizon);
    s.fill_constant(a, horizon);
    s.horizon_ = horizon;
    return s;
  }

  // identical step rule, D measured by the composite theorem's regularizer
  static Schedule cmd_fixed_horizon(int horizon, double lipschitz, double map_sigma, double d_phi) {
    Schedule s = md_fixed_horizon(horizon, lipschitz, map_sigma, d_phi);
    return s;
  }

  static Schedule amd(int k_max, double map_sigma, double smooth) {
    if (!(smooth > 0.0)) throw NotSmooth("amd schedule needs L > 0");
    Schedule s(Kind::Amd);
    s.ratio_ = map_sigma / smooth;
    for (int i = 0; i <= k_max; ++i) s.push(s.ratio_ * (i + 1) / 2.0);
    return s;
  }

  static Schedule gd(int k_max, double map_sigma, double smooth) {
    if (!(smooth > 0.0)) throw NotSmooth("gd schedule needs L > 0");
    Schedule s(Kind::Gd);
    s.fill_constant(map_sigma / smooth, k_max);
    return s;
  }

  static Schedule asc(int k_max, double kappa) {
    if (!(kappa >= 1.0)) throw NotStronglyConvex("asc schedule needs kappa >= 1");
    Schedule s(Kind::Asc);
    s.ratio_ = (std::sqrt(4.0 * kappa + 1.0) - 1.0) / (2.0 * kappa);
    s.fill_geometric(k_max);
    return s;
  }

  static Schedule asc_unconstrained(int k_max, double kappa) {
    if (!(kappa >= 1.0)) throw NotStronglyConvex("asc schedule needs kappa >= 1");
    Schedule s(Kind::AscUnconstrained);
    s.ratio_ = 1.0 / std::sqrt(kappa);
    s.fill_geometric(k_max);
    return s;
  }

  static Schedule fw(int k_max) {
    Schedule s(Kind::Fw);
    for (int i = 0; i <= k_max; ++i) s.push(i + 1.0);
    return s;
  }

  // a_0 = 0: the mirror-prox gap chain starts at i = 1
  static Schedule mp(int k_max, double map_sigma, double op_smooth) {
    if (!(op_smooth > 0.0)) throw NotSmooth("mp schedule needs operator smoothness L > 0");
    Schedule s(Kind::Mp);
    s.a_.push_back(0.0);
    s.A_.push_back(0.0);
    for (int i = 1; i <= k_max; ++i) s.push(map_sigma / op_smooth);
    return s;
  }

  static Schedule custom(std::vector<double> weights) {
    if (weights.empty()) throw DomainError("custom schedule: no weights");
    Schedule s(Kind::Custom);
    for (double a : weights) {
      if (!(a > 0.0)) throw DomainError("custom schedule: weights must be positive");
      s.push(a);
    }
    return s;
  }

  // D-free fallback a_i = c / sqrt(i+1); outside any theorem's coverage,
  // flagged through kind() == Custom.
  static Schedule sqrt_decay(int k_max, double c) {
    std::vector<double> w;
    for (int i = 0; i <= k_max; ++i) w.push_back(c / std::sqrt(i + 1.0));
    return custom(std::move(w));
  }

  Kind kind() const { return kind_; }
  int max_index() const { return static_cast<int>(a_.size()) - 1; }
  int horizon() const { return horizon_; }
  double ratio() const { return ratio_; }

  double a(int i) const {
    check(i);
    return a_[i];
  }
  // A^(k) = sum_{i<=k} a_i
  double A(int k) const {
    check(k);
    return A_[k];
  }

  std::string kind_name() const {
    switch (kind_) {
      case Kind::MdFixedHorizon:
        return "md-fixed-horizon";
      case Kind::Amd:
        return "amd";
      case Kind::Gd:
        return "gd";
      case Kind::Asc:
        return "asc";
      case Kind::AscUnconstrained:
        return "asc-unconstrained";
      case Kind::Fw:
        return "fw";
      case Kind::Mp:
        return "mp";
      case Kind::Custom:
        return "custom";
    }
    return "?";
  }

 private:
  explicit Schedule(Kind k) : kind_(k) {}

  void push(double a) {
    a_.push_back(a);
    A_.push_back((A_.empty() ? 0.0 : A_.back()) + a);
  }
  void fill_constant(double a, int k_max) {
    for (int i = 0; i <= k_max; ++i) push(a);
  }
  // a_0 = 1, a_i / A^(i) = ratio  =>  A^(i) = A^(i-1) / (1 - ratio)
  void fill_geometric(int k_max) {
    push(1.0);
    for (int i = 1; i <= k_max; ++i) {
      const double Ai = A_.back() / (1.0 - ratio_);
      push(Ai - A_.back());
    }
  }
  void check(int i) const {
    if (i < 0 || i >= static_cast<int>(a_.size()))
      throw MissingHistory("schedule index out of range: " + std::to_string(i));
  }

  Kind kind_;
  std::vector<double> a_, A_;
  int horizon_ = -1;
  double ratio_ = 0.0;
};

}  // namespace gapopt
