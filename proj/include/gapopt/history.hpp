#pragma once

#include <string>
#include <vector>

#include "gapopt/common.hpp"
#include "gapopt/errors.hpp"

namespace gapopt {

enum class Setting { Md, Mp, Amd, Gd, Asc, AscUnconstrained, Cmd, Fw };

inline std::string setting_name(Setting s) {
  switch (s) {
    case Setting::Md:
      return "md";
    case Setting::Mp:
      return "mp";
    case Setting::Amd:
      return "amd";
    case Setting::Gd:
      return "gd";
    case Setting::Asc:
      return "asc";
    case Setting::AscUnconstrained:
      return "asc-unconstrained";
    case Setting::Cmd:
      return "cmd";
    case Setting::Fw:
      return "fw";
  }
  return "?";
}

inline Setting setting_from_name(const std::string& s) {
  if (s == "md") return Setting::Md;
  if (s == "mp") return Setting::Mp;
  if (s == "amd") return Setting::Amd;
  if (s == "gd") return Setting::Gd;
  if (s == "asc") return Setting::Asc;
  if (s == "asc-unconstrained") return Setting::AscUnconstrained;
  if (s == "cmd") return Setting::Cmd;
  if (s == "fw") return Setting::Fw;
  throw UnknownSetting("unknown solver setting: " + s);
}

// Full per-iterate record of a discrete run. Entry i holds the quantities
// of step i; settings that do not use a field leave it empty.
struct IterateHistory {
  Setting setting = Setting::Md;
  std::vector<double> a, A;     // weights a_i and prefix sums A^(i)
  std::vector<Vec> x;           // query points x^(i)
  std::vector<Vec> xhat;        // averaged / Grad-mapped outputs
  std::vector<Vec> z;           // aggregated negative gradients
  std::vector<Vec> grad;        // grad f(x^(i)) or F(x^(i))
  std::vector<double> fx;       // f(x^(i))
  std::vector<double> fxhat;    // f(xhat^(i)) (f-bar for composite)
  std::vector<double> psi_x;    // psi(x^(i)) for composite runs
  std::vector<Vec> lmo;         // fw: v^(i) = lmo point of step i
  std::vector<double> fw_min;   // fw: f(x^(i)) + min_u {<g_i, u - x_i>} + psi term
  std::vector<double> psi_lmo;  // fw: psi(v^(i))

  int steps() const { return static_cast<int>(x.size()); }

  void require(int i) const {
    if (i < 0 || i >= steps()) throw MissingHistory("history index out of range: " + std::to_string(i));
  }
};

// Solver state exposed by the step functions; run() keeps it in sync with
// the history.
struct SolverState {
  int k = 0;
  Vec x, xhat, z;
  Vec x_tilde, z_tilde;  // mirror-prox intermediates
  Vec fw_vertex;         // frank-wolfe lmo point
};

}  // namespace gapopt
