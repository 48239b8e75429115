#pragma once

// Necessary-condition certificates for candidate programs. A certificate
// reconstructs the adjoint data (rho, phi, h) that the switching structure
// of the candidate dictates, samples the switching function, and checks
// the sign law and the phase-portrait ellipse identity. Separate filters
// mark candidates that provably cannot be globally optimal.

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "minimax_curve/model.hpp"

namespace minimax_curve {

struct CertificateFlags {
  bool mp_consistent = false;
  bool ellipse_consistent = false;
  bool filters_passed = false;
  std::vector<std::string> notes;
};

/// Adjoint reconstruction for one candidate. rho and phi are the polar
/// coordinates of the constant position adjoint, h the Hamiltonian level.
/// lambda3 holds samples of the switching function at uniform times over
/// [0, t_f] (first and last sample at the endpoints).
struct Certificate {
  double rho = 0.0;
  double phi = 0.0;
  double h = 0.0;
  std::vector<double> lambda3;
  CertificateFlags flags;
  bool reconstructed = false;
  double system_residual = std::numeric_limits<double>::infinity();
};

/// Critical chord-to-length ratio: the unique root of
/// b = sinc(pi / (2 (1 - b))) between 0 and 1, found by the secant method
/// from (0.1, 0.2). iters (optional) receives the iteration count.
inline double sos_threshold_b(int* iters = nullptr) {
  const auto f = [](double b) {
    const double u = M_PI / (2.0 * (1.0 - b));
    return b - std::sin(u) / u;
  };
  double b0 = 0.1, b1 = 0.2;
  double f0 = f(b0), f1 = f(b1);
  int it = 0;
  while (std::abs(f1) >= 1e-14 && it < 50) {
    const double b2 = b1 - f1 * (b1 - b0) / (f1 - f0);
    b0 = b1;
    f0 = f1;
    b1 = b2;
    f1 = f(b1);
    ++it;
  }
  if (iters) *iters = it;
  return b1;
}

namespace detail {

/// Arc of the cleaned chain with its entry time and entry heading.
struct ChainArc {
  int turn = 0;       // +1, -1, or 0 (straight)
  bool loop = false;  // renamed full revolution
  double len = 0.0;
  double t0 = 0.0;
  double theta0 = 0.0;
};

inline std::vector<ChainArc> build_chain(const std::vector<CleanArc>& arcs,
                                         double theta_start, double a) {
  std::vector<ChainArc> chain;
  double t = 0.0, th = theta_start;
  for (const CleanArc& arc : arcs) {
    chain.push_back({arc.turn, arc.letter == 'O', arc.length, t, th});
    t += arc.length;
    th += arc.turn * a * arc.length;
  }
  return chain;
}

/// One scalar equation F(rho, phi, h) = 0 with analytic gradient.
struct AdjointEq {
  // kinds: 0 junction cos, 1 singular sin, 2 loop tangency, 3 integral,
  // 4 fix rho = 0, 5 fix phi = phi0.
  int kind = 0;
  double angle = 0.0;  // junction or singular heading
  double a = 0.0;
  double t_f = 0.0;
  const std::vector<ChainArc>* chain = nullptr;

  void eval(double rho, double phi, double h, double& F,
            std::array<double, 3>& dF) const {
    switch (kind) {
      case 0: {
        const double c = std::cos(angle - phi);
        F = rho * c - (h - a);
        dF = {c, rho * std::sin(angle - phi), -1.0};
        return;
      }
      case 1: {
        const double s = std::sin(angle - phi);
        F = rho * s;
        dF = {s, -rho * std::cos(angle - phi), 0.0};
        return;
      }
      case 2:
        F = rho - (a - h);
        dF = {1.0, 0.0, 1.0};
        return;
      case 3: {
        // sum over turning arcs of the exact integral of |lambda3|,
        // minus t_f (the straight arcs contribute zero).
        double cr = 0.0, cphi = 0.0, base = 0.0;
        for (const ChainArc& arc : *chain) {
          if (arc.turn == 0) continue;
          const double th_e = arc.theta0 + arc.turn * a * arc.len;
          const double se = std::sin(th_e - phi);
          const double ss = std::sin(arc.theta0 - phi);
          const double ce = std::cos(th_e - phi);
          const double cs = std::cos(arc.theta0 - phi);
          const double den = arc.turn * a * a;
          cr += (se - ss) / den;
          cphi += (-ce + cs) / den;
          base += arc.len / a;
        }
        F = rho * cr + (a - h) * base - t_f;
        dF = {cr, rho * cphi, -base};
        return;
      }
      case 4:
        F = rho;
        dF = {1.0, 0.0, 0.0};
        return;
      default:
        F = phi - angle;
        dF = {0.0, 1.0, 0.0};
        return;
    }
  }
};

/// Solve the 3x3 system M x = b by Gaussian elimination with partial
/// pivoting; returns false on (numerical) singularity.
inline bool solve3(std::array<std::array<double, 3>, 3> M,
                   std::array<double, 3> b, std::array<double, 3>& x) {
  std::array<int, 3> idx{0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(M[idx[r]][col]) > std::abs(M[idx[piv]][col])) piv = r;
    std::swap(idx[col], idx[piv]);
    const double diag = M[idx[col]][col];
    if (std::abs(diag) < 1e-14) return false;
    for (int r = col + 1; r < 3; ++r) {
      const double fac = M[idx[r]][col] / diag;
      for (int c = col; c < 3; ++c) M[idx[r]][c] -= fac * M[idx[col]][c];
      b[idx[r]] -= fac * b[idx[col]];
    }
  }
  for (int col = 2; col >= 0; --col) {
    double s = b[idx[col]];
    for (int c = col + 1; c < 3; ++c) s -= M[idx[col]][c] * x[c];
    x[col] = s / M[idx[col]][col];
  }
  return true;
}

inline double eq_residual_norm(const std::vector<AdjointEq>& eqs, double rho,
                               double phi, double h) {
  double m = 0.0;
  for (const AdjointEq& eq : eqs) {
    double F;
    std::array<double, 3> dF;
    eq.eval(rho, phi, h, F, dF);
    m = std::max(m, std::abs(F));
  }
  return m;
}

/// Damped Gauss-Newton on the stacked equations from one seed. Returns the
/// final residual infinity norm.
inline double gauss_newton(const std::vector<AdjointEq>& eqs, double& rho,
                           double& phi, double& h) {
  double best = eq_residual_norm(eqs, rho, phi, h);
  for (int it = 0; it < 80; ++it) {
    // Normal equations J^T J delta = -J^T F with Levenberg damping.
    std::array<std::array<double, 3>, 3> JTJ{};
    std::array<double, 3> JTF{};
    double fn = 0.0;
    for (const AdjointEq& eq : eqs) {
      double F;
      std::array<double, 3> dF;
      eq.eval(rho, phi, h, F, dF);
      fn = std::max(fn, std::abs(F));
      for (int i = 0; i < 3; ++i) {
        JTF[i] += dF[i] * F;
        for (int j = 0; j < 3; ++j) JTJ[i][j] += dF[i] * dF[j];
      }
    }
    if (fn < 1e-13) return fn;
    const double damp = 1e-12 * (JTJ[0][0] + JTJ[1][1] + JTJ[2][2]);
    for (int i = 0; i < 3; ++i) JTJ[i][i] += damp;
    std::array<double, 3> delta;
    for (double& v : JTF) v = -v;
    if (!solve3(JTJ, JTF, delta)) return fn;
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 25; ++ls) {
      const double r2 = eq_residual_norm(eqs, rho + step * delta[0],
                                         phi + step * delta[1],
                                         h + step * delta[2]);
      if (r2 < best) {
        rho += step * delta[0];
        phi += step * delta[1];
        h += step * delta[2];
        best = r2;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return best;
  }
  return best;
}

}  // namespace detail

/// Reconstruct the adjoint certificate of a feasible program with a > 0.
/// zero_tol < 0 selects the 1e-6 * t_f default. The reconstruction never
/// throws on bad candidates; it reports through flags and notes.
inline Certificate reconstruct_certificate(const ProblemInstance& inst,
                                           const ArcProgram& prog,
                                           std::size_t n_samples = 1000,
                                           double zero_tol = -1.0) {
  validate_instance(inst);
  if (zero_tol < 0.0) zero_tol = 1e-6 * inst.t_f;
  Certificate cert;

  if (prog.a <= 0.0) {
    cert.flags.mp_consistent = true;
    cert.flags.ellipse_consistent = true;
    cert.flags.notes.push_back(
        "curvature bound is zero: straight-line case, adjoint certificate "
        "not applicable");
    cert.lambda3.assign(n_samples, 0.0);
    return cert;
  }

  const double feas = residuals(inst, prog).max_abs();
  if (feas > 1e-6) {
    cert.flags.notes.push_back("program is not feasible for the instance");
    return cert;
  }

  std::vector<CleanArc> arcs;
  try {
    arcs = cleaned_arcs(prog, zero_tol);
  } catch (const input_error&) {
    cert.flags.notes.push_back("invalid program durations");
    return cert;
  }
  if (arcs.empty()) {
    cert.flags.notes.push_back("no arcs above the zero tolerance");
    return cert;
  }

  const double a = prog.a;
  const double t_f = inst.t_f;
  const std::vector<detail::ChainArc> chain =
      detail::build_chain(arcs, inst.start.theta, a);

  // Stack the defining equations of (rho, phi, h).
  std::vector<detail::AdjointEq> eqs;
  std::vector<double> junction_angles;
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    const double th_j =
        chain[k].theta0 + chain[k].turn * a * chain[k].len;
    junction_angles.push_back(th_j);
    eqs.push_back({0, th_j, a, t_f, &chain});
  }
  std::vector<double> singular_angles;
  bool loop_with_neighbor = false;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (chain[k].turn == 0) {
      singular_angles.push_back(chain[k].theta0);
      eqs.push_back({0, chain[k].theta0, a, t_f, &chain});
      eqs.push_back({1, chain[k].theta0, a, t_f, &chain});
    }
    if (chain[k].loop && chain.size() > 1) loop_with_neighbor = true;
  }
  if (loop_with_neighbor) eqs.push_back({2, 0.0, a, t_f, &chain});
  eqs.push_back({3, 0.0, a, t_f, &chain});

  // Close the remaining freedom for structures with too few conditions.
  const std::size_t structural = eqs.size() - 1;
  if (structural == 0) {
    eqs.push_back({4, 0.0, a, t_f, &chain});
    eqs.push_back({5, 0.0, a, t_f, &chain});
  } else if (structural == 1 && junction_angles.size() == 1) {
    // Lone switch: put it at the top of the adjoint circle (h = a), the
    // one-parameter multiplier family's symmetric representative.
    eqs.push_back({1, junction_angles[0] + M_PI / 2.0, a, t_f, &chain});
  }

  // Seed headings: switch angles, arc midpoints, and quarter offsets.
  std::vector<double> phi_seeds;
  for (double th : junction_angles) {
    phi_seeds.push_back(th);
    phi_seeds.push_back(th + M_PI);
    phi_seeds.push_back(th + M_PI / 2.0);
    phi_seeds.push_back(th - M_PI / 2.0);
  }
  for (double th : singular_angles) {
    phi_seeds.push_back(th);
    phi_seeds.push_back(th + M_PI);
  }
  for (const detail::ChainArc& arc : chain)
    phi_seeds.push_back(arc.theta0 + 0.5 * arc.turn * a * arc.len);
  if (phi_seeds.empty()) phi_seeds.push_back(0.0);

  // The quick sign screen used to choose among multiplier branches: the
  // switching-function magnitude must stay nonnegative on turning arcs and
  // the straight-arc identities must hold.
  const auto sign_consistent = [&](double rho, double phi, double h) {
    for (const detail::ChainArc& arc : chain) {
      if (arc.turn == 0) {
        if (std::abs(rho - std::abs(a - h)) > 1e-7) return false;
        if (std::abs(rho * std::sin(arc.theta0 - phi)) > 1e-7) return false;
        continue;
      }
      for (int i = 0; i <= 64; ++i) {
        const double th = arc.theta0 + arc.turn * a * arc.len * (i / 64.0);
        if ((rho * std::cos(th - phi) + a - h) / a < -1e-7) return false;
      }
    }
    return true;
  };

  double best_rho = 0.0, best_phi = 0.0, best_h = 0.0;
  double best_res = std::numeric_limits<double>::infinity();
  bool best_sign = false;
  for (double phi0 : phi_seeds) {
    // Given phi, every equation is linear in (rho, h): least squares seed.
    double A11 = 0, A12 = 0, A22 = 0, b1 = 0, b2 = 0;
    for (const detail::AdjointEq& eq : eqs) {
      double F;
      std::array<double, 3> dF;
      eq.eval(0.0, phi0, 0.0, F, dF);  // F = -rhs at the origin
      const double cr = dF[0], ch = dF[2], rhs = -F;
      A11 += cr * cr;
      A12 += cr * ch;
      A22 += ch * ch;
      b1 += cr * rhs;
      b2 += ch * rhs;
    }
    const double det = A11 * A22 - A12 * A12;
    double rho0 = 0.0, h0 = 0.0;
    if (std::abs(det) > 1e-14) {
      rho0 = (b1 * A22 - b2 * A12) / det;
      h0 = (A11 * b2 - A12 * b1) / det;
    }
    double rho = rho0, phi = phi0, h = h0;
    const double res = detail::gauss_newton(eqs, rho, phi, h);
    if (rho < 0.0) {
      rho = -rho;
      phi += M_PI;
    }
    phi = wrap_angle(phi);
    const double scale = std::max({1.0, rho, std::abs(h), a});
    const bool solved = res <= 1e-8 * scale;
    const bool sign = solved && sign_consistent(rho, phi, h);
    // Prefer sign-consistent branches, then smaller system residual.
    if ((sign && !best_sign) || (sign == best_sign && res < best_res)) {
      best_res = res;
      best_rho = rho;
      best_phi = phi;
      best_h = h;
      best_sign = sign;
    }
  }

  cert.rho = best_rho;
  cert.phi = best_phi;
  cert.h = best_h;
  cert.system_residual = best_res;
  const double scale = std::max({1.0, best_rho, std::abs(best_h), a});
  cert.reconstructed = best_res <= 1e-8 * scale;
  if (!cert.reconstructed) {
    cert.flags.notes.push_back(
        "adjoint system unsolved (residual " + std::to_string(best_res) +
        ")");
  }

  // Sample the switching function and run the consistency checks.
  if (n_samples < 2) n_samples = 2;
  cert.lambda3.resize(n_samples);
  bool sign_ok = cert.reconstructed;
  bool ellipse_ok = cert.reconstructed;
  const double total = chain.back().t0 + chain.back().len;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = total * (double(i) / double(n_samples - 1));
    // Locate the arc (the last arc absorbs t = total).
    std::size_t k = 0;
    while (k + 1 < chain.size() && t >= chain[k].t0 + chain[k].len) ++k;
    const detail::ChainArc& arc = chain[k];
    double lam3 = 0.0, lam3dot = 0.0, mag = 0.0;
    if (arc.turn == 0) {
      lam3 = 0.0;
      lam3dot = best_rho * std::sin(arc.theta0 - best_phi);
      mag = 0.0;
    } else {
      const double th = arc.theta0 + arc.turn * a * (t - arc.t0);
      mag = (best_rho * std::cos(th - best_phi) + a - best_h) / a;
      lam3 = -arc.turn * mag;
      lam3dot = best_rho * std::sin(th - best_phi);
      if (mag < -1e-7) sign_ok = false;
    }
    cert.lambda3[i] = lam3;
    const double ell = lam3dot * lam3dot +
                       (a * std::abs(mag) - a + best_h) *
                           (a * std::abs(mag) - a + best_h) -
                       best_rho * best_rho;
    if (std::abs(ell) > 1e-7) ellipse_ok = false;
  }
  // Singular arcs additionally pin rho = |a - h| and the heading.
  for (double th : singular_angles) {
    if (std::abs(best_rho - std::abs(a - best_h)) > 1e-7) sign_ok = false;
    if (std::abs(best_rho * std::sin(th - best_phi)) > 1e-7) sign_ok = false;
  }
  cert.flags.mp_consistent = sign_ok;
  cert.flags.ellipse_consistent = ellipse_ok;
  return cert;
}

/// Filter verdict: passed = the candidate survives every necessary
/// condition known in closed form; reasons list the ones it failed.
struct FilterVerdict {
  bool passed = true;
  std::vector<std::string> reasons;
};

/// Mark candidates that cannot be globally optimal: a full loop riding a
/// straight line when the chord-to-length ratio exceeds the threshold, a
/// loop attached to arcs of one circle spanning more than a quarter turn,
/// and more than one full loop.
inline FilterVerdict apply_optimality_filters(const ProblemInstance& inst,
                                              const ArcProgram& prog,
                                              double zero_tol = -1.0) {
  validate_instance(inst);
  if (zero_tol < 0.0) zero_tol = 1e-6 * inst.t_f;
  FilterVerdict verdict;
  std::vector<CleanArc> arcs = cleaned_arcs(prog, zero_tol);
  std::string type;
  for (const CleanArc& arc : arcs) type.push_back(arc.letter);

  int n_loops = 0;
  for (const CleanArc& arc : arcs)
    if (arc.letter == 'O') ++n_loops;
  if (n_loops > 1) {
    verdict.passed = false;
    verdict.reasons.push_back("more than one full loop");
  }

  // Loop adjacent to a straight segment: optimal only when the chord is
  // short relative to the total length.
  const bool loop_on_straight = type.find("OS") != std::string::npos ||
                                type.find("SO") != std::string::npos;
  if (loop_on_straight) {
    const double d = std::hypot(inst.goal.x - inst.start.x,
                                inst.goal.y - inst.start.y);
    static const double b = sos_threshold_b();
    if (d / inst.t_f > b) {
      verdict.passed = false;
      verdict.reasons.push_back(
          "loop on a straight line with chord ratio above threshold");
    }
  }

  // Loop attached to same-circle turning arcs: optimal only up to a
  // quarter of the circle. Applies when both endpoints sit on one circle
  // of radius 1/a with consistent tangents.
  const bool coc_shape =
      (type == "LO" || type == "OL" || type == "RO" || type == "OR" ||
       type == "LOL" || type == "ROR" || type == "O");
  if (coc_shape && prog.a > 0.0 && n_loops == 1) {
    // Orientation of the non-loop arcs (the hosts share one sense).
    int host_turn = 0;
    for (const CleanArc& arc : arcs)
      if (arc.letter != 'O') host_turn = arc.turn;
    if (host_turn != 0) {
      const double r = 1.0 / prog.a;
      const double cx0 =
          inst.start.x - host_turn * r * std::sin(inst.start.theta);
      const double cy0 =
          inst.start.y + host_turn * r * std::cos(inst.start.theta);
      const double cxf =
          inst.goal.x - host_turn * r * std::sin(inst.goal.theta);
      const double cyf =
          inst.goal.y + host_turn * r * std::cos(inst.goal.theta);
      if (std::hypot(cx0 - cxf, cy0 - cyf) <= 1e-6) {
        const double a0 =
            std::atan2(inst.start.y - cy0, inst.start.x - cx0);
        const double af = std::atan2(inst.goal.y - cy0, inst.goal.x - cx0);
        double beta = host_turn * (af - a0);
        const double two_pi = 2.0 * M_PI;
        beta = std::fmod(beta, two_pi);
        if (beta < 0.0) beta += two_pi;
        if (beta > M_PI / 2.0 + 1e-9) {
          verdict.passed = false;
          verdict.reasons.push_back(
              "loop on a circle spanning more than a quarter turn");
        }
      }
    }
  }
  return verdict;
}

}  // namespace minimax_curve
