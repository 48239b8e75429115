#pragma once

// Problem data and the algebraic layer over geometry.hpp: boundary-value
// instances, terminal residuals with analytic derivatives, feasibility
// screening, type-string classification and program reflection.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "minimax_curve/geometry.hpp"

namespace minimax_curve {

/// Thrown when a cleaned arc sequence falls outside the admissible family.
struct classification_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Oriented start state, oriented goal state, and the required total
/// arc length t_f of the connecting curve.
struct ProblemInstance {
  OrientedPoint start{};
  OrientedPoint goal{};
  double t_f = 0.0;
};

inline void validate_instance(const ProblemInstance& inst) {
  const auto fin = [](const OrientedPoint& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.theta);
  };
  if (!fin(inst.start) || !fin(inst.goal) || !std::isfinite(inst.t_f))
    throw input_error("instance: non-finite field");
  if (inst.t_f <= 0.0) throw input_error("instance: t_f must be positive");
}

/// Terminal constraint violations of a program against an instance. The
/// heading is matched through its sine and cosine so that representatives
/// differing by 2*pi compare equal.
struct Residuals {
  double pos_x = 0.0;
  double pos_y = 0.0;
  double sin_gap = 0.0;
  double cos_gap = 0.0;
  double length_gap = 0.0;

  double max_abs() const {
    return std::max({std::abs(pos_x), std::abs(pos_y), std::abs(sin_gap),
                     std::abs(cos_gap), std::abs(length_gap)});
  }
  std::array<double, 5> as_array() const {
    return {pos_x, pos_y, sin_gap, cos_gap, length_gap};
  }
};

/// Endpoint of the five-slot program using the smooth turn kernel, so the
/// map stays differentiable down to a = 0.
inline OrientedPoint program_endpoint(const OrientedPoint& p0,
                                      const ArcProgram& prog) {
  OrientedPoint p = p0;
  for (std::size_t j = 0; j < 5; ++j)
    p = propagate_turn(p, control_pattern[j] * prog.a, prog.xi[j]);
  return p;
}

inline Residuals residuals(const ProblemInstance& inst,
                           const ArcProgram& prog) {
  validate_instance(inst);
  const OrientedPoint end = program_endpoint(inst.start, prog);
  Residuals r;
  r.pos_x = end.x - inst.goal.x;
  r.pos_y = end.y - inst.goal.y;
  r.sin_gap = std::sin(inst.goal.theta) - std::sin(end.theta);
  r.cos_gap = std::cos(inst.goal.theta) - std::cos(end.theta);
  r.length_gap = prog.total_duration() - inst.t_f;
  return r;
}

/// 5x6 Jacobian of the residual vector with respect to (xi_1..xi_5, a),
/// accumulated alongside the exact propagation (no finite differences).
using ResidualJacobian = std::array<std::array<double, 6>, 5>;

inline ResidualJacobian residual_jacobian(const ProblemInstance& inst,
                                          const ArcProgram& prog) {
  validate_instance(inst);
  // M = d(x, y, theta)/d(xi_1..xi_5, a) for the running state.
  std::array<std::array<double, 6>, 3> M{};
  OrientedPoint p = inst.start;
  for (std::size_t j = 0; j < 5; ++j) {
    const double v = double(control_pattern[j]);
    const double xi = prog.xi[j];
    const double w = v * prog.a;
    const double half = 0.5 * w * xi;
    const double g = detail::sinc(half);
    const double gp = detail::sinc_prime(half);
    const double mid = p.theta + half;
    const double cm = std::cos(mid);
    const double sm = std::sin(mid);
    const double theta_end = p.theta + w * xi;

    // Chain through the old state: only the theta column mixes.
    const double dx_dth = -xi * g * sm;
    const double dy_dth = xi * g * cm;
    for (std::size_t k = 0; k < 6; ++k) {
      M[0][k] += dx_dth * M[2][k];
      M[1][k] += dy_dth * M[2][k];
    }
    // Direct dependence on this slot's duration.
    M[0][j] += std::cos(theta_end);
    M[1][j] += std::sin(theta_end);
    M[2][j] += w;
    // Direct dependence on the shared curvature bound (through w = v a).
    const double dxdw = 0.5 * xi * xi * (gp * cm - g * sm);
    const double dydw = 0.5 * xi * xi * (gp * sm + g * cm);
    M[0][5] += v * dxdw;
    M[1][5] += v * dydw;
    M[2][5] += v * xi;

    p = propagate_turn(p, w, xi);
  }

  const double c5 = std::cos(p.theta);
  const double s5 = std::sin(p.theta);
  ResidualJacobian J{};
  for (std::size_t k = 0; k < 6; ++k) {
    J[0][k] = M[0][k];
    J[1][k] = M[1][k];
    J[2][k] = -c5 * M[2][k];
    J[3][k] = s5 * M[2][k];
  }
  for (std::size_t k = 0; k < 5; ++k) J[4][k] = 1.0;
  J[4][5] = 0.0;
  return J;
}

/// Outcome of the cheap pre-solve screen.
enum class ScreenKind { infeasible, trivial_straight_line, general };

struct ScreenResult {
  ScreenKind kind = ScreenKind::general;
  // Populated only for the trivial straight-line case (a = 0).
  ArcProgram trivial_program{};
};

/// Classify an instance before solving: a chord longer than t_f is
/// infeasible; t_f equal to the chord needs both tangents aligned with it
/// (then the unique solution is the straight segment, curvature 0);
/// anything else is left to the solver.
inline ScreenResult feasibility_screen(const ProblemInstance& inst) {
  validate_instance(inst);
  const double dx = inst.goal.x - inst.start.x;
  const double dy = inst.goal.y - inst.start.y;
  const double d = std::hypot(dx, dy);
  const double tol = 1e-12 * std::max({1.0, inst.t_f, d});

  if (inst.t_f < d - tol) return {ScreenKind::infeasible, {}};
  if (std::abs(inst.t_f - d) <= tol) {
    bool aligned = false;
    if (d > 0.0) {
      const double heading = std::atan2(dy, dx);
      const double ang_tol = 1e-9;
      aligned = std::abs(std::sin(inst.start.theta) - std::sin(heading)) <=
                    ang_tol &&
                std::abs(std::cos(inst.start.theta) - std::cos(heading)) <=
                    ang_tol &&
                std::abs(std::sin(inst.goal.theta) - std::sin(heading)) <=
                    ang_tol &&
                std::abs(std::cos(inst.goal.theta) - std::cos(heading)) <=
                    ang_tol;
    }
    if (!aligned) return {ScreenKind::infeasible, {}};
    ScreenResult res;
    res.kind = ScreenKind::trivial_straight_line;
    res.trivial_program.xi = {0.0, 0.0, inst.t_f, 0.0, 0.0};
    res.trivial_program.a = 0.0;
    return res;
  }
  return {ScreenKind::general, {}};
}

/// One maximal arc of a cleaned program. letter is L, R, S or O; turn keeps
/// the underlying rotation sense (+1, -1, or 0 for S) even after a full
/// loop is renamed to O.
struct CleanArc {
  char letter = 'S';
  int turn = 0;
  double length = 0.0;
};

/// Drop slots shorter than zero_tol, merge adjacent equal letters, then
/// rename full loops (|a * len - 2*pi| < a * zero_tol) to O.
inline std::vector<CleanArc> cleaned_arcs(const ArcProgram& prog,
                                          double zero_tol) {
  if (!(zero_tol >= 0.0)) throw input_error("cleaned_arcs: bad zero_tol");
  std::vector<CleanArc> arcs;
  for (std::size_t j = 0; j < 5; ++j) {
    if (!(prog.xi[j] >= 0.0) || !std::isfinite(prog.xi[j]))
      throw input_error("cleaned_arcs: invalid duration");
    if (prog.xi[j] < zero_tol) continue;
    const int v = control_pattern[j];
    const char letter = v > 0 ? 'L' : (v < 0 ? 'R' : 'S');
    if (!arcs.empty() && arcs.back().letter == letter) {
      arcs.back().length += prog.xi[j];
    } else {
      arcs.push_back({letter, v, prog.xi[j]});
    }
  }
  if (prog.a > 0.0) {
    const double two_pi = 2.0 * M_PI;
    for (CleanArc& arc : arcs) {
      if (arc.turn != 0 &&
          std::abs(prog.a * arc.length - two_pi) < prog.a * zero_tol)
        arc.letter = 'O';
    }
  }
  return arcs;
}

namespace detail {

inline bool type_in_family(const std::string& s) {
  static const std::vector<std::string> allowed = {
      "L",   "R",   "S",   "O",   "LR",  "RL",  "LS",  "SL",  "RS",
      "SR",  "LO",  "OL",  "RO",  "OR",  "SO",  "OS",  "LRL", "RLR",
      "LSL", "LSR", "RSL", "RSR", "LOL", "LOR", "ROL", "ROR", "SOS"};
  return std::find(allowed.begin(), allowed.end(), s) != allowed.end();
}

}  // namespace detail

/// Type string of a program. zero_tol < 0 selects the default
/// 1e-6 * t_f of the instance.
inline std::string classify(const ArcProgram& prog,
                            const ProblemInstance& inst,
                            double zero_tol = -1.0) {
  validate_instance(inst);
  if (zero_tol < 0.0) zero_tol = 1e-6 * inst.t_f;
  const std::vector<CleanArc> arcs = cleaned_arcs(prog, zero_tol);
  std::string s;
  for (const CleanArc& arc : arcs) s.push_back(arc.letter);
  if (s.empty())
    throw classification_error("classify: no arcs above zero tolerance");
  if (!detail::type_in_family(s))
    throw classification_error("classify: type \"" + s +
                               "\" outside the admissible family");
  return s;
}

/// Re-encode a letter/length sequence into the five-slot pattern, assigning
/// each arc to the earliest compatible slot. Returns false when the
/// sequence does not fit (more alternations than the pattern allows).
inline bool encode_arcs(const std::vector<CleanArc>& arcs, double a,
                        ArcProgram& out) {
  out = ArcProgram{};
  out.a = a;
  std::size_t slot = 0;
  for (const CleanArc& arc : arcs) {
    const int want = arc.turn;
    while (slot < 5 && control_pattern[slot] != want) ++slot;
    if (slot == 5) return false;
    out.xi[slot] = arc.length;
    ++slot;
  }
  return true;
}

/// Mirror image of a program: the curve reflected about the start tangent
/// line. Implemented by swapping L and R in the (exact-zero cleaned) arc
/// sequence and re-encoding into the slot pattern. A sequence with too
/// many alternations to re-encode falls back to the raw slot swap
/// (xi2, xi1, xi3, xi5, xi4), which agrees with the mirror whenever both
/// are defined and keeps reflection total.
inline ArcProgram reflect_program(const ArcProgram& prog) {
  std::vector<CleanArc> arcs;
  for (std::size_t j = 0; j < 5; ++j) {
    if (prog.xi[j] == 0.0) continue;
    const int v = -control_pattern[j];  // L <-> R swap
    const char letter = v > 0 ? 'L' : (v < 0 ? 'R' : 'S');
    if (!arcs.empty() && arcs.back().letter == letter) {
      arcs.back().length += prog.xi[j];
    } else {
      arcs.push_back({letter, v, prog.xi[j]});
    }
  }
  ArcProgram out;
  if (encode_arcs(arcs, prog.a, out)) return out;
  out.a = prog.a;
  out.xi = {prog.xi[1], prog.xi[0], prog.xi[2], prog.xi[4], prog.xi[3]};
  return out;
}

/// Instance reflected about the line through the start point along the
/// start heading; reflect_program solutions solve this instance.
inline ProblemInstance reflect_instance(const ProblemInstance& inst) {
  const double c = std::cos(inst.start.theta);
  const double s = std::sin(inst.start.theta);
  const double dx = inst.goal.x - inst.start.x;
  const double dy = inst.goal.y - inst.start.y;
  // Reflect the goal offset across the heading direction.
  const double along = c * dx + s * dy;
  const double across = -s * dx + c * dy;
  ProblemInstance out = inst;
  out.goal.x = inst.start.x + c * along + s * across;
  out.goal.y = inst.start.y + s * along - c * across;
  out.goal.theta = 2.0 * inst.start.theta - inst.goal.theta;
  return out;
}

}  // namespace minimax_curve
