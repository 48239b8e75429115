#pragma once

// Planar unit-speed arc primitives: oriented states, exact propagation of
// constant-turn-rate segments, five-arc control programs, and trajectory
// sampling utilities shared by the model, solver and verification layers.

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace minimax_curve {

/// Thrown when an argument is non-finite or violates a range precondition.
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown for a turning arc of positive length whose curvature bound is zero.
struct degenerate_arc_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Planar position plus tangent direction. Angles are not wrapped; callers
/// that need a canonical representative reduce them explicitly.
struct OrientedPoint {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// One constant-control piece of a trajectory. control +1 turns left at
/// rate `curvature`, -1 turns right, 0 runs straight. duration is arc
/// length; speed is 1 everywhere.
struct ArcSegment {
  int control = 0;
  double curvature = 0.0;
  double duration = 0.0;
};

/// Fixed control pattern of the five-slot program: L, R, S, L, R.
inline constexpr std::array<int, 5> control_pattern{+1, -1, 0, +1, -1};

/// Durations for the five slots plus the shared turn-rate bound.
struct ArcProgram {
  std::array<double, 5> xi{0.0, 0.0, 0.0, 0.0, 0.0};
  double a = 0.0;

  double total_duration() const {
    return xi[0] + xi[1] + xi[2] + xi[3] + xi[4];
  }
};

namespace detail {

/// sin(u)/u, with a series branch so value and smoothness survive u -> 0.
inline double sinc(double u) {
  const double u2 = u * u;
  if (u2 < 1e-8) return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  return std::sin(u) / u;
}

/// d/du [sin(u)/u].
inline double sinc_prime(double u) {
  const double u2 = u * u;
  if (u2 < 1e-8) return u * (-1.0 / 3.0 + u2 / 30.0);
  return (std::cos(u) - std::sin(u) / u) / u;
}

}  // namespace detail

/// Advance a state along a constant turn-rate arc of length s and signed
/// rate w. Uses the chord form x + s*sinc(ws/2)*cos(theta + ws/2), which is
/// exact for every w (including w = 0) and smooth in w.
inline OrientedPoint propagate_turn(const OrientedPoint& p, double w,
                                    double s) {
  if (s == 0.0) return p;
  const double psi = w * s;
  const double half = 0.5 * psi;
  const double chord = s * detail::sinc(half);
  return {p.x + chord * std::cos(p.theta + half),
          p.y + chord * std::sin(p.theta + half), p.theta + psi};
}

/// Validated single-segment propagation. A zero-length segment is an exact
/// identity regardless of the other fields.
inline OrientedPoint propagate_arc(const OrientedPoint& p,
                                   const ArcSegment& seg) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta))
    throw input_error("propagate_arc: non-finite state");
  if (!std::isfinite(seg.curvature) || !std::isfinite(seg.duration))
    throw input_error("propagate_arc: non-finite segment");
  if (seg.control < -1 || seg.control > +1)
    throw input_error("propagate_arc: control must be -1, 0 or +1");
  if (seg.curvature < 0.0)
    throw input_error("propagate_arc: negative curvature bound");
  if (seg.duration < 0.0) throw input_error("propagate_arc: negative duration");
  if (seg.duration == 0.0) return p;
  if (seg.control != 0 && seg.curvature == 0.0)
    throw degenerate_arc_error(
        "propagate_arc: turning arc with zero curvature bound");
  return propagate_turn(p, seg.control * seg.curvature, seg.duration);
}

/// The five segments encoded by a program, in slot order.
inline std::array<ArcSegment, 5> segments_of(const ArcProgram& prog) {
  std::array<ArcSegment, 5> segs{};
  for (std::size_t j = 0; j < 5; ++j)
    segs[j] = {control_pattern[j], prog.a, prog.xi[j]};
  return segs;
}

/// Endpoint of the full five-segment program started at p0.
inline OrientedPoint propagate_program(const OrientedPoint& p0,
                                       const ArcProgram& prog) {
  OrientedPoint p = p0;
  for (const ArcSegment& seg : segments_of(prog)) p = propagate_arc(p, seg);
  return p;
}

/// One trajectory sample: time, state, and the signed turn rate that is
/// active there (right-continuous at segment boundaries).
struct TrajectorySample {
  double t = 0.0;
  OrientedPoint state{};
  double u = 0.0;
};

/// n >= 2 samples of the program trajectory at uniform times spanning
/// [0, total duration]. The first sample is p0 bit-for-bit and the last is
/// exactly the full propagate_program fold.
inline std::vector<TrajectorySample> sample_program(const OrientedPoint& p0,
                                                    const ArcProgram& prog,
                                                    std::size_t n) {
  if (n < 2) throw input_error("sample_program: need at least two samples");
  const std::array<ArcSegment, 5> segs = segments_of(prog);
  const double total = prog.total_duration();
  if (!std::isfinite(total) || total < 0.0)
    throw input_error("sample_program: invalid durations");

  std::vector<TrajectorySample> out;
  out.reserve(n);
  std::size_t j = 0;
  OrientedPoint base = p0;
  double t_base = 0.0;
  double last_rate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool final_sample = (i + 1 == n);
    const double t =
        final_sample ? total : total * (double(i) / double(n - 1));
    // Advance to the segment containing t; the final sample folds through
    // every remaining segment so it matches propagate_program exactly.
    while (j < 5 &&
           (final_sample || t - t_base >= segs[j].duration)) {
      base = propagate_arc(base, segs[j]);
      t_base += segs[j].duration;
      if (segs[j].duration > 0.0)
        last_rate = segs[j].control * segs[j].curvature;
      ++j;
    }
    if (j < 5) {
      ArcSegment part = segs[j];
      part.duration = t - t_base;
      const double rate = part.control * part.curvature;
      out.push_back({t, propagate_arc(base, part), rate});
    } else {
      out.push_back({t, base, last_rate});
    }
  }
  return out;
}

/// Direct planar isometry: rotate by angle about the origin, then translate.
struct RigidMotion {
  double angle = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

inline OrientedPoint apply(const RigidMotion& m, const OrientedPoint& p) {
  const double c = std::cos(m.angle);
  const double s = std::sin(m.angle);
  return {c * p.x - s * p.y + m.dx, s * p.x + c * p.y + m.dy,
          p.theta + m.angle};
}

/// Reflection about the x-axis; conjugating a trajectory by this map while
/// flipping control signs reflects the whole curve.
inline OrientedPoint mirror_x(const OrientedPoint& p) {
  return {p.x, -p.y, -p.theta};
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double t) {
  const double two_pi = 6.283185307179586476925286766559;
  double r = std::remainder(t, two_pi);
  if (r <= -3.14159265358979323846) r += two_pi;
  return r;
}

}  // namespace minimax_curve
