#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "minimax_curve/geometry.hpp"

using namespace minimax_curve;

namespace {

std::mt19937_64 rng(20240517u);

OrientedPoint random_state() {
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  std::uniform_real_distribution<double> ang(-8.0, 8.0);
  return {pos(rng), pos(rng), ang(rng)};
}

ArcSegment random_segment() {
  std::uniform_int_distribution<int> ctl(-1, 1);
  std::uniform_real_distribution<double> curv(0.05, 12.0);
  std::uniform_real_distribution<double> len(0.0, 3.0);
  return {ctl(rng), curv(rng), len(rng)};
}

}  // namespace

TEST_CASE("closed-form circular motion") {
  // Quarter of a left circle of radius 1/2.
  OrientedPoint q = propagate_arc({0, 0, 0}, {+1, 2.0, M_PI / 4.0});
  CHECK(q.x == Catch::Approx(0.5).margin(1e-15));
  CHECK(q.y == Catch::Approx(0.5).margin(1e-15));
  CHECK(q.theta == Catch::Approx(M_PI / 2.0).margin(1e-15));

  // Straight segment ignores the curvature bound.
  OrientedPoint s = propagate_arc({1, 2, M_PI / 2.0}, {0, 7.0, 3.0});
  CHECK(s.x == Catch::Approx(1.0).margin(1e-15));
  CHECK(s.y == Catch::Approx(5.0).margin(1e-14));
  CHECK(s.theta == M_PI / 2.0);
}

TEST_CASE("zero-length segments are bitwise identities") {
  for (int i = 0; i < 200; ++i) {
    OrientedPoint p = random_state();
    ArcSegment seg = random_segment();
    seg.duration = 0.0;
    OrientedPoint q = propagate_arc(p, seg);
    CHECK(q.x == p.x);
    CHECK(q.y == p.y);
    CHECK(q.theta == p.theta);
    // Also when the curvature bound is zero on a turning slot.
    seg.curvature = 0.0;
    q = propagate_arc(p, seg);
    CHECK(q.x == p.x);
    CHECK(q.y == p.y);
    CHECK(q.theta == p.theta);
  }
}

TEST_CASE("splitting an arc does not change its endpoint") {
  std::uniform_real_distribution<double> frac(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    OrientedPoint p = random_state();
    ArcSegment seg = random_segment();
    OrientedPoint whole = propagate_arc(p, seg);
    double cut = frac(rng) * seg.duration;
    ArcSegment first = seg, second = seg;
    first.duration = cut;
    second.duration = seg.duration - cut;
    OrientedPoint split = propagate_arc(propagate_arc(p, first), second);
    CHECK(split.x == Catch::Approx(whole.x).margin(1e-12));
    CHECK(split.y == Catch::Approx(whole.y).margin(1e-12));
    CHECK(split.theta == Catch::Approx(whole.theta).margin(1e-12));
  }
}

TEST_CASE("tiny turn rates agree with the straight-line limit") {
  OrientedPoint p{0.25, -1.5, 0.7};
  const double s = 2.0;
  OrientedPoint straight = propagate_turn(p, 0.0, s);
  for (double w : {1e-16, 1e-12, 1e-9, -1e-16, -1e-12}) {
    OrientedPoint q = propagate_turn(p, w, s);
    CHECK(q.x == Catch::Approx(straight.x).margin(1e-9));
    CHECK(q.y == Catch::Approx(straight.y).margin(1e-9));
  }
  // Continuity across the series guard boundary |ws/2| = 1e-4.
  const double w_lo = 2.0 * 0.99999e-4 / s;
  const double w_hi = 2.0 * 1.00001e-4 / s;
  OrientedPoint lo = propagate_turn(p, w_lo, s);
  OrientedPoint hi = propagate_turn(p, w_hi, s);
  CHECK(lo.x == Catch::Approx(hi.x).margin(1e-12));
  CHECK(lo.y == Catch::Approx(hi.y).margin(1e-12));
}

TEST_CASE("rigid motions commute with propagation") {
  std::uniform_real_distribution<double> ang(-7.0, 7.0);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  for (int i = 0; i < 300; ++i) {
    OrientedPoint p = random_state();
    ArcSegment seg = random_segment();
    RigidMotion m{ang(rng), shift(rng), shift(rng)};
    OrientedPoint moved_then_prop = propagate_arc(apply(m, p), seg);
    OrientedPoint prop_then_moved = apply(m, propagate_arc(p, seg));
    CHECK(moved_then_prop.x ==
          Catch::Approx(prop_then_moved.x).margin(1e-12));
    CHECK(moved_then_prop.y ==
          Catch::Approx(prop_then_moved.y).margin(1e-12));
    CHECK(moved_then_prop.theta ==
          Catch::Approx(prop_then_moved.theta).margin(1e-12));
  }
}

TEST_CASE("x-axis reflection conjugates propagation exactly") {
  for (int i = 0; i < 300; ++i) {
    OrientedPoint p = random_state();
    ArcSegment seg = random_segment();
    ArcSegment flipped = seg;
    flipped.control = -seg.control;
    OrientedPoint lhs = propagate_arc(mirror_x(p), flipped);
    OrientedPoint rhs = mirror_x(propagate_arc(p, seg));
    CHECK(lhs.x == rhs.x);
    CHECK(lhs.y == rhs.y);
    CHECK(lhs.theta == rhs.theta);
  }
}

TEST_CASE("program endpoint matches segment-by-segment folding") {
  std::uniform_real_distribution<double> len(0.0, 2.0);
  std::uniform_real_distribution<double> curv(0.2, 9.0);
  for (int i = 0; i < 200; ++i) {
    ArcProgram prog;
    for (auto& v : prog.xi) v = len(rng);
    prog.a = curv(rng);
    OrientedPoint p0 = random_state();
    OrientedPoint direct = propagate_program(p0, prog);
    OrientedPoint manual = p0;
    for (const ArcSegment& seg : segments_of(prog))
      manual = propagate_arc(manual, seg);
    CHECK(direct.x == manual.x);
    CHECK(direct.y == manual.y);
    CHECK(direct.theta == manual.theta);
  }
}

TEST_CASE("sampled trajectories have unit speed") {
  std::uniform_real_distribution<double> len(0.0, 1.2);
  std::uniform_real_distribution<double> curv(0.2, 8.0);
  for (int rep = 0; rep < 20; ++rep) {
    ArcProgram prog;
    for (auto& v : prog.xi) v = len(rng);
    prog.a = curv(rng);
    if (prog.a * prog.total_duration() >= 20.0) {
      prog.a = 19.0 / prog.total_duration();
    }
    OrientedPoint p0 = random_state();
    const std::size_t n = 10000;
    auto traj = sample_program(p0, prog, n);
    REQUIRE(traj.size() == n);

    // Endpoints are exact.
    CHECK(traj.front().state.x == p0.x);
    CHECK(traj.front().state.y == p0.y);
    CHECK(traj.front().state.theta == p0.theta);
    OrientedPoint end = propagate_program(p0, prog);
    CHECK(traj.back().state.x == end.x);
    CHECK(traj.back().state.y == end.y);
    CHECK(traj.back().state.theta == end.theta);
    CHECK(traj.back().t == prog.total_duration());

    // Polyline length converges to total duration.
    double len_sum = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      len_sum += std::hypot(traj[i].state.x - traj[i - 1].state.x,
                            traj[i].state.y - traj[i - 1].state.y);
    }
    double total = prog.total_duration();
    if (total > 1e-9) {
      CHECK(std::abs(len_sum - total) / total < 1e-6);
    }
    // Turn rates take only the three admissible values.
    for (const auto& s : traj) {
      bool ok = s.u == 0.0 || s.u == prog.a || s.u == -prog.a;
      CHECK(ok);
    }
  }
}

TEST_CASE("invalid inputs are rejected") {
  OrientedPoint p{0, 0, 0};
  CHECK_THROWS_AS(propagate_arc({std::nan(""), 0, 0}, {0, 1, 1}),
                  input_error);
  CHECK_THROWS_AS(propagate_arc(p, {0, std::nan(""), 1}), input_error);
  CHECK_THROWS_AS(propagate_arc(p, {2, 1, 1}), input_error);
  CHECK_THROWS_AS(propagate_arc(p, {0, -1, 1}), input_error);
  CHECK_THROWS_AS(propagate_arc(p, {0, 1, -1}), input_error);
  CHECK_THROWS_AS(propagate_arc(p, {+1, 0.0, 1.0}), degenerate_arc_error);
  CHECK_THROWS_AS(sample_program(p, ArcProgram{}, 1), input_error);
  CHECK_THROWS_AS(sample_program(p, ArcProgram{}, 0), input_error);
}
