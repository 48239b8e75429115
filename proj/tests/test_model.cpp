#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "minimax_curve/model.hpp"

using namespace minimax_curve;

namespace {

const ProblemInstance kCase3{{0.0, 0.0, -M_PI / 3.0},
                             {0.4, 0.4, -M_PI / 6.0},
                             0.8};

ProblemInstance case3_with(double t_f) {
  ProblemInstance inst = kCase3;
  inst.t_f = t_f;
  return inst;
}

std::mt19937_64 rng(777u);

}  // namespace

TEST_CASE("straight-line program has exactly zero residuals") {
  ProblemInstance inst{{0, 0, 0}, {1, 0, 0}, 1.0};
  ArcProgram prog;
  prog.xi = {0, 0, 1.0, 0, 0};
  prog.a = 0.0;
  Residuals r = residuals(inst, prog);
  CHECK(r.pos_x == 0.0);
  CHECK(r.pos_y == 0.0);
  CHECK(r.sin_gap == 0.0);
  CHECK(r.cos_gap == 0.0);
  CHECK(r.length_gap == 0.0);
}

TEST_CASE("closed-form loop program is feasible to machine precision") {
  ProblemInstance inst{{-0.5, -std::sqrt(3.0) / 2.0, -M_PI / 6.0},
                       {0.5, -std::sqrt(3.0) / 2.0, M_PI / 6.0},
                       7.0 * M_PI / 3.0};
  ArcProgram prog;
  prog.xi = {0, 0, 0, M_PI / 3.0, 2.0 * M_PI};
  prog.a = 1.0;
  CHECK(residuals(inst, prog).max_abs() < 1e-12);
}

TEST_CASE("reference solutions reproduce their endpoints") {
  struct Row {
    ProblemInstance inst;
    ArcProgram prog;
  };
  const double s3 = std::sqrt(3.0);
  std::vector<Row> rows;
  rows.push_back({case3_with(0.8),
                  {{0.3141136578, 0, 0.2343580660, 0, 0.2515282761},
                   8.3661513485}});
  rows.push_back({{{-s3 / 2.0, -0.5, -M_PI / 3.0},
                   {s3 / 2.0, -0.5, M_PI / 3.0},
                   8.0 * M_PI / 3.0},
                  {{0, 1.4538775285, 0, 5.4698253525, 1.4538775285},
                   0.8174619979}});
  rows.push_back({{{0, 0, 0}, {1, 0, 0}, 1.5},
                  {{0, 0.375, 0, 0.75, 0.375}, 3.9887508486}});
  for (const Row& row : rows) {
    CHECK(residuals(row.inst, row.prog).max_abs() < 1e-8);
  }
}

TEST_CASE("residual norms are invariant under rigid motions") {
  std::uniform_real_distribution<double> ang(-6.0, 6.0);
  std::uniform_real_distribution<double> shift(-4.0, 4.0);
  std::uniform_real_distribution<double> len(0.0, 0.5);
  std::uniform_real_distribution<double> curv(0.1, 9.0);
  for (int i = 0; i < 200; ++i) {
    ProblemInstance inst = case3_with(0.8);
    ArcProgram prog;
    for (auto& v : prog.xi) v = len(rng);
    prog.a = curv(rng);
    Residuals base = residuals(inst, prog);

    RigidMotion m{ang(rng), shift(rng), shift(rng)};
    ProblemInstance moved{apply(m, inst.start), apply(m, inst.goal),
                          inst.t_f};
    Residuals r = residuals(moved, prog);
    CHECK(std::hypot(r.pos_x, r.pos_y) ==
          Catch::Approx(std::hypot(base.pos_x, base.pos_y)).margin(1e-12));
    CHECK(std::hypot(r.sin_gap, r.cos_gap) ==
          Catch::Approx(std::hypot(base.sin_gap, base.cos_gap))
              .margin(1e-12));
    CHECK(r.length_gap == base.length_gap);
  }
}

TEST_CASE("feasibility screen sorts instances into the three cases") {
  ProblemInstance inst{{0, 0, 0}, {1, 0, 0}, 0.9};
  CHECK(feasibility_screen(inst).kind == ScreenKind::infeasible);

  inst.t_f = 1.0;
  ScreenResult r = feasibility_screen(inst);
  REQUIRE(r.kind == ScreenKind::trivial_straight_line);
  CHECK(r.trivial_program.a == 0.0);
  CHECK(residuals(inst, r.trivial_program).max_abs() == 0.0);

  inst.t_f = 1.5;
  CHECK(feasibility_screen(inst).kind == ScreenKind::general);

  // Equal arc length but misaligned tangents cannot be a straight line.
  ProblemInstance bent{{0, 0, 0.3}, {1, 0, 0}, 1.0};
  CHECK(feasibility_screen(bent).kind == ScreenKind::infeasible);

  // Coincident endpoints always need a full solve.
  ProblemInstance loop{{0, 0, 0.5}, {0, 0, 0.5}, 2.0 * M_PI};
  CHECK(feasibility_screen(loop).kind == ScreenKind::general);
}

TEST_CASE("classification of reference programs") {
  ProblemInstance e1{{0, 0, 0}, {1, 0, 0}, 1.5};
  ArcProgram rlr{{0, 0.375, 0, 0.75, 0.375}, 3.9887508486};
  CHECK(classify(rlr, e1, 1e-6) == "RLR");

  ProblemInstance e1c{{0, 0, 0}, {1, 0, 0}, 5.0};
  ArcProgram loop_straight{{4.0, 0, 1.0, 0, 0}, M_PI / 2.0};
  CHECK(classify(loop_straight, e1c) == "OS");

  ArcProgram empty;
  CHECK_THROWS_AS(classify(empty, e1, 1e-6), classification_error);

  // Four alternating turning arcs fit the slots but not the family.
  ArcProgram four{{0.3, 0.4, 0, 0.5, 0.6}, 2.0};
  ProblemInstance dummy{{0, 0, 0}, {0.1, 0.1, 0}, 1.8};
  CHECK_THROWS_AS(classify(four, dummy, 1e-6), classification_error);

  // Adjacent full loops of opposite sense are outside the family too.
  double a = 2.0;
  ArcProgram two_loops{{2.0 * M_PI / a, 2.0 * M_PI / a, 0, 0, 0}, a};
  ProblemInstance dummy2{{0, 0, 0}, {0.1, 0.1, 0}, 4.0 * M_PI / a};
  CHECK_THROWS_AS(classify(two_loops, dummy2, 1e-6), classification_error);
}

TEST_CASE("arc cleaning merges, drops and renames as specified") {
  // A loop split across the two L slots with nothing in between.
  double a = 3.0;
  double beta = 0.9;
  ArcProgram split{{0.6, 1e-9, 1e-9, 2.0 * M_PI / a - 0.6 + beta, 0}, a};
  auto arcs = cleaned_arcs(split, 1e-6);
  REQUIRE(arcs.size() == 1);
  CHECK(arcs[0].letter == 'L');
  CHECK(arcs[0].length ==
        Catch::Approx(2.0 * M_PI / a + beta).margin(1e-12));

  // Loop hosted between turns of the opposite sense.
  ArcProgram lol{{0.4, 2.0 * M_PI / a, 0, 0.7, 0}, a};
  ProblemInstance dummy{{0, 0, 0}, {0.1, 0.1, 0}, lol.total_duration()};
  CHECK(classify(lol, dummy, 1e-6) == "LOL");

  // An arc past a full revolution keeps its letter.
  ArcProgram wrap{{2.0 * M_PI / a + 0.5, 0, 0, 0, 0}, a};
  CHECK(classify(wrap, dummy, 1e-6) == "L");
}

TEST_CASE("reflection mirrors the arc sequence") {
  // Three-bang program: mirror swaps letters and re-encodes.
  ArcProgram rlr{{0, 0.2, 0, 0.5, 0.3}, 2.0};
  ArcProgram m = reflect_program(rlr);
  CHECK(m.a == rlr.a);
  CHECK(m.xi[0] == 0.2);
  CHECK(m.xi[1] == 0.5);
  CHECK(m.xi[2] == 0.0);
  CHECK(m.xi[3] == 0.3);
  CHECK(m.xi[4] == 0.0);

  // Straight program is its own mirror.
  ArcProgram s{{0, 0, 1.7, 0, 0}, 0.4};
  ArcProgram sm = reflect_program(s);
  CHECK(sm.xi == s.xi);

  // Full-loop-plus-straight maps to its mirror twin with the same bound.
  ArcProgram os{{4.0, 0, 1.0, 0, 0}, M_PI / 2.0};
  ArcProgram osm = reflect_program(os);
  CHECK(osm.a == os.a);
  CHECK(osm.xi[1] == 4.0);
  CHECK(osm.xi[2] == 1.0);

  // Mirrors solve the reflected instance.
  ProblemInstance e1{{0.3, -0.2, 0.7}, {1.1, 0.6, -0.4}, 2.4};
  ArcProgram prog{{0.4, 0, 0.3, 0, 0.9}, 1.3};
  ProblemInstance re = reflect_instance(e1);
  OrientedPoint end = program_endpoint(re.start, reflect_program(prog));
  OrientedPoint want = program_endpoint(e1.start, prog);
  // Reflect the original endpoint about the start tangent line.
  double c = std::cos(e1.start.theta), sn = std::sin(e1.start.theta);
  double dx = want.x - e1.start.x, dy = want.y - e1.start.y;
  double along = c * dx + sn * dy, across = -sn * dx + c * dy;
  CHECK(end.x ==
        Catch::Approx(e1.start.x + c * along + sn * across).margin(1e-12));
  CHECK(end.y ==
        Catch::Approx(e1.start.y + sn * along - c * across).margin(1e-12));
  CHECK(std::sin(end.theta) ==
        Catch::Approx(std::sin(2.0 * e1.start.theta - want.theta))
            .margin(1e-12));
}

TEST_CASE("classify commutes with reflection as a letter swap") {
  std::uniform_real_distribution<double> len(0.05, 2.0);
  std::uniform_real_distribution<double> curv(0.3, 6.0);
  const std::vector<std::vector<int>> shapes = {
      {+1}, {-1}, {0}, {+1, -1}, {-1, +1}, {+1, 0}, {0, +1}, {-1, 0},
      {0, -1}, {+1, -1, +1}, {-1, +1, -1}, {+1, 0, +1}, {+1, 0, -1},
      {-1, 0, +1}, {-1, 0, -1}};
  for (int rep = 0; rep < 400; ++rep) {
    const auto& shape = shapes[rep % shapes.size()];
    double a = curv(rng);
    std::vector<CleanArc> arcs;
    bool make_loop = (rep % 3 == 0) && shape.size() == 3 &&
                     shape[1] != 0;  // middle arc becomes a full loop
    for (std::size_t i = 0; i < shape.size(); ++i) {
      int v = shape[i];
      char letter = v > 0 ? 'L' : (v < 0 ? 'R' : 'S');
      double L = (make_loop && i == 1) ? 2.0 * M_PI / a : len(rng);
      arcs.push_back({letter, v, L});
    }
    ArcProgram prog;
    REQUIRE(encode_arcs(arcs, a, prog));
    ProblemInstance dummy{{0, 0, 0},
                          {0.1, 0.1, 0},
                          std::max(prog.total_duration(), 1e-3)};
    std::string t = classify(prog, dummy, 1e-9);
    std::string rt = classify(reflect_program(prog), dummy, 1e-9);
    REQUIRE(t.size() == rt.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      char want = t[i] == 'L' ? 'R' : (t[i] == 'R' ? 'L' : t[i]);
      CHECK(rt[i] == want);
    }
  }
}

TEST_CASE("analytic residual Jacobian matches finite differences") {
  std::uniform_real_distribution<double> len(0.0, 1.2);
  std::uniform_real_distribution<double> curv(0.05, 10.0);
  ProblemInstance inst = case3_with(1.7);
  int checked = 0;
  for (int rep = 0; rep < 100; ++rep) {
    ArcProgram prog;
    for (auto& v : prog.xi) v = len(rng);
    prog.a = (rep % 10 == 0) ? 1e-7 : curv(rng);
    ResidualJacobian J = residual_jacobian(inst, prog);
    for (int col = 0; col < 6; ++col) {
      double* field = col < 5 ? &prog.xi[col] : &prog.a;
      const double save = *field;
      const double h = 1e-6 * std::max(1.0, std::abs(save));
      *field = save + h;
      Residuals hi = residuals(inst, prog);
      *field = save - h;
      Residuals lo = residuals(inst, prog);
      *field = save;
      auto dhi = hi.as_array();
      auto dlo = lo.as_array();
      for (int row = 0; row < 5; ++row) {
        const double fd = (dhi[row] - dlo[row]) / (2.0 * h);
        const double an = J[row][col];
        CHECK(std::abs(fd - an) <= 1e-5 * std::max(1.0, std::abs(an)));
        ++checked;
      }
    }
  }
  CHECK(checked == 100 * 30);
}

TEST_CASE("invalid model inputs are rejected") {
  ProblemInstance bad{{0, 0, 0}, {1, 0, 0}, -1.0};
  ArcProgram prog;
  prog.xi = {0, 0, 1, 0, 0};
  CHECK_THROWS_AS(residuals(bad, prog), input_error);
  bad.t_f = std::nan("");
  CHECK_THROWS_AS(feasibility_screen(bad), input_error);
  ArcProgram neg;
  neg.xi = {0, -0.1, 0.5, 0, 0};
  CHECK_THROWS_AS(cleaned_arcs(neg, 1e-6), input_error);
}
