#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "minimax_curve/optimizer.hpp"

using namespace minimax_curve;

namespace {

ProblemInstance case3_with(double t_f) {
  return {{0.0, 0.0, -M_PI / 3.0}, {0.4, 0.4, -M_PI / 6.0}, t_f};
}

/// Endpoints on the unit circle separated by arc angle beta, headings
/// tangent, with one extra full revolution of length budget.
ProblemInstance circle_case(double beta) {
  const double half = beta / 2.0;
  return {{-std::sin(half), -std::cos(half), -half},
          {std::sin(half), -std::cos(half), half},
          beta + 2.0 * M_PI};
}

void check_report_wellformed(const ProblemInstance& inst,
                             const SolveReport& rep) {
  REQUIRE_FALSE(rep.critical.empty());
  double prev = -1.0;
  for (const Solution& sol : rep.critical) {
    CHECK(residuals(inst, sol.program).max_abs() <= 1e-9);
    CHECK(sol.residual_norm <= 1e-9);
    CHECK_NOTHROW(classify(sol.program, inst));
    CHECK(classify(sol.program, inst) == sol.type_string);
    CHECK(sol.program.a >= prev - 1e-12);
    prev = sol.program.a;
  }
  double best_a = rep.critical.front().a;
  for (const Solution& sol : rep.critical) best_a = std::min(best_a, sol.a);
  CHECK(rep.best.a == Catch::Approx(best_a).margin(1e-12));
}

}  // namespace

TEST_CASE("local solve from the equal split reaches the reference basin") {
  const ProblemInstance inst = case3_with(0.8);
  ArcProgram x0;
  x0.xi = {0.16, 0.16, 0.16, 0.16, 0.16};
  x0.a = 10.0;
  const LocalOutcome out = local_solve(inst, x0, SolverConfig{});
  REQUIRE(out.converged);
  CHECK(out.program.a == Catch::Approx(8.3661513485).margin(1e-6));
  CHECK(out.residual_norm <= 1e-9);
  CHECK(residuals(inst, out.program).max_abs() <= 1e-9);
  CHECK(classify(out.program, inst) == "LSR");
}

TEST_CASE("local solve reproduces the symmetric three-turn solution") {
  const ProblemInstance inst{{0, 0, 0}, {1, 0, 0}, 1.5};
  ArcProgram x0;
  x0.xi = {0.0, 0.5, 0.0, 0.5, 0.5};
  x0.a = M_PI / 1.5;
  const LocalOutcome out = local_solve(inst, x0, SolverConfig{});
  REQUIRE(out.converged);
  CHECK(out.program.a == Catch::Approx(3.9887508486).margin(1e-6));
  const std::array<double, 5> want{0.0, 0.375, 0.0, 0.75, 0.375};
  for (int j = 0; j < 5; ++j)
    CHECK(out.program.xi[j] == Catch::Approx(want[j]).margin(1e-6));
  CHECK(classify(out.program, inst) == "RLR");
}

TEST_CASE("local solve reports failure on an infeasible instance") {
  // Arc-length budget below the endpoint distance: no feasible point.
  const ProblemInstance inst{{0, 0, 0}, {2, 0, 0}, 1.0};
  const std::vector<double> a0s{M_PI, 2.0 * M_PI, 10.0};
  for (double a0 : a0s) {
    ArcProgram x0;
    x0.xi = {0.2, 0.2, 0.2, 0.2, 0.2};
    x0.a = a0;
    const LocalOutcome out = local_solve(inst, x0, SolverConfig{});
    CHECK_FALSE(out.converged);
    CHECK_FALSE(out.diagnostics.empty());
  }
  CHECK_THROWS_AS(multistart_solve(inst, SolverConfig{}), no_solution_error);
}

TEST_CASE("multistart finds the known critical set of the long-budget case") {
  const ProblemInstance inst = case3_with(2.5);
  const SolveReport rep = multistart_solve(inst, SolverConfig{});
  check_report_wellformed(inst, rep);

  CHECK(rep.best.a == Catch::Approx(3.0172721767).margin(1e-6));
  CHECK(rep.best.type_string == "RSR");
  CHECK(rep.critical.size() >= 5);  // best + at least 4 others

  bool has_rsl = false, has_lsl = false;
  for (const Solution& sol : rep.critical) {
    has_rsl = has_rsl || sol.type_string == "RSL";
    has_lsl = has_lsl || sol.type_string == "LSL";
  }
  CHECK(has_rsl);
  CHECK(has_lsl);

  // Distinctness: no two entries agree in type, curvature bound, and
  // program simultaneously.
  for (std::size_t i = 0; i < rep.critical.size(); ++i)
    for (std::size_t j = i + 1; j < rep.critical.size(); ++j) {
      const Solution& si = rep.critical[i];
      const Solution& sj = rep.critical[j];
      if (si.type_string != sj.type_string) continue;
      double dist = std::abs(si.a - sj.a);
      for (int k = 0; k < 5; ++k)
        dist = std::max(dist, std::abs(si.program.xi[k] - sj.program.xi[k]));
      CHECK(dist > 10.0 * 1e-6 * inst.t_f);
    }
}

TEST_CASE("multistart reports the loop family on the circle instance") {
  const ProblemInstance inst = circle_case(M_PI / 3.0);
  const SolveReport rep = multistart_solve(inst, SolverConfig{});
  check_report_wellformed(inst, rep);

  CHECK(rep.best.a == Catch::Approx(1.0).margin(1e-6));
  CHECK(rep.best.type_string.find('O') != std::string::npos);

  // Canonical representative: host arc of length beta, then the loop.
  const auto arcs = cleaned_arcs(rep.best.program, 1e-6 * inst.t_f);
  REQUIRE(arcs.size() == 2);
  CHECK(arcs[0].length == Catch::Approx(M_PI / 3.0).margin(1e-6));
  CHECK(arcs[1].letter == 'O');
  CHECK(arcs[1].length == Catch::Approx(2.0 * M_PI).margin(1e-6));
}

TEST_CASE("trivial straight-line instances bypass the optimizer") {
  const ProblemInstance inst{{0, 0, 0}, {1, 0, 0}, 1.0};
  const SolveReport rep = multistart_solve(inst, SolverConfig{});
  REQUIRE(rep.critical.size() == 1);
  CHECK(rep.best.a == 0.0);
  CHECK(rep.best.type_string == "S");
  CHECK(rep.best.program.xi[2] == Catch::Approx(1.0));
  CHECK(residuals(inst, rep.best.program).max_abs() == 0.0);
}

TEST_CASE("identical configuration reproduces the report bit for bit") {
  const ProblemInstance inst = case3_with(1.3);
  const SolverConfig cfg{};
  const SolveReport r1 = multistart_solve(inst, cfg);
  const SolveReport r2 = multistart_solve(inst, cfg);
  REQUIRE(r1.critical.size() == r2.critical.size());
  CHECK(r1.best.a == r2.best.a);
  CHECK(r1.best.start_id == r2.best.start_id);
  for (std::size_t i = 0; i < r1.critical.size(); ++i) {
    const Solution& a = r1.critical[i];
    const Solution& b = r2.critical[i];
    CHECK(a.a == b.a);
    CHECK(a.type_string == b.type_string);
    CHECK(a.start_id == b.start_id);
    for (int k = 0; k < 5; ++k) CHECK(a.program.xi[k] == b.program.xi[k]);
  }
}

TEST_CASE("best curvature bound is invariant under rigid motion") {
  const ProblemInstance base = case3_with(1.3);
  const SolveReport ref = multistart_solve(base, SolverConfig{});

  const double rot = 0.7, tx = 1.1, ty = -2.3;
  const auto moved = [&](const OrientedPoint& p) {
    const double c = std::cos(rot), s = std::sin(rot);
    return OrientedPoint{c * p.x - s * p.y + tx, s * p.x + c * p.y + ty,
                         p.theta + rot};
  };
  const ProblemInstance rigid{moved(base.start), moved(base.goal), base.t_f};
  const SolveReport rep = multistart_solve(rigid, SolverConfig{});
  CHECK(rep.best.a == Catch::Approx(ref.best.a).margin(1e-6));
}

TEST_CASE("best curvature bound is invariant under reflection") {
  const ProblemInstance base = case3_with(1.3);
  const SolveReport ref = multistart_solve(base, SolverConfig{});
  const SolveReport rep =
      multistart_solve(reflect_instance(base), SolverConfig{});
  CHECK(rep.best.a == Catch::Approx(ref.best.a).margin(1e-6));
}

TEST_CASE("best curvature bound is non-increasing across the sweep") {
  const std::vector<double> tfs{1.5, 3.0, 5.0, 7.0};
  const auto entries = sweep_tf({0, 0, 0}, {1, 0, 0}, tfs, SolverConfig{});
  REQUIRE(entries.size() == 4);
  const std::vector<double> want{3.9887508486, 3.0384835468, M_PI / 2.0,
                                 M_PI / 3.0};
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    REQUIRE(entries[i].ok);
    const Solution& best = entries[i].report.best;
    CHECK(best.a == Catch::Approx(want[i]).margin(1e-6));
    CHECK(best.a <= prev + 1e-9);
    prev = best.a;
    if (i < 2) {
      const bool three_turn =
          best.type_string == "LRL" || best.type_string == "RLR";
      CHECK(three_turn);
    } else {
      CHECK(best.type_string.find('O') != std::string::npos);
    }
  }
}

TEST_CASE("sweep validates ordering and matches a direct solve") {
  CHECK_THROWS_AS(sweep_tf({0, 0, 0}, {1, 0, 0}, {3.0, 1.5}, SolverConfig{}),
                  input_error);

  const SolverConfig cfg{};
  const auto entries = sweep_tf({0.0, 0.0, -M_PI / 3.0},
                                {0.4, 0.4, -M_PI / 6.0}, {0.8}, cfg);
  REQUIRE(entries.size() == 1);
  REQUIRE(entries[0].ok);
  const SolveReport direct = multistart_solve(case3_with(0.8), cfg);
  CHECK(entries[0].report.best.a == direct.best.a);
  CHECK(entries[0].report.critical.size() == direct.critical.size());
}
