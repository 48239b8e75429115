// Solve one instance end to end and emit the report artifacts.
//
// Finds the least curvature bound that lets a unit-speed planar vehicle
// travel between two poses in a fixed time, prints every critical point the
// multistart uncovered, and writes report.json, trajectory.csv, and
// overview.svg into the working directory.

#include <cstdio>
#include <fstream>

#include "minimax_curve/report_io.hpp"

using namespace minimax_curve;

int main() {
  const ProblemInstance inst{{0.0, 0.0, -M_PI / 3.0},
                             {0.4, 0.4, -M_PI / 6.0},
                             2.5};
  validate_instance(inst);

  const SolveReport rep = multistart_solve(inst, SolverConfig{});

  std::printf("best bound %.10f  type %s\n", rep.best.a,
              rep.best.type_string.c_str());
  std::printf("%-14s %-6s %s\n", "bound", "type", "xi");
  for (const Solution& sol : rep.critical) {
    std::printf("%-14.10f %-6s (%.6f, %.6f, %.6f, %.6f, %.6f)\n", sol.a,
                sol.type_string.c_str(), sol.program.xi[0], sol.program.xi[1],
                sol.program.xi[2], sol.program.xi[3], sol.program.xi[4]);
  }
  std::printf("solved in %.0f ms\n", rep.timing_ms);

  std::ofstream("report.json") << report_to_json(rep);
  std::ofstream("trajectory.csv")
      << trajectory_to_csv(inst.start, rep.best.program, 400);
  std::ofstream("overview.svg") << report_to_svg(rep);
  std::printf("wrote report.json, trajectory.csv, overview.svg\n");
  return 0;
}
