// Trace how the least curvature bound decays as the time budget grows.
//
// Sweeps the budget for a fixed pose pair, prints the bound and solution
// type at each stop, and closes with an independent cross-check of the last
// instance: the bound is handed to a fixed-bound shortest-path solver, whose
// optimal time is spent back as a new budget, and the re-solved bound must
// return to the original value.

#include <cstdio>
#include <vector>

#include "minimax_curve/verify.hpp"

using namespace minimax_curve;

int main() {
  const OrientedPoint start{0.0, 0.0, 0.0};
  const OrientedPoint goal{1.0, 0.0, 0.0};
  const std::vector<double> budgets = {1.2, 1.5, 2.0, 3.0, 5.0, 7.0};

  const std::vector<SweepEntry> rows =
      sweep_tf(start, goal, budgets, SolverConfig{});
  std::printf("%-8s %-14s %s\n", "t_f", "bound", "type");
  for (const SweepEntry& row : rows) {
    if (!row.ok) {
      std::printf("%-8.2f %s\n", row.t_f, row.error.c_str());
      continue;
    }
    std::printf("%-8.2f %-14.10f %s\n", row.t_f, row.report.best.a,
                row.report.best.type_string.c_str());
  }

  const ProblemInstance last{start, goal, budgets.back()};
  const CrossCheckReport check = md_crosscheck(last);
  std::printf("cross-check at t_f=%.2f: %s (a*=%.10f, t_f*=%.10f)\n",
              last.t_f, check.passed ? "pass" : "fail", check.a_star,
              check.t_f_star);
  for (const std::string& note : check.notes)
    std::printf("  note: %s\n", note.c_str());
  return check.passed ? 0 : 1;
}
