#pragma once

// Solver layer: minimize the curvature bound subject to the terminal
// residuals, from one start (local_solve) or from a deterministic seed
// grid (multistart_solve). Converged programs are classified, de-duplicated
// up to mirror symmetry and slot re-encoding, certified, and reported
// sorted by curvature bound.

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "minimax_curve/certificate.hpp"
#include "minimax_curve/model.hpp"
#include "minimax_curve/nlp.hpp"

namespace minimax_curve {

/// Thrown when a full multistart produces no reportable solution.
struct no_solution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Multistart seed plan. The pattern grid covers every subset of active
/// slots at three curvature scales; reflections mirror each seed; random
/// adds deterministic low-discrepancy extras for basins off the grid.
struct Seeding {
  bool pattern_grid = true;
  bool reflections = true;
  int random = 64;
  std::uint64_t seed = 0x51a3c7b92d40e6f1ull;
};

struct SolverConfig {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  int max_outer = 60;
  int max_inner = 200;
  double penalty_growth = 10.0;
  Seeding starts{};
  double zero_tol = -1.0;  // < 0: defaults to 1e-6 * t_f
  double a_min = 1e-9;
  double a_max = -1.0;  // < 0: defaults to 100 * pi / t_f
  int threads = 0;      // 0: hardware concurrency
};

inline double resolved_zero_tol(const SolverConfig& cfg, double t_f) {
  return cfg.zero_tol < 0.0 ? 1e-6 * t_f : cfg.zero_tol;
}

inline double resolved_a_max(const SolverConfig& cfg, double t_f) {
  return cfg.a_max < 0.0 ? 100.0 * M_PI / t_f : cfg.a_max;
}

struct Solution {
  ArcProgram program{};
  std::string type_string;
  double a = 0.0;
  double residual_norm = 0.0;
  int start_id = -1;
  Certificate certificate{};
};

/// Result of one local solve; failures carry diagnostics instead of
/// throwing so multistart loops can continue.
struct LocalOutcome {
  bool converged = false;
  ArcProgram program{};
  double residual_norm = std::numeric_limits<double>::infinity();
  double pg_norm = std::numeric_limits<double>::infinity();
  int outer_iters = 0;
  std::string diagnostics;
};

struct SolveReport {
  ProblemInstance instance{};
  SolverConfig config{};
  Solution best{};
  std::vector<Solution> critical;
  double timing_ms = 0.0;
  std::vector<std::string> diagnostics;
};

namespace detail {

/// Levenberg-Marquardt refinement of the first-order optimality system on
/// the free coordinates (slots pinned at zero stay there). Unknowns are
/// the free entries of x plus the five equality multipliers; equations are
/// the five residuals plus the free components of the Lagrangian gradient.
/// The multiplier part of the system is rank-deficient when fewer than
/// five coordinates are free, which the damping absorbs. Returns true once
/// the system's infinity norm reaches tol.
inline bool kkt_polish(const ProblemInstance& inst, nlp::Vec& x,
                       nlp::Vec& lam, const std::vector<int>& free_idx,
                       double a_min, double a_max, double tol) {
  const int k = static_cast<int>(free_idx.size());
  const int N = k + 5;

  const auto program_of = [](const nlp::Vec& xv) {
    ArcProgram p;
    for (int j = 0; j < 5; ++j) p.xi[j] = xv[j];
    p.a = xv[5];
    return p;
  };
  const auto eval_system = [&](const nlp::Vec& xv, const nlp::Vec& lv,
                               nlp::Vec& F) {
    const ArcProgram p = program_of(xv);
    const auto r = residuals(inst, p).as_array();
    const ResidualJacobian J = residual_jacobian(inst, p);
    for (int i = 0; i < k; ++i) {
      double s = free_idx[i] == 5 ? 1.0 : 0.0;
      for (int row = 0; row < 5; ++row) s += J[row][free_idx[i]] * lv[row];
      F[i] = s;
    }
    for (int row = 0; row < 5; ++row) F[k + row] = r[row];
  };
  const auto norm2 = [](const nlp::Vec& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };

  nlp::Vec F(N), Ft(N);
  eval_system(x, lam, F);
  double fnorm = norm2(F);
  double nu = -1.0;  // set from the first Gauss-Newton matrix

  for (int iter = 0; iter < 40; ++iter) {
    if (nlp::inf_norm(F) <= tol) return true;

    // System Jacobian: analytic except the curvature-of-constraints block,
    // which is differenced on the analytic residual Jacobian.
    std::vector<double> A(static_cast<std::size_t>(N) * N, 0.0);
    const ResidualJacobian J = residual_jacobian(inst, program_of(x));
    for (int i = 0; i < k; ++i)
      for (int row = 0; row < 5; ++row) {
        A[i * N + (k + row)] = J[row][free_idx[i]];
        A[(k + row) * N + i] = J[row][free_idx[i]];
      }
    for (int j = 0; j < k; ++j) {
      const int cj = free_idx[j];
      const double h = 1e-6 * std::max(1.0, std::abs(x[cj]));
      nlp::Vec xp = x, xm = x;
      xp[cj] += h;
      xm[cj] -= h;
      const ResidualJacobian Jp = residual_jacobian(inst, program_of(xp));
      const ResidualJacobian Jm = residual_jacobian(inst, program_of(xm));
      for (int i = 0; i < k; ++i) {
        double s = 0.0;
        for (int row = 0; row < 5; ++row)
          s += (Jp[row][free_idx[i]] - Jm[row][free_idx[i]]) * lam[row];
        A[i * N + j] = s / (2.0 * h);
      }
    }

    // Normal equations with Levenberg damping.
    std::vector<double> AtA(static_cast<std::size_t>(N) * N, 0.0);
    nlp::Vec Atb(N, 0.0);
    for (int i = 0; i < N; ++i) {
      for (int j = i; j < N; ++j) {
        double s = 0.0;
        for (int r = 0; r < N; ++r) s += A[r * N + i] * A[r * N + j];
        AtA[i * N + j] = AtA[j * N + i] = s;
      }
      double s = 0.0;
      for (int r = 0; r < N; ++r) s -= A[r * N + i] * F[r];
      Atb[i] = s;
    }
    if (nu < 0.0) {
      double trace = 0.0;
      for (int i = 0; i < N; ++i) trace += AtA[i * N + i];
      nu = std::max(1e-14, 1e-10 * trace / N);
    }

    bool accepted = false;
    for (int tries = 0; tries < 12 && !accepted; ++tries) {
      std::vector<double> M = AtA;
      nlp::Vec delta = Atb;
      for (int i = 0; i < N; ++i) M[i * N + i] += nu;
      if (!nlp::solve_dense(M, delta, N)) {
        nu *= 10.0;
        continue;
      }
      nlp::Vec xt = x, lt = lam;
      for (int i = 0; i < k; ++i) {
        const int ci = free_idx[i];
        xt[ci] += delta[i];
        if (ci == 5)
          xt[ci] = std::min(a_max, std::max(a_min, xt[ci]));
        else
          xt[ci] = std::min(inst.t_f, std::max(0.0, xt[ci]));
      }
      for (int row = 0; row < 5; ++row) lt[row] += delta[k + row];
      eval_system(xt, lt, Ft);
      const double ftrial = norm2(Ft);
      if (ftrial < fnorm) {
        x = xt;
        lam = lt;
        F = Ft;
        fnorm = ftrial;
        nu = std::max(nu / 3.0, 1e-14);
        accepted = true;
      } else {
        nu *= 10.0;
      }
    }
    if (!accepted) break;
  }
  return nlp::inf_norm(F) <= tol;
}

}  // namespace detail

/// Augmented-Lagrangian local solve of the six-variable problem from one
/// start. Bounds: slot durations in [0, t_f], curvature in [a_min, a_max].
/// A solve that reaches feasibility but stalls short of the stationarity
/// gate is refined: vanishing slots are fixed at zero and the reduced
/// optimality system is polished to full precision, after which a short
/// warm-started verification pass re-checks every convergence gate.
inline LocalOutcome local_solve(const ProblemInstance& inst,
                                const ArcProgram& x0,
                                const SolverConfig& cfg) {
  validate_instance(inst);
  const double a_max = resolved_a_max(cfg, inst.t_f);

  nlp::ALProblem prob;
  prob.n = 6;
  prob.m_eq = 5;
  prob.objective = [](const nlp::Vec& x, nlp::Vec& g) {
    std::fill(g.begin(), g.end(), 0.0);
    g[5] = 1.0;
    return x[5];
  };
  prob.eq = [&inst](const nlp::Vec& x, nlp::Vec& c, const nlp::Vec* y,
                    nlp::Vec* grad) {
    ArcProgram p;
    for (int j = 0; j < 5; ++j) p.xi[j] = x[j];
    p.a = x[5];
    const auto r = residuals(inst, p).as_array();
    c.assign(r.begin(), r.end());
    if (y && grad) {
      const ResidualJacobian J = residual_jacobian(inst, p);
      for (int col = 0; col < 6; ++col) {
        double s = 0.0;
        for (int row = 0; row < 5; ++row) s += J[row][col] * (*y)[row];
        (*grad)[col] += s;
      }
    }
  };

  nlp::Box box;
  box.lo = {0, 0, 0, 0, 0, cfg.a_min};
  box.hi = {inst.t_f, inst.t_f, inst.t_f, inst.t_f, inst.t_f, a_max};

  nlp::Vec x(6);
  for (int j = 0; j < 5; ++j) x[j] = x0.xi[j];
  x[5] = x0.a;

  nlp::ALOptions opt;
  opt.feas_tol = cfg.feas_tol;
  opt.opt_tol = cfg.opt_tol;
  opt.max_outer = cfg.max_outer;
  opt.max_inner = cfg.max_inner;
  opt.growth = cfg.penalty_growth;
  // A stiff initial penalty keeps each start inside its own basin, so the
  // multistart maps seeds to distinct critical points instead of letting
  // the objective drag every iterate toward the same low-curvature valley.
  opt.mu0 = 1e3;

  const double zero_tol = resolved_zero_tol(cfg, inst.t_f);
  const auto residual_at = [&](const nlp::Vec& xv) {
    ArcProgram p;
    for (int j = 0; j < 5; ++j) p.xi[j] = xv[j];
    p.a = xv[5];
    return residuals(inst, p).max_abs();
  };
  // Slots pinned just above zero keep the Jacobian rank-deficient and make
  // the program unclassifiable; both gates need them exactly at the bound.
  const auto dead_band_slot = [&](const nlp::Vec& xv) {
    for (int j = 0; j < 5; ++j)
      if (xv[j] > 0.0 && xv[j] < 10.0 * zero_tol) return true;
    return false;
  };
  const auto fill = [&](LocalOutcome& o, const nlp::Vec& xv,
                        const nlp::ALResult& r, int prior_outers) {
    for (int j = 0; j < 5; ++j) o.program.xi[j] = xv[j];
    o.program.a = xv[5];
    o.residual_norm = residual_at(xv);
    o.pg_norm = r.pg_norm;
    o.outer_iters = prior_outers + r.outer_iters;
    o.converged = r.converged && o.residual_norm <= cfg.feas_tol;
  };

  // Snap-and-polish: near a critical point the usual leftovers are a
  // vanishing slot hovering off its bound plus stationarity the
  // first-order inner cannot finish. Fix such slots to zero, polish the
  // reduced optimality system to full precision, then verify every gate
  // with a warm-started pass. Escalates the snap width once if needed.
  // Multipliers come from the caller, or failing that from the
  // least-squares stationarity fit at the snapped point.
  const auto snap_polish = [&](const nlp::Vec& x_in, const nlp::Vec& lam_in,
                               int prior_outers) {
    LocalOutcome failed;
    std::vector<int> frozen_prev;
    bool first = true;
    for (const double thr : {10.0 * zero_tol, 1e-3 * inst.t_f}) {
      nlp::Vec xs = x_in;
      std::vector<int> frozen, free_idx;
      for (int j = 0; j < 5; ++j) {
        if (xs[j] < thr) {
          xs[j] = 0.0;
          frozen.push_back(j);
        } else {
          free_idx.push_back(j);
        }
      }
      free_idx.push_back(5);
      if (!first && frozen == frozen_prev) continue;
      frozen_prev = frozen;
      first = false;

      nlp::Vec lam = lam_in;
      if (lam.size() != 5) {
        // Fewer free coordinates than multipliers leaves the stationarity
        // fit rank-deficient, so ridge-regularize toward the minimum-norm
        // solution; the polish refines whatever this misses.
        ArcProgram p;
        for (int j = 0; j < 5; ++j) p.xi[j] = xs[j];
        p.a = xs[5];
        const ResidualJacobian J = residual_jacobian(inst, p);
        std::vector<double> A(25, 0.0);
        lam.assign(5, 0.0);
        double trace = 0.0;
        for (int r = 0; r < 5; ++r) {
          for (int s = 0; s < 5; ++s) {
            double acc = 0.0;
            for (int i : free_idx) acc += J[r][i] * J[s][i];
            A[std::size_t(r) * 5 + std::size_t(s)] = acc;
            if (r == s) trace += acc;
          }
          lam[std::size_t(r)] = -J[r][5];
        }
        for (int r = 0; r < 5; ++r)
          A[std::size_t(r) * 6] += std::max(1e-30, 1e-8 * trace / 5.0);
        if (!nlp::solve_dense(A, lam, 5)) lam.assign(5, 0.0);
      }
      if (!detail::kkt_polish(inst, xs, lam, free_idx, cfg.a_min, a_max,
                              1e-12))
        continue;

      nlp::Box rbox = box;
      for (int j : frozen) rbox.hi[j] = 0.0;
      nlp::ALOptions vopt = opt;
      vopt.mu0 = 10.0;
      vopt.max_outer = 15;
      vopt.lam_eq0 = lam;
      const nlp::ALResult al2 = nlp::augmented_lagrangian(prob, rbox, xs, vopt);
      LocalOutcome polished;
      fill(polished, xs, al2, prior_outers);
      if (polished.converged && !dead_band_slot(xs)) return polished;
    }
    return failed;
  };

  // A feasible start is already on the constraint manifold; the penalty
  // phase can only walk it downhill into a neighboring basin, so try the
  // polish path first and keep the critical point the caller aimed at.
  if (residual_at(x) <= 1e-6) {
    const LocalOutcome polished = snap_polish(x, {}, 0);
    if (polished.converged) return polished;
  }

  const nlp::ALResult al = nlp::augmented_lagrangian(prob, box, x, opt);

  LocalOutcome out;
  fill(out, x, al, 0);
  if (out.converged && !dead_band_slot(x)) return out;

  if (out.residual_norm <= 1e-6) {
    const LocalOutcome polished = snap_polish(x, al.lam_eq, al.outer_iters);
    if (polished.converged) return polished;
  }

  if (!out.converged) {
    out.diagnostics = "no convergence: residual " +
                      std::to_string(out.residual_norm) + ", stationarity " +
                      std::to_string(out.pg_norm) + ", outer " +
                      std::to_string(out.outer_iters);
  }
  return out;
}

namespace detail {

inline double u01(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

/// Roots of the three-arc shooting system over (l1, l2, l3, a) for the
/// turning patterns LRL (sgn > 0) and RLR, every terminal-heading branch
/// made explicit. Basins of these curves can be too thin for a length
/// grid to land inside, so multistart seeds them from the closed system
/// directly; local_solve still owns verification of every candidate.
inline std::vector<ArcProgram> ccc_closure_seeds(const ProblemInstance& inst,
                                                 double a_min, double a_max) {
  const double t_f = inst.t_f;
  std::vector<ArcProgram> out;
  const double profiles[5][3] = {{0.25, 0.50, 0.25},
                                 {0.60, 0.20, 0.20},
                                 {0.20, 0.20, 0.60},
                                 {0.70, 0.15, 0.15},
                                 {0.15, 0.15, 0.70}};
  for (int sgn : {+1, -1}) {
    std::vector<long long> found;
    for (int k = -2; k <= 2; ++k) {
      for (const auto& profile : profiles) {
        for (double mult : {1.0, 1.5, 2.0, 3.0, 4.0}) {
          double v[4] = {t_f * profile[0], t_f * profile[1],
                         t_f * profile[2], mult * M_PI / t_f};
          const auto eval = [&](const double* w, double* F) {
            double x = inst.start.x, y = inst.start.y, th = inst.start.theta;
            for (int arc = 0; arc < 3; ++arc) {
              const double u = (arc == 1 ? -sgn : sgn) * w[3];
              const double th1 = th + u * w[arc];
              if (std::abs(u) > 1e-12) {
                x += (std::sin(th1) - std::sin(th)) / u;
                y -= (std::cos(th1) - std::cos(th)) / u;
              } else {
                x += w[arc] * std::cos(th);
                y += w[arc] * std::sin(th);
              }
              th = th1;
            }
            F[0] = x - inst.goal.x;
            F[1] = y - inst.goal.y;
            F[2] = th - inst.goal.theta - 2.0 * M_PI * k;
            F[3] = w[0] + w[1] + w[2] - t_f;
          };
          bool ok = false;
          for (int it = 0; it < 60 && !ok; ++it) {
            double F[4];
            eval(v, F);
            double n2 = 0.0;
            for (double f : F) n2 += f * f;
            if (n2 < 1e-24) {
              ok = true;
              break;
            }
            std::vector<double> A(16);
            nlp::Vec rhs(4);
            for (int j = 0; j < 4; ++j) {
              const double h = 1e-7 * std::max(1.0, std::abs(v[j]));
              double wp[4], wm[4], Fp[4], Fm[4];
              for (int c = 0; c < 4; ++c) wp[c] = wm[c] = v[c];
              wp[j] += h;
              wm[j] -= h;
              eval(wp, Fp);
              eval(wm, Fm);
              for (int r = 0; r < 4; ++r)
                A[std::size_t(r) * 4 + std::size_t(j)] =
                    (Fp[r] - Fm[r]) / (2.0 * h);
            }
            for (int r = 0; r < 4; ++r) rhs[std::size_t(r)] = -F[r];
            if (!nlp::solve_dense(A, rhs, 4)) break;
            double scale = 1.0;
            for (int r = 0; r < 4; ++r)
              if (std::abs(rhs[std::size_t(r)]) > 1.0)
                scale = std::min(scale, 1.0 / std::abs(rhs[std::size_t(r)]));
            for (int r = 0; r < 4; ++r) v[r] += scale * rhs[std::size_t(r)];
          }
          if (!ok) continue;
          if (v[0] < 1e-6 * t_f || v[1] < 1e-6 * t_f || v[2] < 1e-6 * t_f)
            continue;
          if (v[3] < std::max(a_min, 1e-9) || v[3] > a_max) continue;
          const long long bucket = llround(v[3] * 1e7);
          bool dup = false;
          for (long long b : found) dup = dup || b == bucket;
          if (dup) continue;
          found.push_back(bucket);
          ArcProgram p;
          if (sgn > 0) {
            p.xi = {v[0], v[1], 0.0, v[2], 0.0};
          } else {
            p.xi = {0.0, v[0], 0.0, v[1], v[2]};
          }
          p.a = v[3];
          out.push_back(p);
        }
      }
    }
  }
  return out;
}

/// Deterministic seed bank; order defines start_id.
inline std::vector<ArcProgram> make_seeds(const ProblemInstance& inst,
                                          const SolverConfig& cfg) {
  const double t_f = inst.t_f;
  const double a_max = resolved_a_max(cfg, t_f);
  const auto clamp_a = [&](double a) {
    return std::min(a_max, std::max(cfg.a_min, a));
  };

  std::vector<ArcProgram> seeds;
  const auto push_unique = [&seeds](const ArcProgram& p) {
    for (const ArcProgram& q : seeds)
      if (q.xi == p.xi && q.a == p.a) return;
    seeds.push_back(p);
  };

  if (cfg.starts.pattern_grid) {
    const double scales[3] = {M_PI / t_f, 2.0 * M_PI / t_f,
                              4.0 * M_PI / t_f};
    for (unsigned mask = 1; mask < 32; ++mask) {
      const int k = std::popcount(mask);
      for (double a0 : scales) {
        ArcProgram p;
        for (int j = 0; j < 5; ++j)
          p.xi[j] = (mask >> j) & 1u ? t_f / k : 0.0;
        p.a = clamp_a(a0);
        push_unique(p);
      }
    }
    // Three-turn curves whose middle arc sweeps more than a half turn
    // sit in basins the equal split misses; seed the two CCC slot
    // patterns again with middle-weighted splits.
    const unsigned ccc_masks[2] = {0b01011u, 0b11010u};
    const double mid_ratios[2][3] = {{0.25, 0.5, 0.25},
                                     {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0}};
    for (unsigned mask : ccc_masks) {
      for (const auto& ratio : mid_ratios) {
        for (double a0 : scales) {
          ArcProgram p;
          int idx = 0;
          for (int j = 0; j < 5; ++j)
            p.xi[j] = (mask >> j) & 1u ? t_f * ratio[idx++] : 0.0;
          p.a = clamp_a(a0);
          push_unique(p);
        }
      }
    }
    for (const ArcProgram& p : ccc_closure_seeds(inst, cfg.a_min, a_max))
      push_unique(p);
    if (cfg.starts.reflections) {
      const std::size_t base = seeds.size();
      for (std::size_t i = 0; i < base; ++i)
        push_unique(reflect_program(seeds[i]));
    }
  }

  if (cfg.starts.random > 0) {
    std::mt19937_64 rng(cfg.starts.seed);
    const double lo = std::log(0.5 * M_PI / t_f);
    const double hi = std::log(std::min(32.0 * M_PI / t_f, a_max));
    for (int i = 0; i < cfg.starts.random; ++i) {
      ArcProgram p;
      double sum = 0.0;
      for (int j = 0; j < 5; ++j) {
        p.xi[j] = -std::log1p(-u01(rng));
        sum += p.xi[j];
      }
      for (int j = 0; j < 5; ++j) p.xi[j] *= t_f / sum;
      p.a = clamp_a(std::exp(lo + u01(rng) * (hi - lo)));
      push_unique(p);
      if (cfg.starts.reflections) push_unique(reflect_program(p));
    }
  }
  return seeds;
}

/// Comparison key of a converged program, invariant under the two
/// degeneracies that make one critical value reachable as many distinct
/// programs: relocating a whole 2*pi revolution to another point of the
/// curve (neither endpoint moves), and mirror twins on a self-mirror
/// instance. Full revolutions are stripped from every arc and counted,
/// the remains re-merged, and letters mirrored to the L-first form.
struct CanonKey {
  std::string letters;
  std::vector<double> lengths;
  int loops = 0;
  double a = 0.0;
};

inline CanonKey canon_key(const ArcProgram& prog, double zero_tol) {
  CanonKey key;
  key.a = prog.a;
  const double period = prog.a > zero_tol ? 2.0 * M_PI / prog.a : 0.0;
  std::vector<CleanArc> reduced;
  for (CleanArc arc : cleaned_arcs(prog, zero_tol)) {
    if (arc.letter == 'O') {
      ++key.loops;
      continue;
    }
    if (arc.turn != 0 && period > 0.0) {
      int k = int(std::floor(arc.length / period));
      double rem = arc.length - double(k) * period;
      if (rem > period - zero_tol) {  // within tolerance of whole loops
        ++k;
        rem = 0.0;
      }
      key.loops += k;
      if (k > 0 && rem < zero_tol) continue;
      if (k > 0) arc.length = rem;
    }
    if (!reduced.empty() && reduced.back().letter == arc.letter)
      reduced.back().length += arc.length;
    else
      reduced.push_back(arc);
  }
  int first_turn = 0;
  for (const CleanArc& arc : reduced) {
    if (arc.turn != 0) {
      first_turn = arc.turn;
      break;
    }
  }
  for (const CleanArc& arc : reduced) {
    char letter = arc.letter;
    if (first_turn < 0) {  // mirror to the L-first representative
      if (letter == 'L')
        letter = 'R';
      else if (letter == 'R')
        letter = 'L';
    }
    key.letters.push_back(letter);
    key.lengths.push_back(arc.length);
  }
  return key;
}

inline bool same_key(const CanonKey& a, const CanonKey& b, double tol) {
  if (a.loops != b.loops || std::abs(a.a - b.a) > tol) return false;
  const auto match = [&](const std::string& letters, bool reversed) {
    if (a.letters != letters) return false;
    const std::size_t n = a.lengths.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double lb = b.lengths[reversed ? n - 1 - i : i];
      if (std::abs(a.lengths[i] - lb) > tol) return false;
    }
    return true;
  };
  if (match(b.letters, false)) return true;
  // Traversing b backward gives the reflect-plus-reverse twin, which a
  // self-symmetric instance admits as a second program of one solution
  // pair; flip the reversed letters back to the L-first representative.
  std::string rev(b.letters.rbegin(), b.letters.rend());
  bool flip = false;
  for (char c : rev) {
    if (c == 'L' || c == 'R') {
      flip = c == 'R';  // reversal flips senses; renormalize to L-first
      break;
    }
  }
  if (flip) {
    for (char& c : rev) {
      if (c == 'L')
        c = 'R';
      else if (c == 'R')
        c = 'L';
    }
  }
  return match(rev, true);
}

/// Cosmetic normalization of a reported program: full loops are moved
/// behind the arcs they interrupt (rejoining a loop-split host), and for
/// self-mirror instances the twin whose first turning arc is L is
/// preferred. Every rewrite is re-verified against the instance and the
/// type family, and dropped if either check fails.
inline void canonicalize_solution(const ProblemInstance& inst,
                                  const SolverConfig& cfg, ArcProgram& prog,
                                  double feas_tol) {
  const double zt = resolved_zero_tol(cfg, inst.t_f);
  const auto try_adopt = [&](const std::vector<CleanArc>& arcs) {
    ArcProgram candidate;
    if (!encode_arcs(arcs, prog.a, candidate)) return;
    if (residuals(inst, candidate).max_abs() > feas_tol) return;
    try {
      classify(candidate, inst, zt);
    } catch (const classification_error&) {
      return;
    }
    prog = candidate;
  };

  std::vector<CleanArc> arcs = cleaned_arcs(prog, zt);
  bool has_loop = false;
  for (const CleanArc& arc : arcs) has_loop = has_loop || arc.letter == 'O';
  if (has_loop) {
    // A full loop is a pose no-op, so it can trail the arc it interrupts.
    std::vector<CleanArc> hosts, loops;
    for (const CleanArc& arc : arcs)
      (arc.letter == 'O' ? loops : hosts).push_back(arc);
    std::vector<CleanArc> merged;
    for (const CleanArc& arc : hosts) {
      if (!merged.empty() && merged.back().letter == arc.letter)
        merged.back().length += arc.length;
      else
        merged.push_back(arc);
    }
    merged.insert(merged.end(), loops.begin(), loops.end());
    try_adopt(merged);
    arcs = cleaned_arcs(prog, zt);
  }
  int first_turn = 0;
  for (const CleanArc& arc : arcs) {
    if (arc.turn != 0) {
      first_turn = arc.turn;
      break;
    }
  }
  if (first_turn < 0) {
    std::vector<CleanArc> mirrored = arcs;
    for (CleanArc& arc : mirrored) {
      arc.turn = -arc.turn;
      if (arc.letter == 'L')
        arc.letter = 'R';
      else if (arc.letter == 'R')
        arc.letter = 'L';
    }
    try_adopt(mirrored);
  }
}

}  // namespace detail

/// Deterministic multistart solve. Throws no_solution_error when nothing
/// converges (or the instance fails the screen outright).
inline SolveReport multistart_solve(const ProblemInstance& inst,
                                    const SolverConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  validate_instance(inst);
  SolveReport report;
  report.instance = inst;
  report.config = cfg;

  const ScreenResult screen = feasibility_screen(inst);
  if (screen.kind == ScreenKind::infeasible) {
    throw no_solution_error(
        "instance is infeasible: arc length below the endpoint distance");
  }
  if (screen.kind == ScreenKind::trivial_straight_line) {
    Solution sol;
    sol.program = screen.trivial_program;
    sol.type_string = "S";
    sol.a = 0.0;
    sol.residual_norm = residuals(inst, sol.program).max_abs();
    sol.start_id = -1;
    sol.certificate = reconstruct_certificate(inst, sol.program);
    sol.certificate.flags.filters_passed =
        apply_optimality_filters(inst, sol.program).passed;
    report.best = sol;
    report.critical = {sol};
    report.diagnostics.push_back(
        "straight-line instance: solver bypassed");
    report.timing_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t_start)
            .count();
    return report;
  }

  const std::vector<ArcProgram> seeds = detail::make_seeds(inst, cfg);
  std::vector<LocalOutcome> outcomes(seeds.size());
  unsigned n_threads =
      cfg.threads > 0 ? unsigned(cfg.threads)
                      : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, seeds.size());
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      outcomes[i] = local_solve(inst, seeds[i], cfg);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < seeds.size();
             i = next.fetch_add(1))
          outcomes[i] = local_solve(inst, seeds[i], cfg);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  const double zt = resolved_zero_tol(cfg, inst.t_f);
  const double dup_tol = 10.0 * zt;
  std::vector<Solution> kept;
  std::vector<detail::CanonKey> keys;
  std::size_t n_converged = 0, n_unclassified = 0;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!outcomes[i].converged) continue;
    ++n_converged;
    ArcProgram prog = outcomes[i].program;
    std::string type;
    try {
      type = classify(prog, inst, zt);
    } catch (const classification_error& e) {
      ++n_unclassified;
      report.diagnostics.push_back("start " + std::to_string(i) +
                                   " dropped: " + e.what());
      continue;
    }
    detail::CanonKey key = detail::canon_key(prog, zt);
    bool duplicate = false;
    for (const detail::CanonKey& other : keys) {
      if (detail::same_key(key, other, dup_tol)) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    keys.push_back(std::move(key));

    detail::canonicalize_solution(inst, cfg, prog, cfg.feas_tol);
    Solution sol;
    sol.program = prog;
    sol.type_string = classify(prog, inst, zt);
    sol.a = prog.a;
    sol.residual_norm = residuals(inst, prog).max_abs();
    sol.start_id = int(i);
    sol.certificate = reconstruct_certificate(inst, prog, 1000, zt);
    sol.certificate.flags.filters_passed =
        apply_optimality_filters(inst, prog, zt).passed;
    kept.push_back(std::move(sol));
  }

  if (kept.empty()) {
    throw no_solution_error(
        "no start converged to a classifiable solution (" +
        std::to_string(n_converged) + " converged, " +
        std::to_string(n_unclassified) + " unclassifiable, of " +
        std::to_string(seeds.size()) + " starts)");
  }

  std::sort(kept.begin(), kept.end(),
            [](const Solution& x, const Solution& y) {
              if (x.a != y.a) return x.a < y.a;
              return x.start_id < y.start_id;
            });
  report.critical = std::move(kept);

  const Solution* best = nullptr;
  for (const Solution& sol : report.critical) {
    if (sol.certificate.flags.filters_passed) {
      best = &sol;
      break;
    }
  }
  if (!best) {
    best = &report.critical.front();
    report.diagnostics.push_back(
        "every critical solution is filtered; reporting the smallest "
        "curvature bound");
  }
  report.best = *best;
  report.timing_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
  return report;
}

/// One sweep entry; failed entries carry the error text instead of a
/// report.
struct SweepEntry {
  double t_f = 0.0;
  bool ok = false;
  SolveReport report{};
  std::string error;
};

/// Independent multistart solves across ascending arc-length budgets.
inline std::vector<SweepEntry> sweep_tf(const OrientedPoint& start,
                                        const OrientedPoint& goal,
                                        const std::vector<double>& tf_values,
                                        const SolverConfig& cfg) {
  for (std::size_t i = 0; i + 1 < tf_values.size(); ++i)
    if (!(tf_values[i] < tf_values[i + 1]))
      throw input_error("sweep_tf: t_f values must be strictly ascending");
  std::vector<SweepEntry> out;
  for (double t_f : tf_values) {
    SweepEntry entry;
    entry.t_f = t_f;
    try {
      entry.report = multistart_solve({start, goal, t_f}, cfg);
      entry.ok = true;
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace minimax_curve
