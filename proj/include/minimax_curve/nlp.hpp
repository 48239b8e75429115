#pragma once

// Self-contained smooth optimization kernel: limited-memory BFGS with box
// projection and Armijo backtracking, wrapped by an augmented-Lagrangian
// driver for equality and one-sided inequality constraints. Problem
// callbacks expose constraint values plus Jacobian-transpose products, so
// large sparse problems never materialize a dense Jacobian.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <vector>

namespace minimax_curve::nlp {

using Vec = std::vector<double>;

struct Box {
  Vec lo, hi;
};

inline void project(const Box& box, Vec& x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::min(box.hi[i], std::max(box.lo[i], x[i]));
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double inf_norm(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Value-and-gradient callback; returns f(x) and fills grad (same size).
using Func = std::function<double(const Vec& x, Vec& grad)>;

/// Solve the dense system A z = b in place by Gaussian elimination with
/// partial pivoting; A is row-major n x n. Returns false on a zero pivot.
inline bool solve_dense(std::vector<double>& A, Vec& b, std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
    if (A[piv * n + col] == 0.0) return false;
    if (piv != col) {
      for (std::size_t k = col; k < n; ++k)
        std::swap(A[col * n + k], A[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    const double inv = 1.0 / A[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = A[r * n + col] * inv;
      if (factor == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) A[r * n + k] -= factor * A[col * n + k];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    double s = b[col];
    for (std::size_t k = col + 1; k < n; ++k) s -= A[col * n + k] * b[k];
    b[col] = s / A[col * n + col];
  }
  return true;
}

struct InnerOptions {
  double tol = 1e-9;   // projected-gradient infinity norm target
  int max_iters = 200;
  int memory = 10;
};

struct InnerResult {
  double value = 0.0;
  double pg_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

/// Projected-gradient stationarity measure ||P(x - g) - x||_inf.
inline double projected_gradient_norm(const Box& box, const Vec& x,
                                      const Vec& g) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step =
        std::min(box.hi[i], std::max(box.lo[i], x[i] - g[i])) - x[i];
    m = std::max(m, std::abs(step));
  }
  return m;
}

/// Minimize f over the box starting from x (updated in place). Search
/// directions come from the two-loop recursion restricted to the free
/// variables (bounds active and pushing outward are masked); steps are
/// projected onto the box. A step is accepted by the Armijo test while
/// decreases are measurable in double precision, and by a projected
/// gradient-norm decrease once they no longer are, which lets the iteration
/// continue into the quadratic regime instead of stalling on roundoff.
inline InnerResult minimize_box_lbfgs(const Func& f, const Box& box, Vec& x,
                                      const InnerOptions& opt) {
  const std::size_t n = x.size();
  project(box, x);
  Vec g(n), gn(n), d(n), xn(n);
  double fx = f(x, g);

  std::deque<std::pair<Vec, Vec>> pairs;  // (s, y) history
  double t_prev = 1.0;  // last accepted gradient-mode step length
  InnerResult res;
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    res.iters = iter;
    res.value = fx;
    res.pg_norm = projected_gradient_norm(box, x, g);
    if (res.pg_norm <= opt.tol) {
      res.converged = true;
      return res;
    }

    // Two-loop recursion for d = -H g on the free subspace.
    d = g;
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_lo = x[i] <= box.lo[i] && g[i] > 0.0;
      const bool at_hi = x[i] >= box.hi[i] && g[i] < 0.0;
      if (at_lo || at_hi) d[i] = 0.0;
    }
    std::vector<double> alpha(pairs.size());
    for (std::size_t k = pairs.size(); k-- > 0;) {
      const auto& [s, y] = pairs[k];
      const double rho = 1.0 / dot(s, y);
      alpha[k] = rho * dot(s, d);
      for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y[i];
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      const double gamma =
          std::clamp(dot(s, y) / std::max(dot(y, y), 1e-300), 1e-12, 1e12);
      for (double& v : d) v *= gamma;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [s, y] = pairs[k];
      const double rho = 1.0 / dot(s, y);
      const double beta = rho * dot(y, d);
      for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      const bool at_lo = x[i] <= box.lo[i] && g[i] > 0.0;
      const bool at_hi = x[i] >= box.hi[i] && g[i] < 0.0;
      d[i] = (at_lo || at_hi) ? 0.0 : -d[i];
    }

    if (dot(d, g) >= 0.0) {  // not a descent direction: restart
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) {
        const bool at_lo = x[i] <= box.lo[i] && g[i] > 0.0;
        const bool at_hi = x[i] >= box.hi[i] && g[i] < 0.0;
        d[i] = (at_lo || at_hi) ? 0.0 : -g[i];
      }
    }

    // Backtracking along the projected arc. Quasi-Newton directions start
    // at the unit step; gradient directions reuse the scale of the last
    // accepted gradient step so a stiff merit does not cost a long cascade
    // of halvings on every iteration.
    const double f_floor = 1e-12 * (1.0 + std::abs(fx));
    const bool grad_mode = pairs.empty();
    double t = grad_mode ? std::min(1.0, 4.0 * t_prev) : 1.0;
    double fn = fx;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + t * d[i];
      project(box, xn);
      double pred = 0.0;
      bool same = true;
      for (std::size_t i = 0; i < n; ++i) {
        pred += g[i] * (xn[i] - x[i]);
        same = same && xn[i] == x[i];
      }
      if (same) break;
      if (pred <= -f_floor) {
        fn = f(xn, gn);
        if (fn <= fx + 1e-4 * pred) {
          accepted = true;
          break;
        }
      } else if (pred <= 0.0) {
        // The predicted decrease is below the resolution of the function
        // value: accept on projected-gradient decrease instead.
        fn = f(xn, gn);
        if (fn <= fx + f_floor &&
            projected_gradient_norm(box, xn, gn) < res.pg_norm) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!pairs.empty()) {  // curvature model is stale: drop it, retry
        pairs.clear();
        continue;
      }
      return res;  // projected-stationary up to line-search resolution
    }
    if (grad_mode) t_prev = t;

    Vec s(n), y(n);
    double sy = 0.0, ss = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = xn[i] - x[i];
      y[i] = gn[i] - g[i];
      sy += s[i] * y[i];
      ss += s[i] * s[i];
      yy += y[i] * y[i];
    }
    if (sy > 1e-10 * std::sqrt(ss * yy)) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > opt.memory) pairs.pop_front();
    }
    x.swap(xn);
    g.swap(gn);
    fx = fn;
  }
  res.value = fx;
  res.pg_norm = projected_gradient_norm(box, x, g);
  res.converged = res.pg_norm <= opt.tol;
  res.iters = opt.max_iters;
  return res;
}

/// Constraint block: writes c(x) into c; when y is non-null additionally
/// accumulates J(x)^T y into grad (which is pre-sized, not cleared).
using ConstraintBlock =
    std::function<void(const Vec& x, Vec& c, const Vec* y, Vec* grad)>;

struct ALProblem {
  std::size_t n = 0;
  std::size_t m_eq = 0;
  std::size_t m_in = 0;  // one-sided constraints g(x) <= 0
  Func objective;
  ConstraintBlock eq;
  ConstraintBlock ineq;  // unused when m_in == 0
};

struct ALOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  int max_outer = 60;
  int max_inner = 200;
  double mu0 = 10.0;
  double growth = 10.0;
  double mu_max = 1e12;
  int memory = 10;
  Vec lam_eq0, lam_in0;  // warm-start multipliers; empty means zero
};

struct ALResult {
  bool converged = false;
  double feas = 0.0;     // max violation over all constraints
  double pg_norm = 0.0;  // projected gradient of the final merit
  double objective = 0.0;
  int outer_iters = 0;
  double mu = 0.0;
  Vec lam_eq, lam_in;
};

/// Classic safeguarded augmented-Lagrangian loop: multipliers update on
/// sufficient feasibility progress, otherwise the penalty grows; inner
/// subproblems are solved by the projected L-BFGS above with a tolerance
/// that tightens toward opt_tol.
inline ALResult augmented_lagrangian(const ALProblem& prob, const Box& box,
                                     Vec& x, const ALOptions& opt) {
  Vec lam_eq(prob.m_eq, 0.0), lam_in(prob.m_in, 0.0);
  if (opt.lam_eq0.size() == prob.m_eq) lam_eq = opt.lam_eq0;
  if (opt.lam_in0.size() == prob.m_in) lam_in = opt.lam_in0;
  Vec c(prob.m_eq), gi(prob.m_in);
  double mu = opt.mu0;
  double omega = std::max(opt.opt_tol, 1.0 / mu);
  double eta = std::max(opt.feas_tol, std::pow(mu, -0.1));

  ALResult out;
  project(box, x);

  const auto merit = [&](const Vec& xv, Vec& grad) {
    double val = prob.objective(xv, grad);
    if (prob.m_eq > 0) {
      prob.eq(xv, c, nullptr, nullptr);
      Vec w(prob.m_eq);
      for (std::size_t i = 0; i < prob.m_eq; ++i) {
        val += lam_eq[i] * c[i] + 0.5 * mu * c[i] * c[i];
        w[i] = lam_eq[i] + mu * c[i];
      }
      prob.eq(xv, c, &w, &grad);
    }
    if (prob.m_in > 0) {
      prob.ineq(xv, gi, nullptr, nullptr);
      Vec w(prob.m_in);
      for (std::size_t i = 0; i < prob.m_in; ++i) {
        const double shifted = lam_in[i] / mu + gi[i];
        if (shifted > 0.0) {
          val += 0.5 * mu * (shifted * shifted -
                             (lam_in[i] / mu) * (lam_in[i] / mu));
          w[i] = mu * shifted;
        } else {
          val -= 0.5 * lam_in[i] * lam_in[i] / mu;
          w[i] = 0.0;
        }
      }
      prob.ineq(xv, gi, &w, &grad);
    }
    return val;
  };

  Vec dummy(prob.n);
  double best_feas = std::numeric_limits<double>::infinity();
  int stalled = 0;  // penalty escalations without feasibility progress
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    out.outer_iters = outer + 1;
    InnerOptions iopt;
    iopt.tol = omega;
    iopt.max_iters = opt.max_inner;
    iopt.memory = opt.memory;
    InnerResult inner = minimize_box_lbfgs(merit, box, x, iopt);

    double feas = 0.0;
    if (prob.m_eq > 0) {
      prob.eq(x, c, nullptr, nullptr);
      for (double v : c) feas = std::max(feas, std::abs(v));
    }
    if (prob.m_in > 0) {
      prob.ineq(x, gi, nullptr, nullptr);
      for (double v : gi) feas = std::max(feas, v);
    }
    out.feas = feas;
    out.pg_norm = inner.pg_norm;
    out.mu = mu;
    out.objective = prob.objective(x, dummy);

    if (feas <= eta) {
      if (feas <= opt.feas_tol && inner.pg_norm <= opt.opt_tol &&
          omega <= opt.opt_tol) {
        out.converged = true;
        break;
      }
      // Feasible but the subproblem solver cannot move: updating the
      // multipliers on a frozen iterate only drifts them, so stop and let
      // the caller refine stationarity by other means.
      if (feas <= opt.feas_tol && inner.iters == 0 && !inner.converged) break;
      for (std::size_t i = 0; i < prob.m_eq; ++i) lam_eq[i] += mu * c[i];
      for (std::size_t i = 0; i < prob.m_in; ++i)
        lam_in[i] = std::max(0.0, lam_in[i] + mu * gi[i]);
      omega = std::max(opt.opt_tol, omega / mu);
      eta = std::max(opt.feas_tol, eta / std::pow(mu, 0.9));
      stalled = 0;
    } else {
      // Escalations that fail to move feasibility indicate convergence to
      // an infeasible stationary point; stop instead of burning iterations
      // on an ever-stiffer merit.
      stalled = feas > 0.9 * best_feas ? stalled + 1 : 0;
      if (stalled >= 4 && feas > 1e3 * opt.feas_tol) break;
      mu = std::min(mu * opt.growth, opt.mu_max);
      omega = std::max(opt.opt_tol, 1.0 / mu);
      eta = std::max(opt.feas_tol, std::pow(mu, -0.1));
    }
    best_feas = std::min(best_feas, feas);
  }
  out.lam_eq = std::move(lam_eq);
  out.lam_in = std::move(lam_in);
  return out;
}

}  // namespace minimax_curve::nlp
