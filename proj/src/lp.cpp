#include "sovor/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sovor {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::NumericFailure: return "NumericFailure";
  }
  return "NumericFailure";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDualTol = 1e-9;
constexpr int kDegenerateLimit = 40;   // consecutive zero-step pivots before Bland's rule
constexpr int kRefreshPeriod = 64;     // pivots between full numeric refreshes

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeZero };

// Working tableau over columns [structural | slack | artificial].
// t holds B^-1 * A row-major; the slack block of t is therefore B^-1 itself,
// which the periodic refresh exploits.
struct Tableau {
  int m = 0, n = 0, ncols = 0;  // rows, structural columns, total columns
  std::vector<double> t;
  std::vector<double> dj;      // reduced costs for the current phase
  std::vector<double> xb;      // values of basic variables
  std::vector<int> basis;      // row -> column
  std::vector<VarState> state;
  std::vector<double> lb, ub;
  std::vector<double> nbval;   // value of each nonbasic column
  std::vector<double> cost;    // current phase costs
  std::vector<double> b;       // original right-hand sides

  double& at(int i, int j) { return t[static_cast<size_t>(i) * ncols + j]; }
  double at(int i, int j) const { return t[static_cast<size_t>(i) * ncols + j]; }

  double value_of(int j) const {
    if (state[j] == VarState::Basic) {
      for (int i = 0; i < m; ++i)
        if (basis[i] == j) return xb[i];
    }
    return nbval[j];
  }

  void recompute_reduced_costs() {
    for (int j = 0; j < ncols; ++j) dj[j] = cost[j];
    for (int i = 0; i < m; ++i) {
      double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      const double* row = &t[static_cast<size_t>(i) * ncols];
      for (int j = 0; j < ncols; ++j) dj[j] -= cb * row[j];
    }
  }

  // xb = B^-1 b - sum_j(nonbasic) T_j * nbval_j, using the slack block as B^-1.
  void recompute_basic_values() {
    std::vector<double> fresh(m, 0.0);
    for (int i = 0; i < m; ++i) {
      if (b[i] == 0.0) continue;
      for (int r = 0; r < m; ++r) fresh[r] += at(r, n + i) * b[i];
    }
    for (int j = 0; j < ncols; ++j) {
      if (state[j] == VarState::Basic) continue;
      double v = nbval[j];
      if (v == 0.0) continue;
      for (int r = 0; r < m; ++r) fresh[r] -= at(r, j) * v;
    }
    xb = std::move(fresh);
  }
};

// Gaussian step shared by the primal and dual loops: the caller has already
// parked the leaving variable at a bound; this re-expresses the tableau and
// reduced costs over the new basis and seats `enter` at `enter_val`.
void apply_pivot(Tableau& T, int leave_row, int enter, double enter_val) {
  double piv = T.at(leave_row, enter);
  double inv = 1.0 / piv;
  double* prow = &T.t[static_cast<size_t>(leave_row) * T.ncols];
  for (int j = 0; j < T.ncols; ++j) prow[j] *= inv;
  for (int i = 0; i < T.m; ++i) {
    if (i == leave_row) continue;
    double f = T.at(i, enter);
    if (f == 0.0) continue;
    double* row = &T.t[static_cast<size_t>(i) * T.ncols];
    for (int j = 0; j < T.ncols; ++j) row[j] -= f * prow[j];
  }
  double fd = T.dj[enter];
  if (fd != 0.0)
    for (int j = 0; j < T.ncols; ++j) T.dj[j] -= fd * prow[j];

  T.basis[leave_row] = enter;
  T.state[enter] = VarState::Basic;
  T.xb[leave_row] = enter_val;
}

struct PivotChoice {
  int enter = -1;
  int dir = 0;  // +1 entering increases, -1 decreases
};

PivotChoice price(const Tableau& T, bool bland) {
  PivotChoice best;
  double best_score = kDualTol;
  for (int j = 0; j < T.ncols; ++j) {
    VarState s = T.state[j];
    if (s == VarState::Basic) continue;
    if (s != VarState::FreeZero && T.ub[j] - T.lb[j] <= kLpPivotTol) continue;  // fixed
    double d = T.dj[j];
    int dir = 0;
    if ((s == VarState::AtLower || s == VarState::FreeZero) && d < -kDualTol)
      dir = +1;
    else if ((s == VarState::AtUpper || s == VarState::FreeZero) && d > kDualTol)
      dir = -1;
    if (dir == 0) continue;
    if (bland) {
      best.enter = j;
      best.dir = dir;
      return best;
    }
    if (std::fabs(d) > best_score) {
      best_score = std::fabs(d);
      best.enter = j;
      best.dir = dir;
    }
  }
  return best;
}

// Outcome of one simplex run.
enum class RunStatus { OptimalReached, Unbounded, IterationLimit };

RunStatus iterate(Tableau& T, int max_iter, int& iters, bool bland_always) {
  int degenerate_streak = 0;
  bool bland = bland_always;
  while (true) {
    if (iters >= max_iter) return RunStatus::IterationLimit;
    if (iters > 0 && iters % kRefreshPeriod == 0) {
      T.recompute_reduced_costs();
      T.recompute_basic_values();
    }
    PivotChoice pc = price(T, bland);
    if (pc.enter < 0) return RunStatus::OptimalReached;
    int enter = pc.enter, dir = pc.dir;

    double own_range = (T.state[enter] == VarState::FreeZero) ? kInf : T.ub[enter] - T.lb[enter];
    double step = own_range;
    int leave_row = -1;
    int leave_to = 0;  // -1 leaving var exits at lower bound, +1 at upper
    double leave_abs_piv = 0.0;
    for (int i = 0; i < T.m; ++i) {
      double a = T.at(i, enter) * dir;
      int bi = T.basis[i];
      double cand;
      int to;
      if (a > kLpPivotTol) {
        if (T.lb[bi] == -kInf) continue;
        double room = std::max(0.0, T.xb[i] - T.lb[bi]);
        cand = room / a;
        to = -1;
      } else if (a < -kLpPivotTol) {
        if (T.ub[bi] == kInf) continue;
        double room = std::max(0.0, T.ub[bi] - T.xb[i]);
        cand = room / (-a);
        to = +1;
      } else {
        continue;
      }
      bool better;
      if (cand < step - 1e-12) {
        better = true;
      } else if (cand <= step + 1e-12 && leave_row >= 0) {
        // Tie: prefer the numerically largest pivot, then the lowest basic
        // column for determinism; under Bland's rule the lowest column wins.
        if (bland)
          better = T.basis[i] < T.basis[leave_row];
        else
          better = std::fabs(T.at(i, enter)) > leave_abs_piv + 1e-15;
      } else if (cand <= step + 1e-12 && leave_row < 0 && cand < own_range - 1e-12) {
        better = true;
      } else {
        better = false;
      }
      if (better) {
        step = std::min(step, cand);
        leave_row = i;
        leave_to = to;
        leave_abs_piv = std::fabs(T.at(i, enter));
      }
    }

    if (leave_row < 0 && own_range == kInf) return RunStatus::Unbounded;

    ++iters;
    if (step <= 1e-10) {
      if (++degenerate_streak > kDegenerateLimit) bland = true;
    } else {
      degenerate_streak = 0;
      bland = bland_always;
    }

    if (leave_row < 0) {
      // Bound flip: the entering variable crosses to its opposite bound.
      double delta = dir * step;
      for (int i = 0; i < T.m; ++i) T.xb[i] -= T.at(i, enter) * delta;
      T.state[enter] = dir > 0 ? VarState::AtUpper : VarState::AtLower;
      T.nbval[enter] = dir > 0 ? T.ub[enter] : T.lb[enter];
      continue;
    }

    double delta = dir * step;
    double enter_val = T.nbval[enter] + delta;
    for (int i = 0; i < T.m; ++i)
      if (i != leave_row) T.xb[i] -= T.at(i, enter) * delta;

    int lcol = T.basis[leave_row];
    T.state[lcol] = leave_to < 0 ? VarState::AtLower : VarState::AtUpper;
    T.nbval[lcol] = leave_to < 0 ? T.lb[lcol] : T.ub[lcol];
    apply_pivot(T, leave_row, enter, enter_val);
  }
}

double start_bound(double lo, double hi, VarState& state) {
  if (lo != -kInf) {
    state = VarState::AtLower;
    return lo;
  }
  if (hi != kInf) {
    state = VarState::AtUpper;
    return hi;
  }
  state = VarState::FreeZero;
  return 0.0;
}

// Optimal-basis readout shared by the cold and warm paths.
LpResult extract_optimal(const LpProblem& P, const Tableau& T, int iters) {
  const int n = P.num_vars;
  const auto& c = *P.objective;
  LpResult res;
  res.iterations = iters;
  res.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) res.x[j] = T.value_of(j);
  // Clamp roundoff that strayed just outside the box.
  for (int j = 0; j < n; ++j) res.x[j] = std::min(std::max(res.x[j], P.lower[j]), P.upper[j]);
  res.dj.assign(n, 0.0);
  for (int j = 0; j < n; ++j) res.dj[j] = T.state[j] == VarState::Basic ? 0.0 : T.dj[j];
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  res.status = LpStatus::Optimal;
  return res;
}

LpResult run(const LpProblem& P, bool bland_from_start, Tableau* keep = nullptr) {
  const auto& rows = *P.rows;
  const int m = static_cast<int>(rows.size());
  const int n = P.num_vars;

  // Crossed bounds mean an empty box; report the gap as the residual.
  for (int j = 0; j < n; ++j)
    if (P.lower[j] > P.upper[j] + 1e-12) {
      LpResult r;
      r.status = LpStatus::Infeasible;
      r.phase1_residual = P.lower[j] - P.upper[j];
      r.note = "variable bounds cross";
      return r;
    }

  // Start every structural variable at its bound nearest zero, then pick a
  // basis of slacks where the slack bound can absorb the row residual and
  // artificials elsewhere.
  std::vector<VarState> start_state(n);
  std::vector<double> start_val(n);
  for (int j = 0; j < n; ++j) start_val[j] = start_bound(P.lower[j], P.upper[j], start_state[j]);

  std::vector<double> residual(m);
  for (int i = 0; i < m; ++i) {
    double r = rows[i].rhs;
    for (const auto& [col, coef] : rows[i].terms) r -= coef * start_val[col];
    residual[i] = r;
  }

  std::vector<int> art_of_row(m, -1);
  int num_art = 0;
  for (int i = 0; i < m; ++i) {
    bool slack_fits;
    switch (rows[i].sense) {
      case RowSense::LessEq: slack_fits = residual[i] >= 0.0; break;
      case RowSense::GreaterEq: slack_fits = residual[i] <= 0.0; break;
      default: slack_fits = std::fabs(residual[i]) <= kLpPivotTol; break;
    }
    if (!slack_fits) art_of_row[i] = num_art++;
  }

  Tableau T;
  T.m = m;
  T.n = n;
  T.ncols = n + m + num_art;
  T.t.assign(static_cast<size_t>(m) * T.ncols, 0.0);
  T.dj.assign(T.ncols, 0.0);
  T.xb.assign(m, 0.0);
  T.basis.assign(m, -1);
  T.state.assign(T.ncols, VarState::AtLower);
  T.lb.assign(T.ncols, 0.0);
  T.ub.assign(T.ncols, kInf);
  T.nbval.assign(T.ncols, 0.0);
  T.cost.assign(T.ncols, 0.0);
  T.b.assign(m, 0.0);

  for (int j = 0; j < n; ++j) {
    T.lb[j] = P.lower[j];
    T.ub[j] = P.upper[j];
    T.state[j] = start_state[j];
    T.nbval[j] = start_val[j];
  }
  for (int i = 0; i < m; ++i) {
    T.b[i] = rows[i].rhs;
    for (const auto& [col, coef] : rows[i].terms) {
      if (col < 0 || col >= n) throw std::invalid_argument("row term column out of range");
      T.at(i, col) += coef;
    }
    int sj = n + i;
    T.at(i, sj) = 1.0;
    switch (rows[i].sense) {
      case RowSense::LessEq:
        T.lb[sj] = 0.0;
        T.ub[sj] = kInf;
        T.state[sj] = VarState::AtLower;
        T.nbval[sj] = 0.0;
        break;
      case RowSense::GreaterEq:
        T.lb[sj] = -kInf;
        T.ub[sj] = 0.0;
        T.state[sj] = VarState::AtUpper;
        T.nbval[sj] = 0.0;
        break;
      default:
        T.lb[sj] = 0.0;
        T.ub[sj] = 0.0;
        T.state[sj] = VarState::AtLower;
        T.nbval[sj] = 0.0;
        break;
    }
    if (art_of_row[i] < 0) {
      T.basis[i] = sj;
      T.state[sj] = VarState::Basic;
      T.xb[i] = residual[i];
    } else {
      int aj = n + m + art_of_row[i];
      double sign = residual[i] >= 0.0 ? 1.0 : -1.0;
      T.at(i, aj) = sign;
      // The initial basis column for this row is sign * e_i, so the stored
      // row must be pre-multiplied by B^-1 = sign to keep t = B^-1 A (and the
      // artificial's own column a unit column).
      if (sign < 0.0)
        for (int j = 0; j < T.ncols; ++j) T.at(i, j) = -T.at(i, j);
      T.basis[i] = aj;
      T.state[aj] = VarState::Basic;
      T.xb[i] = std::fabs(residual[i]);
      T.lb[aj] = 0.0;
      T.ub[aj] = kInf;
    }
  }

  LpResult res;
  const int max_iter = 20000 + 50 * (m + T.ncols);
  int iters = 0;

  // Phase 1: minimize total artificial infeasibility.
  if (num_art > 0) {
    for (int a = 0; a < num_art; ++a) T.cost[n + m + a] = 1.0;
    T.recompute_reduced_costs();
    RunStatus rs = iterate(T, max_iter, iters, bland_from_start);
    res.iterations = iters;
    if (rs == RunStatus::IterationLimit) {
      res.status = LpStatus::NumericFailure;
      res.note = "phase 1 iteration limit";
      return res;
    }
    if (rs == RunStatus::Unbounded) {
      res.status = LpStatus::NumericFailure;
      res.note = "phase 1 reported unbounded";
      return res;
    }
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
      if (T.basis[i] >= n + m) infeas += std::max(0.0, T.xb[i]);
    for (int j = n + m; j < T.ncols; ++j)
      if (T.state[j] != VarState::Basic) infeas += T.nbval[j];
    if (infeas > kLpFeasTol) {
      res.status = LpStatus::Infeasible;
      res.phase1_residual = infeas;
      return res;
    }
    // Pin artificials at zero for phase 2; basic ones stay at (numerically)
    // zero and are squeezed out by later pivots if they ever block.
    for (int j = n + m; j < T.ncols; ++j) {
      T.ub[j] = 0.0;
      if (T.state[j] != VarState::Basic) T.nbval[j] = 0.0;
    }
  }

  // Phase 2: the real objective.
  const auto& c = *P.objective;
  for (int j = 0; j < T.ncols; ++j) T.cost[j] = j < n ? c[j] : 0.0;
  T.recompute_reduced_costs();
  T.recompute_basic_values();
  RunStatus rs = iterate(T, max_iter, iters, bland_from_start);
  res.iterations = iters;
  if (rs == RunStatus::IterationLimit) {
    res.status = LpStatus::NumericFailure;
    res.note = "phase 2 iteration limit";
    return res;
  }
  if (rs == RunStatus::Unbounded) {
    res.status = LpStatus::Unbounded;
    return res;
  }

  res.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) res.x[j] = T.value_of(j);
  // Clamp roundoff that strayed just outside the box.
  for (int j = 0; j < n; ++j) res.x[j] = std::min(std::max(res.x[j], P.lower[j]), P.upper[j]);
  res.dj.assign(n, 0.0);
  for (int j = 0; j < n; ++j) res.dj[j] = T.state[j] == VarState::Basic ? 0.0 : T.dj[j];
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  res.status = LpStatus::Optimal;
  return res;
}

// Max violation of rows/bounds by x, scaled by max(1, |rhs|).
double max_violation(const LpProblem& P, const std::vector<double>& x) {
  double worst = 0.0;
  for (const auto& row : *P.rows) {
    double a = 0.0;
    for (const auto& [col, coef] : row.terms) a += coef * x[col];
    double scale = std::max(1.0, std::fabs(row.rhs));
    double v = 0.0;
    if (row.sense == RowSense::LessEq) v = (a - row.rhs) / scale;
    else if (row.sense == RowSense::GreaterEq) v = (row.rhs - a) / scale;
    else v = std::fabs(a - row.rhs) / scale;
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace

LpResult solve_lp(const LpProblem& problem) {
  if (!problem.rows || !problem.objective)
    throw std::invalid_argument("LP problem missing rows or objective");
  if (static_cast<int>(problem.objective->size()) != problem.num_vars ||
      static_cast<int>(problem.lower.size()) != problem.num_vars ||
      static_cast<int>(problem.upper.size()) != problem.num_vars)
    throw std::invalid_argument("LP problem dimension mismatch");
  for (const auto& row : *problem.rows)
    for (const auto& [col, coef] : row.terms) {
      (void)coef;
      if (col < 0 || col >= problem.num_vars)
        throw std::invalid_argument("LP row references column out of range");
    }

  LpResult res = run(problem, false);
  if (res.status == LpStatus::Optimal && max_violation(problem, res.x) > kLpFeasTol) {
    res = run(problem, true);
    if (res.status == LpStatus::Optimal && max_violation(problem, res.x) > kLpFeasTol) {
      res.status = LpStatus::NumericFailure;
      res.note = "solution failed residual check";
    }
  }
  return res;
}

}  // namespace sovor
