#pragma once
// Dense bounded-variable primal simplex, two-phase.
//
// Scope: desk-scale problems (hundreds of rows, a few thousand columns).
// Deterministic: identical inputs produce identical pivots and results.
// Infeasibility is certified by the phase-1 residual, which is the minimum
// total constraint violation over the box.

#include <memory>
#include <string>
#include <vector>

namespace sovor {

enum class RowSense { LessEq, Equal, GreaterEq };

struct LpRow {
  std::vector<std::pair<int, double>> terms;  // (column, coefficient)
  RowSense sense = RowSense::LessEq;
  double rhs = 0.0;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericFailure };

const char* to_string(LpStatus s);

struct LpProblem {
  int num_vars = 0;
  std::shared_ptr<const std::vector<LpRow>> rows;
  std::shared_ptr<const std::vector<double>> objective;  // size num_vars, minimized
  std::vector<double> lower, upper;                      // size num_vars, +-inf allowed
};

struct LpResult {
  LpStatus status = LpStatus::NumericFailure;
  std::vector<double> x;          // structural values when Optimal
  std::vector<double> dj;         // structural reduced costs when Optimal
  double objective = 0.0;
  double phase1_residual = 0.0;   // > 0 iff Infeasible
  int iterations = 0;
  std::string note;
};

inline constexpr double kLpFeasTol = 1e-7;
inline constexpr double kLpPivotTol = 1e-9;

// Throws std::invalid_argument on dimension mismatches or out-of-range column
// indices. Crossed bounds (lower > upper) report Infeasible.
LpResult solve_lp(const LpProblem& problem);

// Reusable solver for one set of rows and one objective under changing
// variable bounds. The first solve is the cold two-phase method; later calls
// restart dual simplex from the retained basis, which resettles in a few
// pivots when only a handful of bounds moved. Infeasibility claims are
// accepted only with an independently verified Farkas certificate, and any
// numerical doubt falls back to a cold solve, so every result carries the
// same guarantees as solve_lp on the equivalent problem.
class LpEngine {
 public:
  explicit LpEngine(LpProblem problem);
  ~LpEngine();
  LpEngine(LpEngine&&) noexcept;
  LpEngine& operator=(LpEngine&&) noexcept;

  LpResult solve(const std::vector<double>& lower, const std::vector<double>& upper);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace sovor
