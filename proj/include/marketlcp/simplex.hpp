#pragma once

#include <string>
#include <vector>

#include "marketlcp/lcp.hpp"

namespace marketlcp {

enum class RowSense { Le, Ge, Eq };

// minimize c'x subject to rows a_i x (sense_i) b_i, x_j >= 0 unless free_var[j].
struct LinearProgram {
  Matrix a;
  Vector b;
  Vector c;
  std::vector<RowSense> sense;
  std::vector<bool> free_var;

  int rows() const { return static_cast<int>(b.size()); }
  int cols() const { return static_cast<int>(c.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Vector x;
  double objective = 0.0;
  Vector duals;  // d objective / d b_i at the final basis
  int iterations = 0;
};

// Dense two-phase primal simplex with Bland's rule. The final primal values
// and duals are recomputed from the original data by an LU solve on the
// optimal basis.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9);

}  // namespace marketlcp
