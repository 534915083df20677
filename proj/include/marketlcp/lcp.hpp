#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace marketlcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Role of an LCP variable inside the assembled market system.
enum class VarKind {
  GenBlock,          // P_Gib
  DemandBlock,       // P_Djk
  AnglePos,          // delta+_n
  AngleNeg,          // delta-_n
  UnitCapacityDual,  // alpha_i
  GenBlockDual,      // phi_ib
  DemandMinDual,     // sigma_j
  DemandBlockDual,   // psi_jk
  Price,             // rho_n
  LineCapacityDual,  // gamma_nm (sub = 0 forward, 1 reverse)
  Generic,           // unlabeled instances (tests, raw LCP files)
};

struct VarLabel {
  VarKind kind = VarKind::Generic;
  int entity = 0;  // unit, bus or line index
  int sub = -1;    // block index or line direction

  friend bool operator==(const VarLabel&, const VarLabel&) = default;
};

std::string to_string(VarKind kind);
std::string to_string(const VarLabel& label);

struct LcpInstance {
  Matrix m;
  Vector q;
  std::vector<VarLabel> labels;

  int size() const { return static_cast<int>(q.size()); }

  // Throws ValidationError on shape mismatch or duplicate labels.
  void validate() const;

  // Generic labels 0..n-1, for instances that do not come from a market.
  static LcpInstance unlabeled(Matrix m, Vector q);
};

enum class LcpStatus { Solved, RayTermination, IterationLimit, Inaccurate };

std::string to_string(LcpStatus status);

struct LcpSolution {
  Vector x;
  Vector w;
  LcpStatus status = LcpStatus::IterationLimit;
  // x_basic[i] is true when x_i (rather than w_i) is in the final basis.
  std::vector<bool> x_basic;
  int pivots = 0;
};

struct SolverOptions {
  double complementarity_tol = 1e-9;
  double pivot_tol = 1e-11;
  int max_pivots = 0;  // 0 means 50 * n
  int refactor_interval = 50;
  // Lexicographic ties: rhs differences below tie_tol * |q|inf, and B^-1
  // differences below 10 * tie_tol, after division by the pivot entries.
  double tie_tol = 1e-11;
  int tie_restarts = 2;  // reruns with coarser, then finer, ties after a failure
};

// Complementary pivoting with covering vector e = (1, ..., 1), lexicographic
// ratio test over the rows of B^-1, and minimum-index tie-breaking. The pivot
// threshold is pivot_tol relative to the entering column's largest entry. Basic
// values are recomputed from the original data once the final basis is known.
LcpSolution solve_lcp(const LcpInstance& inst, const SolverOptions& opts = {});

// x >= -tol, w >= -tol, |x'w| <= tol * (1 + |x|inf |w|inf), w == Mx + q.
bool satisfies_complementarity(const LcpInstance& inst, const LcpSolution& sol,
                               double tol);

struct OracleResult {
  std::vector<LcpSolution> solutions;  // distinct solutions, enumeration order
  std::int64_t feasible_bases = 0;
  std::int64_t singular_bases = 0;
};

inline constexpr int kOracleMaxDimension = 16;

// Exhaustive scan over all 2^n complementary bases. Singular bases are
// skipped and counted. Solutions that coincide within 1e-8 are merged.
OracleResult enumerate_lcp_oracle(const LcpInstance& inst, double tol = 1e-9,
                                  bool parallel = true);

}  // namespace marketlcp
