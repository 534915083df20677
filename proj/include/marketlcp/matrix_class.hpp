#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marketlcp/lcp.hpp"

namespace marketlcp {

enum class ClassMethod { ExactMinors, VertexDeterminants, SampledMinors };

std::string to_string(ClassMethod method);

struct MatrixClassReport {
  bool is_p_matrix = false;
  ClassMethod method = ClassMethod::ExactMinors;
  double min_minor = 0.0;
  std::optional<std::vector<int>> witness;  // 0-based index set
  std::uint64_t minors_checked = 0;
};

struct ClassifyOptions {
  int exact_limit = 20;
  // Evaluate det(I - D + D m) at binary D instead of extracting submatrices.
  bool vertex_form = false;
  int samples = 4096;
  std::uint64_t seed = 1;
  bool parallel = true;
};

MatrixClassReport classify_p_matrix(const Matrix& m, const ClassifyOptions& opts = {});

struct BetaOptions {
  int vertex_limit = 20;
  int samples = 4096;
  std::uint64_t seed = 1;
  int grid_check_limit = 4;
  double grid_step = 0.05;
  bool parallel = true;
};

struct BetaResult {
  double beta = 0.0;
  bool is_lower_bound = false;
  std::vector<double> argmax_d;
  std::int64_t evaluated = 0;
  std::int64_t singular = 0;
};

// beta(m) = max over d in [0,1]^n of ||(I - D + D m)^-1 D||_inf.
BetaResult beta_of(const Matrix& m, const BetaOptions& opts = {});

// Maximum of the same norm over a regular grid with the given step; singular
// grid points are skipped. Exposed for tests.
double beta_grid(const Matrix& m, double step);

struct PerturbationBound {
  double beta = 0.0;
  double eta = 0.0;
  double epsilon_m = 0.0;
  double epsilon_q = 0.0;
  double epsilon = 0.0;
  std::optional<double> mu;
  bool beta_is_lower_bound = false;
  double m_norm = 0.0;
  double q_norm = 0.0;
};

PerturbationBound perturbation_bound(const LcpInstance& nominal, const Matrix& delta_m,
                                     const Vector& delta_q, const BetaOptions& opts = {});

// Same chain with beta supplied by the caller, so sweeps over q-only
// perturbations evaluate beta once.
PerturbationBound perturbation_bound(const LcpInstance& nominal, const Matrix& delta_m,
                                     const Vector& delta_q, const BetaResult& beta);

// Throws EtaExceedsOne when the bound carries no mu.
void require_bound(const PerturbationBound& bound);

double inf_norm(const Matrix& m);
double inf_norm(const Vector& v);

}  // namespace marketlcp
