#pragma once

// Exhaustive and sampled scans behind the P-matrix classifier, beta(M) and
// the brute-force LCP oracle. Each kernel exists twice: a serial reference
// that the tests compare against, and an OpenMP version. Both return
// identical results for identical inputs (ties resolve to the smallest mask
// or restart index, never to whichever thread finished first).

#include <cstdint>
#include <vector>

#include "marketlcp/lcp.hpp"

namespace marketlcp::kernels {

// Binary diagonal D is encoded as a bit mask over the row indices.
Matrix vertex_matrix(const Matrix& m, std::uint64_t mask);

struct MinorScan {
  double min_value = 0.0;
  std::uint64_t argmin_mask = 0;
  std::uint64_t checked = 0;
};

struct BetaScan {
  double value = 0.0;
  std::uint64_t argmax_mask = 0;
  std::uint64_t singular = 0;  // vertices with rcond below machine epsilon
};

struct BasisScan {
  std::vector<std::uint64_t> feasible_masks;  // x-basic masks, ascending
  std::int64_t singular = 0;
};

struct SampleScan {
  double value = 0.0;
  std::vector<double> argmax_d;
  std::int64_t evaluated = 0;
  std::int64_t singular = 0;
};

struct SampleParams {
  int samples = 4096;
  int restart_length = 64;  // rank-one moves per full refactorization
  std::uint64_t seed = 1;
};

// ||(I - D + D m)^-1 D||_inf for a diagonal D = diag(d); returns +inf when the
// matrix is numerically singular.
double vertex_norm(const Matrix& m, const std::vector<double>& d);

// Coordinate ascent on the same norm starting from d: each coordinate tries
// the candidates {0, .25, .5, .75, 1} through rank-one inverse updates,
// skipping singular moves. Updates d and the counters in stats in place.
double coordinate_ascent(const Matrix& m, std::vector<double>& d, int sweeps,
                         SampleScan& stats);

namespace serial {
MinorScan principal_minors(const Matrix& m);
MinorScan vertex_determinants(const Matrix& m);
BetaScan beta_vertices(const Matrix& m);
BasisScan complementary_bases(const Matrix& m, const Vector& q, double tol);
SampleScan beta_samples(const Matrix& m, const SampleParams& params);
}  // namespace serial

namespace omp {
MinorScan principal_minors(const Matrix& m);
MinorScan vertex_determinants(const Matrix& m);
BetaScan beta_vertices(const Matrix& m);
BasisScan complementary_bases(const Matrix& m, const Vector& q, double tol);
SampleScan beta_samples(const Matrix& m, const SampleParams& params);
}  // namespace omp

namespace detail {
// Shared per-item bodies so the two drivers cannot drift apart.
double vertex_determinant(const Matrix& m, std::uint64_t mask);
double principal_minor(const Matrix& m, std::uint64_t mask);
// Returns -1 when singular, otherwise the induced inf-norm.
double vertex_beta(const Matrix& m, std::uint64_t mask);
// 1 feasible, 0 infeasible, -1 singular.
int basis_feasible(const Matrix& m, const Vector& q, std::uint64_t mask, double tol);
SampleScan sample_restart(const Matrix& m, const SampleParams& params, int restart);
int restart_count(const SampleParams& params);
void merge_samples(SampleScan& into, SampleScan&& from);
}  // namespace detail

}  // namespace marketlcp::kernels
