#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "marketlcp/kernels.hpp"

namespace marketlcp::kernels::omp {

namespace {

template <class F>
MinorScan scan_masks(const Matrix& m, F&& det_of) {
  const int n = static_cast<int>(m.rows());
  const auto count = static_cast<std::int64_t>(1ULL << n);
  MinorScan scan;
  scan.min_value = std::numeric_limits<double>::infinity();

#pragma omp parallel
  {
    MinorScan local;
    local.min_value = std::numeric_limits<double>::infinity();
#pragma omp for schedule(static) nowait
    for (std::int64_t mask = 1; mask < count; ++mask) {
      const double det = det_of(m, static_cast<std::uint64_t>(mask));
      ++local.checked;
      if (det < local.min_value) {
        local.min_value = det;
        local.argmin_mask = static_cast<std::uint64_t>(mask);
      }
    }
#pragma omp critical(marketlcp_minor_merge)
    {
      scan.checked += local.checked;
      if (local.min_value < scan.min_value ||
          (local.min_value == scan.min_value && local.argmin_mask < scan.argmin_mask)) {
        scan.min_value = local.min_value;
        scan.argmin_mask = local.argmin_mask;
      }
    }
  }
  return scan;
}

}  // namespace

MinorScan principal_minors(const Matrix& m) {
  return scan_masks(m, detail::principal_minor);
}

MinorScan vertex_determinants(const Matrix& m) {
  return scan_masks(m, detail::vertex_determinant);
}

BetaScan beta_vertices(const Matrix& m) {
  const int n = static_cast<int>(m.rows());
  const auto count = static_cast<std::int64_t>(1ULL << n);
  BetaScan scan;

#pragma omp parallel
  {
    BetaScan local;
#pragma omp for schedule(static) nowait
    for (std::int64_t mask = 1; mask < count; ++mask) {
      const double v = detail::vertex_beta(m, static_cast<std::uint64_t>(mask));
      if (v < 0.0) {
        ++local.singular;
      } else if (v > local.value) {
        local.value = v;
        local.argmax_mask = static_cast<std::uint64_t>(mask);
      }
    }
#pragma omp critical(marketlcp_beta_merge)
    {
      scan.singular += local.singular;
      if (local.value > scan.value ||
          (local.value == scan.value && local.value > 0.0 &&
           local.argmax_mask < scan.argmax_mask)) {
        scan.value = local.value;
        scan.argmax_mask = local.argmax_mask;
      }
    }
  }
  return scan;
}

BasisScan complementary_bases(const Matrix& m, const Vector& q, double tol) {
  const int n = static_cast<int>(q.size());
  const auto count = static_cast<std::int64_t>(1ULL << n);
  BasisScan scan;

#pragma omp parallel
  {
    std::vector<std::uint64_t> feasible;
    std::int64_t singular = 0;
#pragma omp for schedule(static) nowait
    for (std::int64_t mask = 0; mask < count; ++mask) {
      const int r = detail::basis_feasible(m, q, static_cast<std::uint64_t>(mask), tol);
      if (r < 0) ++singular;
      if (r > 0) feasible.push_back(static_cast<std::uint64_t>(mask));
    }
#pragma omp critical(marketlcp_basis_merge)
    {
      scan.singular += singular;
      scan.feasible_masks.insert(scan.feasible_masks.end(), feasible.begin(),
                                 feasible.end());
    }
  }
  std::sort(scan.feasible_masks.begin(), scan.feasible_masks.end());
  return scan;
}

SampleScan beta_samples(const Matrix& m, const SampleParams& params) {
  const int restarts = detail::restart_count(params);
  std::vector<SampleScan> per_restart(static_cast<std::size_t>(restarts));

#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < restarts; ++r) {
    per_restart[static_cast<std::size_t>(r)] = detail::sample_restart(m, params, r);
  }

  SampleScan scan;
  for (auto& s : per_restart) detail::merge_samples(scan, std::move(s));
  return scan;
}

}  // namespace marketlcp::kernels::omp
