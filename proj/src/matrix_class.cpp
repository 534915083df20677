#include "marketlcp/matrix_class.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "marketlcp/error.hpp"
#include "marketlcp/kernels.hpp"
#include "marketlcp/random.hpp"

namespace marketlcp {

std::string to_string(ClassMethod method) {
  switch (method) {
    case ClassMethod::ExactMinors: return "ExactMinors";
    case ClassMethod::VertexDeterminants: return "VertexDeterminants";
    case ClassMethod::SampledMinors: return "SampledMinors";
  }
  return "?";
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double inf_norm(const Vector& v) {
  if (v.size() == 0) return 0.0;
  return v.cwiseAbs().maxCoeff();
}

namespace {

std::vector<int> mask_indices(std::uint64_t mask, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (mask >> i & 1ULL) out.push_back(i);
  }
  return out;
}

void require_square(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::ValidationError, "matrix is not square");
  }
}

}  // namespace

MatrixClassReport classify_p_matrix(const Matrix& m, const ClassifyOptions& opts) {
  require_square(m);
  const int n = static_cast<int>(m.rows());
  MatrixClassReport rep;
  if (n == 0) {
    rep.is_p_matrix = true;
    rep.min_minor = std::numeric_limits<double>::infinity();
    return rep;
  }

  std::uint64_t argmin = 0;
  if (n <= std::min(opts.exact_limit, 62)) {
    kernels::MinorScan scan;
    if (opts.vertex_form) {
      rep.method = ClassMethod::VertexDeterminants;
      scan = opts.parallel ? kernels::omp::vertex_determinants(m)
                           : kernels::serial::vertex_determinants(m);
    } else {
      rep.method = ClassMethod::ExactMinors;
      scan = opts.parallel ? kernels::omp::principal_minors(m)
                           : kernels::serial::principal_minors(m);
    }
    rep.min_minor = scan.min_value;
    rep.minors_checked = scan.checked;
    argmin = scan.argmin_mask;
  } else {
    rep.method = ClassMethod::SampledMinors;
    rep.min_minor = std::numeric_limits<double>::infinity();
    auto consider = [&](const std::vector<int>& idx) {
      const int k = static_cast<int>(idx.size());
      Matrix sub(k, k);
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) sub(a, b) = m(idx[a], idx[b]);
      }
      const double det = sub.partialPivLu().determinant();
      ++rep.minors_checked;
      if (det < rep.min_minor) {
        rep.min_minor = det;
        argmin = 0;
        rep.witness = idx;
      }
    };
    for (int i = 0; i < n; ++i) consider({i});
    Rng rng(opts.seed);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int s = 0; s < opts.samples; ++s) {
      const int k = rng.integer(2, n);
      for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
      // Partial Fisher-Yates for the first k entries.
      for (int i = 0; i < k; ++i) {
        std::swap(order[static_cast<std::size_t>(i)],
                  order[static_cast<std::size_t>(rng.integer(i, n - 1))]);
      }
      std::vector<int> idx(order.begin(), order.begin() + k);
      std::sort(idx.begin(), idx.end());
      consider(idx);
    }
  }

  rep.is_p_matrix = rep.min_minor > 0.0;
  if (rep.is_p_matrix) {
    rep.witness.reset();
  } else if (argmin != 0) {
    rep.witness = mask_indices(argmin, n);
  }
  return rep;
}

double beta_grid(const Matrix& m, double step) {
  require_square(m);
  const int n = static_cast<int>(m.rows());
  if (n == 0) return 0.0;
  const int points = static_cast<int>(std::lround(1.0 / step)) + 1;
  std::vector<int> counter(static_cast<std::size_t>(n), 0);
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  double best = 0.0;
  for (;;) {
    for (int i = 0; i < n; ++i) {
      d[static_cast<std::size_t>(i)] =
          std::min(1.0, counter[static_cast<std::size_t>(i)] * step);
    }
    const double v = kernels::vertex_norm(m, d);
    if (std::isfinite(v)) best = std::max(best, v);
    int i = 0;
    while (i < n && ++counter[static_cast<std::size_t>(i)] == points) {
      counter[static_cast<std::size_t>(i)] = 0;
      ++i;
    }
    if (i == n) break;
  }
  return best;
}

namespace {

BetaResult beta_sampled(const Matrix& m, const BetaOptions& opts) {
  kernels::SampleParams params;
  params.samples = opts.samples;
  params.seed = opts.seed;
  auto scan = opts.parallel ? kernels::omp::beta_samples(m, params)
                            : kernels::serial::beta_samples(m, params);
  BetaResult res;
  res.is_lower_bound = true;
  res.evaluated = scan.evaluated;
  res.singular = scan.singular;
  res.beta = scan.value;
  res.argmax_d = std::move(scan.argmax_d);
  if (res.argmax_d.empty()) return res;

  kernels::SampleScan stats;
  std::vector<double> d = res.argmax_d;
  const double refined = kernels::coordinate_ascent(m, d, 3, stats);
  res.evaluated += stats.evaluated;
  res.singular += stats.singular;
  if (refined > res.beta) {
    res.beta = refined;
    res.argmax_d = std::move(d);
  }
  return res;
}

}  // namespace

BetaResult beta_of(const Matrix& m, const BetaOptions& opts) {
  require_square(m);
  const int n = static_cast<int>(m.rows());
  BetaResult res;
  if (n == 0) return res;
  if (n > std::min(opts.vertex_limit, 62)) return beta_sampled(m, opts);

  const auto scan =
      opts.parallel ? kernels::omp::beta_vertices(m) : kernels::serial::beta_vertices(m);
  res.evaluated = static_cast<std::int64_t>((1ULL << n) - 1);
  res.singular = static_cast<std::int64_t>(scan.singular);
  if (scan.singular > 0) {
    throw Error(ErrorCode::SingularEncountered,
                std::to_string(scan.singular) +
                    " binary vertices give a numerically singular I - D + D M");
  }
  res.beta = scan.value;
  res.argmax_d.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    res.argmax_d[static_cast<std::size_t>(i)] = (scan.argmax_mask >> i & 1ULL) ? 1.0 : 0.0;
  }

  if (n <= opts.grid_check_limit && opts.grid_step > 0.0) {
    const double grid = beta_grid(m, opts.grid_step);
    if (grid > res.beta + 1e-9) {
      res.beta = grid;
      res.is_lower_bound = true;
    }
  }
  return res;
}

PerturbationBound perturbation_bound(const LcpInstance& nominal, const Matrix& delta_m,
                                     const Vector& delta_q, const BetaResult& beta) {
  nominal.validate();
  if (delta_m.rows() != nominal.m.rows() || delta_m.cols() != nominal.m.cols() ||
      delta_q.size() != nominal.q.size()) {
    throw Error(ErrorCode::ValidationError, "perturbation dimensions do not match the LCP");
  }
  PerturbationBound b;
  b.beta = beta.beta;
  b.beta_is_lower_bound = beta.is_lower_bound;
  b.m_norm = inf_norm(nominal.m);
  b.q_norm = inf_norm(nominal.q);
  const double dm = inf_norm(delta_m);
  const double dq = inf_norm(delta_q);
  auto ratio = [](double num, double den) {
    if (num == 0.0) return 0.0;
    return den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
  };
  b.epsilon_m = ratio(dm, b.m_norm);
  b.epsilon_q = ratio(dq, b.q_norm);
  b.eta = b.epsilon_m * b.beta * b.m_norm;
  b.epsilon = std::max(dm, dq);
  if (b.eta < 1.0) b.mu = 2.0 * b.epsilon * b.beta / (1.0 - b.eta);
  return b;
}

PerturbationBound perturbation_bound(const LcpInstance& nominal, const Matrix& delta_m,
                                     const Vector& delta_q, const BetaOptions& opts) {
  return perturbation_bound(nominal, delta_m, delta_q, beta_of(nominal.m, opts));
}

void require_bound(const PerturbationBound& bound) {
  if (!bound.mu) {
    throw Error(ErrorCode::EtaExceedsOne,
                "eta = " + std::to_string(bound.eta) + " >= 1, shift bound does not apply");
  }
}

}  // namespace marketlcp
