#include "marketlcp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "marketlcp/random.hpp"

namespace marketlcp::kernels {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double inf_norm_scaled(const Matrix& inv, const Eigen::VectorXd& d) {
  return (inv.cwiseAbs() * d).maxCoeff();
}

// Rank-one update of inv = (I - D + D m)^-1 when d_i changes to new_di.
bool update_inverse(Matrix& inv, const Matrix& m, Eigen::VectorXd& d, int i,
                    double new_di) {
  Eigen::RowVectorXd u = (new_di - d(i)) * m.row(i);
  u(i) -= (new_di - d(i));
  const Eigen::RowVectorXd u_inv = u * inv;
  const double denom = 1.0 + u_inv(i);
  if (!(std::abs(denom) > 1e-12)) return false;
  const Eigen::VectorXd col = inv.col(i);
  inv.noalias() -= (col / denom) * u_inv;
  d(i) = new_di;
  return inv.allFinite();
}

}  // namespace

Matrix vertex_matrix(const Matrix& m, std::uint64_t mask) {
  const int n = static_cast<int>(m.rows());
  Matrix a = Matrix::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    if (mask >> i & 1ULL) a.row(i) = m.row(i);
  }
  return a;
}

double vertex_norm(const Matrix& m, const std::vector<double>& d) {
  const int n = static_cast<int>(m.rows());
  Matrix a = m;
  for (int i = 0; i < n; ++i) {
    a.row(i) *= d[i];
    a(i, i) += 1.0 - d[i];
  }
  Eigen::PartialPivLU<Matrix> lu(a);
  if (!(lu.rcond() > kEps)) return std::numeric_limits<double>::infinity();
  const Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(d.data(), n);
  return inf_norm_scaled(lu.inverse(), dv);
}

double coordinate_ascent(const Matrix& m, std::vector<double>& d, int sweeps,
                         SampleScan& stats) {
  constexpr double kCandidates[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const int n = static_cast<int>(m.rows());
  double best = vertex_norm(m, d);
  ++stats.evaluated;
  if (!std::isfinite(best)) {
    ++stats.singular;
    return 0.0;
  }
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    // Fresh factorization per sweep keeps rank-one drift bounded.
    Eigen::VectorXd dv = Eigen::Map<const Eigen::VectorXd>(d.data(), n);
    Matrix a = m;
    for (int i = 0; i < n; ++i) {
      a.row(i) *= dv(i);
      a(i, i) += 1.0 - dv(i);
    }
    Matrix inv = a.partialPivLu().inverse();
    bool improved = false;
    for (int i = 0; i < n; ++i) {
      const double current = dv(i);
      double chosen = current;
      for (double c : kCandidates) {
        if (c == current) continue;
        Matrix trial = inv;
        Eigen::VectorXd dt = dv;
        ++stats.evaluated;
        if (!update_inverse(trial, m, dt, i, c)) {
          ++stats.singular;
          continue;
        }
        const double v = inf_norm_scaled(trial, dt);
        if (v > best * (1.0 + 1e-12)) {
          best = v;
          chosen = c;
        }
      }
      if (chosen != current && update_inverse(inv, m, dv, i, chosen)) {
        d[static_cast<std::size_t>(i)] = chosen;
        improved = true;
      }
    }
    if (!improved) break;
  }
  return best;
}

namespace detail {

double vertex_determinant(const Matrix& m, std::uint64_t mask) {
  return vertex_matrix(m, mask).partialPivLu().determinant();
}

double principal_minor(const Matrix& m, std::uint64_t mask) {
  std::vector<int> idx;
  for (int i = 0; i < m.rows(); ++i) {
    if (mask >> i & 1ULL) idx.push_back(i);
  }
  const int k = static_cast<int>(idx.size());
  Matrix sub(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) sub(a, b) = m(idx[a], idx[b]);
  }
  return sub.partialPivLu().determinant();
}

double vertex_beta(const Matrix& m, std::uint64_t mask) {
  const int n = static_cast<int>(m.rows());
  Eigen::PartialPivLU<Matrix> lu(vertex_matrix(m, mask));
  if (!(lu.rcond() > kEps)) return -1.0;
  const Matrix inv = lu.inverse();
  double best = 0.0;
  for (int r = 0; r < n; ++r) {
    double row = 0.0;
    for (int c = 0; c < n; ++c) {
      if (mask >> c & 1ULL) row += std::abs(inv(r, c));
    }
    best = std::max(best, row);
  }
  return best;
}

int basis_feasible(const Matrix& m, const Vector& q, std::uint64_t mask, double tol) {
  const int n = static_cast<int>(q.size());
  const double scale = tol * std::max(1.0, q.cwiseAbs().maxCoeff());
  std::vector<int> in, out;
  for (int i = 0; i < n; ++i) (mask >> i & 1ULL ? in : out).push_back(i);
  if (in.empty()) return q.minCoeff() >= -scale ? 1 : 0;

  const int k = static_cast<int>(in.size());
  Matrix mss(k, k);
  Vector rhs(k);
  for (int a = 0; a < k; ++a) {
    rhs(a) = -q(in[a]);
    for (int b = 0; b < k; ++b) mss(a, b) = m(in[a], in[b]);
  }
  Eigen::PartialPivLU<Matrix> lu(mss);
  if (!(lu.rcond() > kEps)) return -1;
  const Vector xs = lu.solve(rhs);
  if (xs.minCoeff() < -scale) return 0;
  for (int r : out) {
    double w = q(r);
    for (int b = 0; b < k; ++b) w += m(r, in[b]) * xs(b);
    if (w < -scale) return 0;
  }
  return 1;
}

int restart_count(const SampleParams& params) {
  const int len = std::max(1, params.restart_length);
  return std::max(1, (params.samples + len - 1) / len);
}

SampleScan sample_restart(const Matrix& m, const SampleParams& params, int restart) {
  const int n = static_cast<int>(m.rows());
  const int len = std::max(1, params.restart_length);
  const int budget = std::min(len, params.samples - restart * len);
  SampleScan out;
  if (budget <= 0 || n == 0) return out;

  Rng rng(mix_seed(params.seed, static_cast<std::uint64_t>(restart)));
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = rng.uniform();

  Matrix a = m;
  for (int i = 0; i < n; ++i) {
    a.row(i) *= d(i);
    a(i, i) += 1.0 - d(i);
  }
  Eigen::PartialPivLU<Matrix> lu(a);
  ++out.evaluated;
  if (!(lu.rcond() > kEps)) {
    ++out.singular;
    return out;
  }
  Matrix inv = lu.inverse();
  auto record = [&](double value) {
    if (value > out.value) {
      out.value = value;
      out.argmax_d.assign(d.data(), d.data() + n);
    }
  };
  record(inf_norm_scaled(inv, d));

  for (int s = 1; s < budget; ++s) {
    const int i = rng.integer(0, n - 1);
    const double di = rng.uniform();
    ++out.evaluated;
    Matrix trial = inv;
    Eigen::VectorXd dt = d;
    if (!update_inverse(trial, m, dt, i, di)) {
      ++out.singular;
      continue;
    }
    inv.swap(trial);
    d.swap(dt);
    record(inf_norm_scaled(inv, d));
  }
  return out;
}

void merge_samples(SampleScan& into, SampleScan&& from) {
  into.evaluated += from.evaluated;
  into.singular += from.singular;
  if (from.value > into.value) {
    into.value = from.value;
    into.argmax_d = std::move(from.argmax_d);
  }
}

}  // namespace detail

namespace serial {

namespace {

template <class F>
MinorScan scan_masks(const Matrix& m, F&& det_of) {
  const int n = static_cast<int>(m.rows());
  MinorScan scan;
  scan.min_value = std::numeric_limits<double>::infinity();
  const std::uint64_t count = 1ULL << n;
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    const double det = det_of(m, mask);
    ++scan.checked;
    if (det < scan.min_value) {
      scan.min_value = det;
      scan.argmin_mask = mask;
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
  BetaScan scan;
  const std::uint64_t count = 1ULL << n;
  for (std::uint64_t mask = 1; mask < count; ++mask) {
    const double v = detail::vertex_beta(m, mask);
    if (v < 0.0) {
      ++scan.singular;
    } else if (v > scan.value) {
      scan.value = v;
      scan.argmax_mask = mask;
    }
  }
  return scan;
}

BasisScan complementary_bases(const Matrix& m, const Vector& q, double tol) {
  const int n = static_cast<int>(q.size());
  BasisScan scan;
  const std::uint64_t count = 1ULL << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const int r = detail::basis_feasible(m, q, mask, tol);
    if (r < 0) ++scan.singular;
    if (r > 0) scan.feasible_masks.push_back(mask);
  }
  return scan;
}

SampleScan beta_samples(const Matrix& m, const SampleParams& params) {
  SampleScan scan;
  const int restarts = detail::restart_count(params);
  for (int r = 0; r < restarts; ++r) {
    detail::merge_samples(scan, detail::sample_restart(m, params, r));
  }
  return scan;
}

}  // namespace serial

}  // namespace marketlcp::kernels
