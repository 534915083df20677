#include "marketlcp/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>
#include <tuple>

#include "marketlcp/error.hpp"
#include "marketlcp/kernels.hpp"

namespace marketlcp {

std::string to_string(VarKind kind) {
  switch (kind) {
    case VarKind::GenBlock: return "P_G";
    case VarKind::DemandBlock: return "P_D";
    case VarKind::AnglePos: return "delta+";
    case VarKind::AngleNeg: return "delta-";
    case VarKind::UnitCapacityDual: return "alpha";
    case VarKind::GenBlockDual: return "phi";
    case VarKind::DemandMinDual: return "sigma";
    case VarKind::DemandBlockDual: return "psi";
    case VarKind::Price: return "rho";
    case VarKind::LineCapacityDual: return "gamma";
    case VarKind::Generic: return "x";
  }
  return "?";
}

std::string to_string(const VarLabel& label) {
  std::string s = to_string(label.kind) + "[" + std::to_string(label.entity);
  if (label.sub >= 0) s += "," + std::to_string(label.sub);
  return s + "]";
}

void LcpInstance::validate() const {
  const auto n = q.size();
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::ValidationError, "LCP matrix is not square");
  }
  if (m.rows() != n || static_cast<Eigen::Index>(labels.size()) != n) {
    throw Error(ErrorCode::ValidationError, "LCP dimensions of M, q and labels disagree");
  }
  std::set<std::tuple<int, int, int>> seen;
  for (const auto& l : labels) {
    if (!seen.emplace(static_cast<int>(l.kind), l.entity, l.sub).second) {
      throw Error(ErrorCode::ValidationError, "duplicate LCP label " + to_string(l));
    }
  }
}

LcpInstance LcpInstance::unlabeled(Matrix m, Vector q) {
  LcpInstance inst{std::move(m), std::move(q), {}};
  inst.labels.reserve(static_cast<std::size_t>(inst.q.size()));
  for (int i = 0; i < inst.q.size(); ++i) inst.labels.push_back({VarKind::Generic, i, -1});
  return inst;
}

std::string to_string(LcpStatus status) {
  switch (status) {
    case LcpStatus::Solved: return "Solved";
    case LcpStatus::RayTermination: return "RayTermination";
    case LcpStatus::IterationLimit: return "IterationLimit";
    case LcpStatus::Inaccurate: return "Inaccurate";
  }
  return "?";
}

bool satisfies_complementarity(const LcpInstance& inst, const LcpSolution& sol,
                               double tol) {
  const Vector w = inst.m * sol.x + inst.q;
  if (sol.x.size() == 0) return true;
  if (sol.x.minCoeff() < -tol || w.minCoeff() < -tol) return false;
  const double xn = sol.x.cwiseAbs().maxCoeff();
  const double wn = w.cwiseAbs().maxCoeff();
  return std::abs(sol.x.dot(w)) <= tol * (1.0 + xn * wn);
}

namespace {

// Dense Lemke tableau. Columns: w_0..w_{n-1}, x_0..x_{n-1}, z0, rhs.
class LemkeTableau {
 public:
  LemkeTableau(const LcpInstance& inst, const SolverOptions& opts, double tie_scale)
      : n_(inst.size()), m_(inst.m), q_(inst.q), opts_(opts) {
    const double qscale = n_ > 0 ? std::max(1.0, q_.cwiseAbs().maxCoeff()) : 1.0;
    rhs_tie_ = opts.tie_tol * tie_scale * qscale;
    basis_tie_ = 10.0 * opts.tie_tol * tie_scale;
    tab_ = Matrix::Zero(n_, 2 * n_ + 2);
    tab_.leftCols(n_).setIdentity();
    tab_.middleCols(n_, n_) = -m_;
    tab_.col(z0()).setConstant(-1.0);
    tab_.col(rhs()) = q_;
    basic_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) basic_[static_cast<std::size_t>(i)] = i;
  }

  LcpSolution run() {
    LcpSolution sol;
    sol.x = Vector::Zero(n_);
    if (n_ == 0 || q_.minCoeff() >= 0.0) {
      sol.w = q_;
      sol.x_basic.assign(static_cast<std::size_t>(n_), false);
      sol.status = LcpStatus::Solved;
      return sol;
    }

    const int max_pivots = opts_.max_pivots > 0 ? opts_.max_pivots : 50 * n_;
    int entering = z0();
    int row = initial_row();
    int pivots = 0;
    for (;;) {
      if (pivots >= max_pivots) {
        sol.status = LcpStatus::IterationLimit;
        break;
      }
      const int leaving = basic_[static_cast<std::size_t>(row)];
      pivot(row, entering);
      ++pivots;
      if (opts_.refactor_interval > 0 && pivots % opts_.refactor_interval == 0) refactor();
      if (leaving == z0()) {
        sol.status = LcpStatus::Solved;
        break;
      }
      entering = leaving < n_ ? leaving + n_ : leaving - n_;
      row = ratio_row(entering);
      if (row < 0) {
        sol.status = LcpStatus::RayTermination;
        break;
      }
    }
    sol.pivots = pivots;
    extract(sol);
    return sol;
  }

 private:
  int z0() const { return 2 * n_; }
  int rhs() const { return 2 * n_ + 1; }

  // Lexicographic comparison of (rhs, B^-1 row) / scale between two rows.
  // Returns negative when row a is smaller. Differences below the rounding
  // noise of the data count as ties; full ties go to the lower variable index.
  int lex_compare(int a, double sa, int b, double sb) const {
    const double inv = 1.0 / sa + 1.0 / sb;
    auto differ = [&](double u, double v, double floor) {
      return std::abs(u - v) > floor * inv + 1e-10 * std::max(std::abs(u), std::abs(v));
    };
    const double ra = tab_(a, rhs()) / sa, rb = tab_(b, rhs()) / sb;
    if (differ(ra, rb, rhs_tie_)) return ra < rb ? -1 : 1;
    for (int c = 0; c < n_; ++c) {
      const double ua = tab_(a, c) / sa, ub = tab_(b, c) / sb;
      if (differ(ua, ub, basis_tie_)) return ua < ub ? -1 : 1;
    }
    const int va = basic_[static_cast<std::size_t>(a)], vb = basic_[static_cast<std::size_t>(b)];
    return va < vb ? -1 : (va > vb ? 1 : 0);
  }

  // z0 enters with column -e: the leaving row is the lexicographic minimum of
  // (q_i, B^-1_i) over all rows.
  int initial_row() const {
    int best = 0;
    for (int r = 1; r < n_; ++r) {
      if (lex_compare(r, 1.0, best, 1.0) < 0) best = r;
    }
    return best;
  }

  int ratio_row(int entering) const {
    int best = -1;
    int z0_row = -1;
    const double threshold =
        opts_.pivot_tol * std::max(1.0, tab_.col(entering).cwiseAbs().maxCoeff());
    for (int r = 0; r < n_; ++r) {
      const double a = tab_(r, entering);
      if (a <= threshold) continue;
      if (basic_[static_cast<std::size_t>(r)] == z0()) z0_row = r;
      if (best < 0 || lex_compare(r, a, best, tab_(best, entering)) < 0) best = r;
    }
    if (best >= 0 && z0_row >= 0 && z0_row != best) {
      // Prefer terminating when z0 attains the minimum ratio.
      const double rb = tab_(best, rhs()) / tab_(best, entering);
      const double rz = tab_(z0_row, rhs()) / tab_(z0_row, entering);
      if (std::abs(rz - rb) <= 1e-10 * std::max({1.0, std::abs(rb), std::abs(rz)})) {
        best = z0_row;
      }
    }
    return best;
  }

  void pivot(int row, int col) {
    tab_.row(row) /= tab_(row, col);
    Vector column = tab_.col(col);
    column(row) = 0.0;
    tab_.noalias() -= column * tab_.row(row);
    tab_.col(col).setZero();
    tab_(row, col) = 1.0;
    basic_[static_cast<std::size_t>(row)] = col;
    clamp_rhs();
  }

  void clamp_rhs() {
    for (int r = 0; r < n_; ++r) {
      if (tab_(r, rhs()) < 0.0) tab_(r, rhs()) = 0.0;
    }
  }

  Vector original_column(int var) const {
    if (var < n_) return Vector::Unit(n_, var);
    if (var < 2 * n_) return -m_.col(var - n_);
    return -Vector::Ones(n_);
  }

  Matrix basis_matrix() const {
    Matrix b(n_, n_);
    for (int r = 0; r < n_; ++r) b.col(r) = original_column(basic_[static_cast<std::size_t>(r)]);
    return b;
  }

  void refactor() {
    Eigen::PartialPivLU<Matrix> lu(basis_matrix());
    Matrix full(n_, 2 * n_ + 2);
    full.leftCols(n_).setIdentity();
    full.middleCols(n_, n_) = -m_;
    full.col(z0()).setConstant(-1.0);
    full.col(rhs()) = q_;
    tab_ = lu.solve(full);
    for (int r = 0; r < n_; ++r) {
      const int var = basic_[static_cast<std::size_t>(r)];
      tab_.col(var).setZero();
      tab_(r, var) = 1.0;
    }
    clamp_rhs();
  }

  void extract(LcpSolution& sol) const {
    // Basic values from the original data rather than the updated tableau.
    Eigen::PartialPivLU<Matrix> lu(basis_matrix());
    const Vector values = lu.solve(q_);
    sol.x = Vector::Zero(n_);
    sol.x_basic.assign(static_cast<std::size_t>(n_), false);
    for (int r = 0; r < n_; ++r) {
      const int var = basic_[static_cast<std::size_t>(r)];
      if (var >= n_ && var < 2 * n_) {
        sol.x(var - n_) = values(r);
        sol.x_basic[static_cast<std::size_t>(var - n_)] = true;
      }
    }
    if (sol.status == LcpStatus::Solved) {
      const double floor = -opts_.complementarity_tol;
      for (int i = 0; i < n_; ++i) {
        if (sol.x(i) < 0.0 && sol.x(i) > floor) sol.x(i) = 0.0;
      }
    }
    sol.w = m_ * sol.x + q_;
  }

  int n_;
  const Matrix& m_;
  const Vector& q_;
  SolverOptions opts_;
  double rhs_tie_ = 0.0;
  double basis_tie_ = 0.0;
  Matrix tab_;
  std::vector<int> basic_;
};

}  // namespace

LcpSolution solve_lcp(const LcpInstance& inst, const SolverOptions& opts) {
  inst.validate();
  // A wrong tie decision in a degenerate problem can walk the path back to
  // the primary ray, so failed runs restart with coarser then finer ties.
  constexpr double kTieScales[] = {1.0, 10.0, 0.1};
  const int runs = std::clamp(opts.tie_restarts + 1, 1, static_cast<int>(std::size(kTieScales)));
  LcpSolution first;
  for (int k = 0; k < runs; ++k) {
    LcpSolution sol = LemkeTableau(inst, opts, kTieScales[k]).run();
    if (sol.status == LcpStatus::Solved &&
        !satisfies_complementarity(inst, sol, opts.complementarity_tol)) {
      sol.status = LcpStatus::Inaccurate;
    }
    if (sol.status == LcpStatus::Solved) return sol;
    if (k == 0) first = std::move(sol);
    if (first.status == LcpStatus::IterationLimit) break;
  }
  return first;
}

OracleResult enumerate_lcp_oracle(const LcpInstance& inst, double tol, bool parallel) {
  inst.validate();
  const int n = inst.size();
  if (n > kOracleMaxDimension) {
    throw Error(ErrorCode::DimensionTooLarge,
                "oracle enumeration needs n <= 16, got " + std::to_string(n));
  }
  const auto scan = parallel ? kernels::omp::complementary_bases(inst.m, inst.q, tol)
                             : kernels::serial::complementary_bases(inst.m, inst.q, tol);
  OracleResult out;
  out.singular_bases = scan.singular;
  out.feasible_bases = static_cast<std::int64_t>(scan.feasible_masks.size());

  for (const auto mask : scan.feasible_masks) {
    std::vector<int> in;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1ULL) in.push_back(i);
    }
    LcpSolution sol;
    sol.status = LcpStatus::Solved;
    sol.x = Vector::Zero(n);
    sol.x_basic.assign(static_cast<std::size_t>(n), false);
    if (!in.empty()) {
      const int k = static_cast<int>(in.size());
      Matrix mss(k, k);
      Vector rhs(k);
      for (int a = 0; a < k; ++a) {
        rhs(a) = -inst.q(in[a]);
        for (int b = 0; b < k; ++b) mss(a, b) = inst.m(in[a], in[b]);
      }
      const Vector xs = mss.partialPivLu().solve(rhs);
      for (int a = 0; a < k; ++a) {
        sol.x(in[a]) = std::max(0.0, xs(a));
        sol.x_basic[static_cast<std::size_t>(in[a])] = true;
      }
    }
    sol.w = inst.m * sol.x + inst.q;

    const bool duplicate = std::any_of(
        out.solutions.begin(), out.solutions.end(), [&](const LcpSolution& s) {
          return (s.x - sol.x).cwiseAbs().maxCoeff() <=
                 1e-8 * std::max(1.0, sol.x.cwiseAbs().maxCoeff());
        });
    if (!duplicate) out.solutions.push_back(std::move(sol));
  }
  return out;
}

}  // namespace marketlcp
