#include "marketlcp/simplex.hpp"

#include <algorithm>
#include <cmath>

#include "marketlcp/error.hpp"

namespace marketlcp {

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

enum class PhaseResult { Optimal, Unbounded, IterationLimit };

class Simplex {
 public:
  Simplex(const LinearProgram& lp, double tol) : lp_(lp), tol_(tol) { build(); }

  LpResult run() {
    LpResult res;
    const int cols = static_cast<int>(std::ssize(cost_));

    // Phase 1: drive the artificials out.
    Vector phase1 = Vector::Zero(cols);
    for (int j = first_art_; j < cols; ++j) phase1(j) = 1.0;
    std::vector<bool> allowed(static_cast<std::size_t>(cols), true);
    auto r1 = iterate(phase1, allowed, res.iterations);
    if (r1 == PhaseResult::IterationLimit) return res;
    const double infeas = objective(phase1);
    if (infeas > tol_ * std::max(1.0, inf_norm_b_)) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    drive_out_artificials();
    for (int j = first_art_; j < cols; ++j) allowed[static_cast<std::size_t>(j)] = false;

    auto r2 = iterate(cost_, allowed, res.iterations);
    if (r2 == PhaseResult::IterationLimit) return res;
    if (r2 == PhaseResult::Unbounded) {
      res.status = LpStatus::Unbounded;
      return res;
    }
    res.status = LpStatus::Optimal;
    recover(res);
    return res;
  }

 private:
  void build() {
    const int m = lp_.rows();
    const int n = lp_.cols();
    if (lp_.a.rows() != m || lp_.a.cols() != n || std::ssize(lp_.sense) != m ||
        (!lp_.free_var.empty() && std::ssize(lp_.free_var) != n)) {
      throw Error(ErrorCode::ValidationError, "linear program dimensions disagree");
    }
    inf_norm_b_ = m > 0 ? lp_.b.cwiseAbs().maxCoeff() : 0.0;

    // Structural columns: x_j, plus -x_j for free variables.
    for (int j = 0; j < n; ++j) {
      col_origin_.push_back({j, 1.0});
      if (!lp_.free_var.empty() && lp_.free_var[static_cast<std::size_t>(j)]) {
        col_origin_.push_back({j, -1.0});
      }
    }
    const int structural = static_cast<int>(col_origin_.size());

    flip_.assign(static_cast<std::size_t>(m), 1.0);
    std::vector<RowSense> sense = lp_.sense;
    for (int i = 0; i < m; ++i) {
      if (lp_.b(i) < 0.0) {
        flip_[static_cast<std::size_t>(i)] = -1.0;
        if (sense[static_cast<std::size_t>(i)] == RowSense::Le) {
          sense[static_cast<std::size_t>(i)] = RowSense::Ge;
        } else if (sense[static_cast<std::size_t>(i)] == RowSense::Ge) {
          sense[static_cast<std::size_t>(i)] = RowSense::Le;
        }
      }
    }
    int slacks = 0, arts = 0;
    for (auto s : sense) {
      if (s != RowSense::Eq) ++slacks;
      if (s != RowSense::Le) ++arts;
    }
    first_art_ = structural + slacks;
    const int cols = first_art_ + arts;

    a_ = Matrix::Zero(m, cols);
    cost_ = Vector::Zero(cols);
    for (int k = 0; k < structural; ++k) {
      const auto [j, sign] = col_origin_[static_cast<std::size_t>(k)];
      a_.col(k) = sign * lp_.a.col(j);
      cost_(k) = sign * lp_.c(j);
    }
    rhs_ = lp_.b;
    basis_.assign(static_cast<std::size_t>(m), -1);
    int s = structural, art = first_art_;
    for (int i = 0; i < m; ++i) {
      const double f = flip_[static_cast<std::size_t>(i)];
      a_.row(i) *= f;
      rhs_(i) *= f;
      switch (sense[static_cast<std::size_t>(i)]) {
        case RowSense::Le:
          a_(i, s) = 1.0;
          basis_[static_cast<std::size_t>(i)] = s++;
          break;
        case RowSense::Ge:
          a_(i, s++) = -1.0;
          a_(i, art) = 1.0;
          basis_[static_cast<std::size_t>(i)] = art++;
          break;
        case RowSense::Eq:
          a_(i, art) = 1.0;
          basis_[static_cast<std::size_t>(i)] = art++;
          break;
      }
    }
    tab_.resize(m, cols + 1);
    tab_.leftCols(cols) = a_;
    tab_.col(cols) = rhs_;
  }

  double objective(const Vector& cost) const {
    double v = 0.0;
    const int rhs = static_cast<int>(tab_.cols()) - 1;
    for (int i = 0; i < tab_.rows(); ++i) {
      v += cost(basis_[static_cast<std::size_t>(i)]) * tab_(i, rhs);
    }
    return v;
  }

  PhaseResult iterate(const Vector& cost, const std::vector<bool>& allowed, int& iterations) {
    const int m = static_cast<int>(tab_.rows());
    const int cols = static_cast<int>(tab_.cols()) - 1;
    const double ctol = tol_ * std::max(1.0, cost.cwiseAbs().maxCoeff());
    const int limit = 200 * (m + cols) + 1000;
    std::vector<bool> is_basic(static_cast<std::size_t>(cols), false);
    for (int v : basis_) is_basic[static_cast<std::size_t>(v)] = true;

    for (;;) {
      if (iterations >= limit) return PhaseResult::IterationLimit;
      // Bland: smallest-index column with negative reduced cost.
      int entering = -1;
      for (int j = 0; j < cols && entering < 0; ++j) {
        if (!allowed[static_cast<std::size_t>(j)] || is_basic[static_cast<std::size_t>(j)]) {
          continue;
        }
        double r = cost(j);
        for (int i = 0; i < m; ++i) r -= cost(basis_[static_cast<std::size_t>(i)]) * tab_(i, j);
        if (r < -ctol) entering = j;
      }
      if (entering < 0) return PhaseResult::Optimal;

      int row = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        const double a = tab_(i, entering);
        if (a <= tol_) continue;
        const double ratio = tab_(i, cols) / a;
        if (row < 0 || ratio < best - tol_ ||
            (ratio <= best + tol_ &&
             basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(row)])) {
          if (row < 0 || ratio < best - tol_) best = ratio;
          row = i;
        }
      }
      if (row < 0) return PhaseResult::Unbounded;
      is_basic[static_cast<std::size_t>(basis_[static_cast<std::size_t>(row)])] = false;
      is_basic[static_cast<std::size_t>(entering)] = true;
      pivot(row, entering);
      ++iterations;
    }
  }

  void pivot(int row, int col) {
    tab_.row(row) /= tab_(row, col);
    Vector column = tab_.col(col);
    column(row) = 0.0;
    tab_.noalias() -= column * tab_.row(row);
    tab_.col(col).setZero();
    tab_(row, col) = 1.0;
    basis_[static_cast<std::size_t>(row)] = col;
    const int rhs = static_cast<int>(tab_.cols()) - 1;
    for (int i = 0; i < tab_.rows(); ++i) {
      if (tab_(i, rhs) < 0.0 && tab_(i, rhs) > -tol_) tab_(i, rhs) = 0.0;
    }
  }

  // Artificials still basic at zero level are swapped for any structural or
  // slack column with a nonzero entry in their row; rows with none are
  // redundant and keep the artificial at zero.
  void drive_out_artificials() {
    for (int i = 0; i < tab_.rows(); ++i) {
      if (basis_[static_cast<std::size_t>(i)] < first_art_) continue;
      for (int j = 0; j < first_art_; ++j) {
        if (std::abs(tab_(i, j)) > 1e-7 &&
            std::find(basis_.begin(), basis_.end(), j) == basis_.end()) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  void recover(LpResult& res) const {
    const int m = static_cast<int>(tab_.rows());
    Vector xs = Vector::Zero(static_cast<int>(cost_.size()));
    Vector y = Vector::Zero(m);
    if (m > 0) {
      Matrix basis(m, m);
      Vector cb(m);
      for (int i = 0; i < m; ++i) {
        const int v = basis_[static_cast<std::size_t>(i)];
        basis.col(i) = a_.col(v);
        cb(i) = cost_(v);
      }
      Eigen::PartialPivLU<Matrix> lu(basis);
      const Vector xb = lu.solve(rhs_);
      for (int i = 0; i < m; ++i) {
        xs(basis_[static_cast<std::size_t>(i)]) = std::max(0.0, xb(i));
      }
      y = lu.transpose().solve(cb);
    }
    res.x = Vector::Zero(lp_.cols());
    for (std::size_t k = 0; k < col_origin_.size(); ++k) {
      const auto [j, sign] = col_origin_[k];
      res.x(j) += sign * xs(static_cast<int>(k));
    }
    res.duals = Vector::Zero(m);
    for (int i = 0; i < m; ++i) res.duals(i) = y(i) * flip_[static_cast<std::size_t>(i)];
    res.objective = lp_.c.dot(res.x);
  }

  const LinearProgram& lp_;
  double tol_;
  double inf_norm_b_ = 0.0;
  std::vector<std::pair<int, double>> col_origin_;
  std::vector<double> flip_;
  int first_art_ = 0;
  Matrix a_;
  Vector rhs_;
  Vector cost_;
  Matrix tab_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  Simplex simplex(lp, tol);
  return simplex.run();
}

}  // namespace marketlcp
