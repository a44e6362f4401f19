#include "ontic_nogo/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ontic_nogo::optimize {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-11;
constexpr double kRatioTieTol = 1e-13;

// Standard-form tableau: every row is an equality with rhs ≥ 0.
class Tableau {
public:
  Tableau(const LpProblem &p) : n_(p.variable_count()), m_eq_(static_cast<std::size_t>(p.eq_rhs.size())),
                                m_ub_(static_cast<std::size_t>(p.ub_rhs.size())) {
    const std::size_t m = m_eq_ + m_ub_;
    sign_.assign(m, 1.0);
    basis_.assign(m, 0);

    // Columns: original | ub slacks | artificials.
    std::vector<std::size_t> needs_artificial;
    for (std::size_t i = 0; i < m; ++i) {
      const double b = i < m_eq_ ? p.eq_rhs(static_cast<Eigen::Index>(i)) : p.ub_rhs(static_cast<Eigen::Index>(i - m_eq_));
      sign_[i] = b < 0.0 ? -1.0 : 1.0;
      if (i < m_eq_ || sign_[i] < 0.0) {
        needs_artificial.push_back(i);
      }
    }
    artificial_begin_ = n_ + m_ub_;
    cols_ = artificial_begin_ + needs_artificial.size();

    standard_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cols_));
    rhs_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      if (i < m_eq_) {
        standard_.row(r).head(static_cast<Eigen::Index>(n_)) = sign_[i] * p.eq_matrix.row(r);
        rhs_(r) = sign_[i] * p.eq_rhs(r);
      } else {
        const auto u = static_cast<Eigen::Index>(i - m_eq_);
        standard_.row(r).head(static_cast<Eigen::Index>(n_)) = sign_[i] * p.ub_matrix.row(u);
        standard_(r, static_cast<Eigen::Index>(n_) + u) = sign_[i];
        rhs_(r) = sign_[i] * p.ub_rhs(u);
        basis_[i] = n_ + static_cast<std::size_t>(u);
      }
    }
    for (std::size_t k = 0; k < needs_artificial.size(); ++k) {
      const auto row = needs_artificial[k];
      standard_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(artificial_begin_ + k)) = 1.0;
      basis_[row] = artificial_begin_ + k;
    }
    table_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(cols_ + 1));
    table_.leftCols(static_cast<Eigen::Index>(cols_)) = standard_;
    table_.col(static_cast<Eigen::Index>(cols_)) = rhs_;
    row_origin_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
      row_origin_[i] = i;
    }
  }

  std::size_t rows() const { return static_cast<std::size_t>(table_.rows()); }
  bool is_artificial(std::size_t col) const { return col >= artificial_begin_; }

  // Runs simplex iterations maximizing `cost` over the current basis.
  LpStatus optimize(const Eigen::VectorXd &cost, bool allow_artificial, std::size_t &iterations,
                    std::size_t max_iterations) {
    const auto rhs_col = static_cast<Eigen::Index>(cols_);
    while (true) {
      if (iterations >= max_iterations) {
        return LpStatus::iteration_limit;
      }
      Eigen::VectorXd cb(static_cast<Eigen::Index>(rows()));
      for (std::size_t i = 0; i < rows(); ++i) {
        cb(static_cast<Eigen::Index>(i)) = cost(static_cast<Eigen::Index>(basis_[i]));
      }
      const Eigen::RowVectorXd z = cb.transpose() * table_.leftCols(static_cast<Eigen::Index>(cols_));

      std::size_t entering = cols_;
      for (std::size_t j = 0; j < cols_; ++j) {
        if (!allow_artificial && is_artificial(j)) {
          continue;
        }
        if (cost(static_cast<Eigen::Index>(j)) - z(static_cast<Eigen::Index>(j)) > kReducedCostTol) {
          entering = j;
          break;
        }
      }
      if (entering == cols_) {
        return LpStatus::optimal;
      }

      const auto e = static_cast<Eigen::Index>(entering);
      std::size_t leaving = rows();
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double a = table_(r, e);
        if (a <= kPivotTol) {
          continue;
        }
        const double ratio = std::max(table_(r, rhs_col), 0.0) / a;
        if (ratio < best - kRatioTieTol ||
            (std::abs(ratio - best) <= kRatioTieTol && leaving < rows() && basis_[i] < basis_[leaving])) {
          best = std::min(best, ratio);
          leaving = i;
        }
      }
      if (leaving == rows()) {
        return LpStatus::unbounded;
      }
      pivot(leaving, entering);
      ++iterations;
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const auto r = static_cast<Eigen::Index>(row);
    const auto c = static_cast<Eigen::Index>(col);
    table_.row(r) /= table_(r, c);
    for (Eigen::Index i = 0; i < table_.rows(); ++i) {
      if (i != r) {
        const double f = table_(i, c);
        if (f != 0.0) {
          table_.row(i) -= f * table_.row(r);
        }
      }
    }
    basis_[row] = col;
  }

  double artificial_mass() const {
    double mass = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) {
      if (is_artificial(basis_[i])) {
        mass += std::abs(table_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols_)));
      }
    }
    return mass;
  }

  // After a feasible phase 1: pivot basic artificials out, dropping rows that
  // turn out to be linear combinations of others.
  void expel_artificials() {
    for (std::size_t i = 0; i < rows();) {
      if (!is_artificial(basis_[i])) {
        ++i;
        continue;
      }
      const auto r = static_cast<Eigen::Index>(i);
      table_(r, static_cast<Eigen::Index>(cols_)) = 0.0;
      std::size_t col = cols_;
      double best = 1e-9;
      for (std::size_t j = 0; j < artificial_begin_; ++j) {
        const double a = std::abs(table_(r, static_cast<Eigen::Index>(j)));
        if (a > best) {
          best = a;
          col = j;
        }
      }
      if (col != cols_) {
        pivot(i, col);
        ++i;
      } else {
        drop_row(i);
      }
    }
  }

  // Recomputes basic values from the original data, x_B = B⁻¹ b.
  Eigen::VectorXd solution() const {
    const auto m = static_cast<Eigen::Index>(rows());
    Eigen::MatrixXd B(m, m);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      B.col(i) = standard_rows().col(static_cast<Eigen::Index>(basis_[static_cast<std::size_t>(i)]));
      b(i) = rhs_(static_cast<Eigen::Index>(row_origin_[static_cast<std::size_t>(i)]));
    }
    Eigen::VectorXd xb = m > 0 ? Eigen::VectorXd(B.fullPivLu().solve(b)) : Eigen::VectorXd();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto col = basis_[static_cast<std::size_t>(i)];
      if (col < n_) {
        x(static_cast<Eigen::Index>(col)) = xb(i);
      }
    }
    return x;
  }

  // Dual multipliers in the caller's row orientation.
  void duals(const Eigen::VectorXd &cost, Eigen::VectorXd &eq, Eigen::VectorXd &ub) const {
    const auto m = static_cast<Eigen::Index>(rows());
    Eigen::MatrixXd B(m, m);
    Eigen::VectorXd cb(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto col = static_cast<Eigen::Index>(basis_[static_cast<std::size_t>(i)]);
      B.col(i) = standard_rows().col(col);
      cb(i) = cost(col);
    }
    Eigen::VectorXd y = m > 0 ? Eigen::VectorXd(B.transpose().fullPivLu().solve(cb)) : Eigen::VectorXd();
    eq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_eq_));
    ub = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_ub_));
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto origin = row_origin_[static_cast<std::size_t>(i)];
      const double v = sign_[origin] * y(i);
      if (origin < m_eq_) {
        eq(static_cast<Eigen::Index>(origin)) = v;
      } else {
        ub(static_cast<Eigen::Index>(origin - m_eq_)) = v;
      }
    }
  }

  std::size_t columns() const { return cols_; }

private:
  Eigen::MatrixXd standard_rows() const {
    Eigen::MatrixXd s(static_cast<Eigen::Index>(rows()), standard_.cols());
    for (std::size_t i = 0; i < rows(); ++i) {
      s.row(static_cast<Eigen::Index>(i)) = standard_.row(static_cast<Eigen::Index>(row_origin_[i]));
    }
    return s;
  }

  void drop_row(std::size_t row) {
    const auto m = table_.rows();
    const auto r = static_cast<Eigen::Index>(row);
    if (r + 1 < m) {
      table_.middleRows(r, m - r - 1) = table_.bottomRows(m - r - 1).eval();
    }
    table_.conservativeResize(m - 1, Eigen::NoChange);
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(row));
    row_origin_.erase(row_origin_.begin() + static_cast<std::ptrdiff_t>(row));
  }

  std::size_t n_;
  std::size_t m_eq_;
  std::size_t m_ub_;
  std::size_t artificial_begin_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> sign_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> row_origin_;
  Eigen::MatrixXd standard_;
  Eigen::VectorXd rhs_;
  Eigen::MatrixXd table_;
};

double max_or_zero(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : std::max(0.0, v.maxCoeff()); }

} // namespace

const char *to_string(LpStatus status) {
  switch (status) {
  case LpStatus::optimal:
    return "optimal";
  case LpStatus::infeasible:
    return "infeasible";
  case LpStatus::unbounded:
    return "unbounded";
  case LpStatus::iteration_limit:
    return "iteration_limit";
  case LpStatus::numerical_failure:
    return "numerical_failure";
  }
  return "unknown";
}

void LpProblem::validate() const {
  const auto n = objective.size();
  if (n == 0) {
    throw std::invalid_argument("LP has no variables");
  }
  if (eq_matrix.rows() != eq_rhs.size() || (eq_matrix.rows() > 0 && eq_matrix.cols() != n)) {
    throw std::invalid_argument("equality block has inconsistent dimensions");
  }
  if (ub_matrix.rows() != ub_rhs.size() || (ub_matrix.rows() > 0 && ub_matrix.cols() != n)) {
    throw std::invalid_argument("inequality block has inconsistent dimensions");
  }
  if (!variable_names.empty() && variable_names.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("variable_names must be empty or one per variable");
  }
  const bool finite = objective.allFinite() && eq_matrix.allFinite() && eq_rhs.allFinite() && ub_matrix.allFinite() &&
                      ub_rhs.allFinite();
  if (!finite) {
    throw std::invalid_argument("LP data must be finite");
  }
}

CertificateCheck check_certificate(const LpProblem &p, const LpSolution &s) {
  CertificateCheck check{0.0, 0.0, 0.0};
  if (p.eq_rhs.size() > 0) {
    check.primal_residual = (p.eq_matrix * s.x - p.eq_rhs).cwiseAbs().maxCoeff();
  }
  if (p.ub_rhs.size() > 0) {
    check.primal_residual = std::max(check.primal_residual, max_or_zero(p.ub_matrix * s.x - p.ub_rhs));
  }
  check.primal_residual = std::max(check.primal_residual, max_or_zero(-s.x));

  Eigen::VectorXd reduced = -p.objective;
  if (p.eq_rhs.size() > 0) {
    reduced += p.eq_matrix.transpose() * s.eq_duals;
  }
  if (p.ub_rhs.size() > 0) {
    reduced += p.ub_matrix.transpose() * s.ub_duals;
    check.dual_residual = max_or_zero(-s.ub_duals);
  }
  check.dual_residual = std::max(check.dual_residual, max_or_zero(-reduced));

  double dual_objective = 0.0;
  if (p.eq_rhs.size() > 0) {
    dual_objective += p.eq_rhs.dot(s.eq_duals);
  }
  if (p.ub_rhs.size() > 0) {
    dual_objective += p.ub_rhs.dot(s.ub_duals);
  }
  check.duality_gap = std::abs(dual_objective - p.objective.dot(s.x));
  return check;
}

LpSolution solve_lp(const LpProblem &problem, const SolverOptions &options) {
  problem.validate();
  Tableau tableau(problem);
  LpSolution out;
  const auto cols = static_cast<Eigen::Index>(tableau.columns());

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    if (tableau.is_artificial(static_cast<std::size_t>(j))) {
      phase1(j) = -1.0;
    }
  }
  auto status = tableau.optimize(phase1, true, out.iterations, options.max_iterations);
  if (status == LpStatus::iteration_limit) {
    out.status = status;
    return out;
  }
  if (tableau.artificial_mass() > options.tolerance) {
    out.status = LpStatus::infeasible;
    return out;
  }
  tableau.expel_artificials();

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
  phase2.head(problem.objective.size()) = problem.objective;
  status = tableau.optimize(phase2, false, out.iterations, options.max_iterations);
  if (status != LpStatus::optimal) {
    out.status = status;
    return out;
  }

  out.x = tableau.solution();
  for (Eigen::Index j = 0; j < out.x.size(); ++j) {
    // Roundoff below zero on degenerate basics.
    if (out.x(j) < 0.0 && out.x(j) > -options.tolerance) {
      out.x(j) = 0.0;
    }
  }
  tableau.duals(phase2, out.eq_duals, out.ub_duals);
  out.optimum = problem.objective.dot(out.x);

  const auto check = check_certificate(problem, out);
  out.primal_residual = check.primal_residual;
  out.dual_residual = check.dual_residual;
  out.duality_gap = check.duality_gap;
  out.status = check.ok(options.tolerance) ? LpStatus::optimal : LpStatus::numerical_failure;
  return out;
}

} // namespace ontic_nogo::optimize
