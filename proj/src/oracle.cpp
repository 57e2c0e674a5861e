#include "otkit/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "otkit/sinkhorn.hpp"

namespace otkit {

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

constexpr double kReducedCostTol = 1e-11;
constexpr double kPivotTol = 1e-9;
constexpr double kRatioTieTol = 1e-13;
constexpr long kRefactorEvery = 40;

// Revised simplex over the columns of `a`, with an explicit basis inverse.
class RevisedSimplex {
 public:
  RevisedSimplex(Matrix a, Vector b, std::vector<Eigen::Index> basis)
      : a_(std::move(a)), b_(std::move(b)), basis_(std::move(basis)) {
    refactor();
  }

  enum class Outcome { optimal, unbounded };

  Outcome run(const Vector& cost, const std::vector<bool>& allowed) {
    for (;;) {
      if (since_refactor_ >= kRefactorEvery) refactor();
      const Vector y = duals(cost);
      std::vector<bool> in_basis(static_cast<std::size_t>(a_.cols()), false);
      for (auto k : basis_) in_basis[static_cast<std::size_t>(k)] = true;

      // Bland: lowest-index improving column.
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < a_.cols(); ++j) {
        const auto ju = static_cast<std::size_t>(j);
        if (!allowed[ju] || in_basis[ju]) continue;
        if (cost[j] - y.dot(a_.col(j)) < -kReducedCostTol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return Outcome::optimal;

      const Vector d = binv_ * a_.col(entering);
      const Vector xb = basic_values();
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < d.size(); ++i) {
        if (d[i] <= kPivotTol) continue;
        const double ratio = std::max(xb[i], 0.0) / d[i];
        if (ratio < best - kRatioTieTol ||
            (std::abs(ratio - best) <= kRatioTieTol && basis_[static_cast<std::size_t>(i)] <
                                                           basis_[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return Outcome::unbounded;
      pivot(leave, entering, d);
    }
  }

  void pivot(Eigen::Index row, Eigen::Index entering, const Vector& d) {
    binv_.row(row) /= d[row];
    for (Eigen::Index i = 0; i < binv_.rows(); ++i) {
      if (i != row && d[i] != 0.0) binv_.row(i) -= d[i] * binv_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = entering;
    ++pivots_;
    ++since_refactor_;
  }

  void refactor() {
    const Eigen::Index m = a_.rows();
    Matrix basis_matrix(m, m);
    for (Eigen::Index i = 0; i < m; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Matrix> lu(basis_matrix);
    if (!lu.isInvertible()) throw NumericalError("simplex: singular basis");
    binv_ = lu.inverse();
    since_refactor_ = 0;
  }

  Vector basic_values() const { return binv_ * b_; }

  Vector duals(const Vector& cost) const {
    Vector cb(static_cast<Eigen::Index>(basis_.size()));
    for (std::size_t i = 0; i < basis_.size(); ++i) cb[static_cast<Eigen::Index>(i)] = cost[basis_[i]];
    return binv_.transpose() * cb;
  }

  // Removes the given rows (and the basis positions that sat on them).
  void drop_rows(const std::vector<Eigen::Index>& rows) {
    if (rows.empty()) return;
    std::vector<bool> drop(static_cast<std::size_t>(a_.rows()), false);
    for (auto r : rows) drop[static_cast<std::size_t>(r)] = true;
    const Eigen::Index kept = a_.rows() - static_cast<Eigen::Index>(rows.size());
    Matrix a(kept, a_.cols());
    Vector b(kept);
    std::vector<Eigen::Index> basis;
    Eigen::Index out = 0;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      if (drop[static_cast<std::size_t>(i)]) continue;
      a.row(out) = a_.row(i);
      b[out] = b_[i];
      basis.push_back(basis_[static_cast<std::size_t>(i)]);
      ++out;
    }
    a_ = std::move(a);
    b_ = std::move(b);
    basis_ = std::move(basis);
    refactor();
  }

  const Matrix& a() const { return a_; }
  const Matrix& binv() const { return binv_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  long pivots() const { return pivots_; }

 private:
  Matrix a_;
  Vector b_;
  std::vector<Eigen::Index> basis_;
  Matrix binv_;
  long pivots_ = 0;
  long since_refactor_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
  const Eigen::Index rows = problem.A.rows();
  const Eigen::Index cols = problem.A.cols();
  require_same_size(problem.b.size(), rows, "LP right-hand side");
  require_same_size(problem.c.size(), cols, "LP cost");

  // Nonnegative right-hand side, then one artificial per row.
  Vector sign = Vector::Ones(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (problem.b[i] < 0.0) sign[i] = -1.0;
  }
  Matrix work(rows, cols + rows);
  work.leftCols(cols) = sign.asDiagonal() * problem.A;
  work.rightCols(rows) = Matrix::Identity(rows, rows);
  const Vector rhs = sign.cwiseProduct(problem.b);

  std::vector<Eigen::Index> basis;
  for (Eigen::Index i = 0; i < rows; ++i) basis.push_back(cols + i);
  RevisedSimplex simplex(work, rhs, basis);

  Vector phase_one_cost = Vector::Zero(cols + rows);
  phase_one_cost.tail(rows).setOnes();
  std::vector<bool> allowed(static_cast<std::size_t>(cols + rows), true);
  simplex.run(phase_one_cost, allowed);

  LpSolution sol;
  const double infeasibility = phase_one_cost.dot([&] {
    Vector x = Vector::Zero(cols + rows);
    const Vector xb = simplex.basic_values();
    for (std::size_t i = 0; i < simplex.basis().size(); ++i) x[simplex.basis()[i]] = xb[static_cast<Eigen::Index>(i)];
    return x;
  }());
  if (infeasibility > 1e-9) {
    sol.status = LpStatus::infeasible;
    sol.pivots = simplex.pivots();
    return sol;
  }

  // Pivot zero-level artificials out; rows where that is impossible are redundant.
  std::vector<Eigen::Index> original_row;  // position -> original row index
  for (Eigen::Index i = 0; i < rows; ++i) original_row.push_back(i);
  std::vector<Eigen::Index> redundant;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(simplex.basis().size()); ++i) {
    if (simplex.basis()[static_cast<std::size_t>(i)] < cols) continue;
    const Vector row_coeffs = simplex.binv().row(i) * simplex.a().leftCols(cols);
    Eigen::Index pick = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (std::abs(row_coeffs[j]) > kPivotTol) {
        bool basic = false;
        for (auto k : simplex.basis()) basic = basic || k == j;
        if (!basic) {
          pick = j;
          break;
        }
      }
    }
    if (pick >= 0) {
      simplex.pivot(i, pick, simplex.binv() * simplex.a().col(pick));
    } else {
      redundant.push_back(i);
    }
  }
  std::vector<Eigen::Index> kept_rows;
  {
    std::vector<bool> drop(static_cast<std::size_t>(rows), false);
    for (auto r : redundant) drop[static_cast<std::size_t>(r)] = true;
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (!drop[static_cast<std::size_t>(i)]) kept_rows.push_back(i);
    }
  }
  simplex.drop_rows(redundant);

  Vector phase_two_cost = Vector::Zero(cols + rows);
  phase_two_cost.head(cols) = problem.c;
  for (Eigen::Index j = cols; j < cols + rows; ++j) allowed[static_cast<std::size_t>(j)] = false;
  const auto outcome = simplex.run(phase_two_cost, allowed);
  sol.pivots = simplex.pivots();
  if (outcome == RevisedSimplex::Outcome::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.primal = Vector::Zero(cols);
  const Vector xb = simplex.basic_values();
  for (std::size_t i = 0; i < simplex.basis().size(); ++i) {
    const Eigen::Index k = simplex.basis()[i];
    if (k < cols) sol.primal[k] = std::max(xb[static_cast<Eigen::Index>(i)], 0.0);
  }
  const Vector y_kept = simplex.duals(phase_two_cost);
  sol.dual = Vector::Zero(rows);
  for (std::size_t i = 0; i < kept_rows.size(); ++i) {
    const Eigen::Index r = kept_rows[i];
    sol.dual[r] = sign[r] * y_kept[static_cast<Eigen::Index>(i)];
  }
  sol.reduced_costs = problem.c - problem.A.transpose() * sol.dual;
  sol.objective = problem.c.dot(sol.primal);
  return sol;
}

OtLpResult exact_ot_lp(const CostMatrix& cost, const DiscreteMeasure& p, const DiscreteMeasure& q) {
  const Eigen::Index n = cost.size();
  require_same_size(p.size(), n, "exact_ot_lp source");
  require_same_size(q.size(), n, "exact_ot_lp target");
  if (n > 32) throw InputError("exact_ot_lp: n = " + std::to_string(n) + " exceeds the dense simplex limit of 32");

  // Variable (i, j) sits at i + j n. The last column constraint is implied by
  // the others and dropped.
  const Eigen::Index vars = n * n;
  LpProblem lp;
  lp.A = Matrix::Zero(2 * n - 1, vars);
  lp.b = Vector(2 * n - 1);
  lp.c = Eigen::Map<const Vector>(cost.entries().data(), vars);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) lp.A(i, i + j * n) = 1.0;
    lp.b[i] = p[i];
  }
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) lp.A(n + j, i + j * n) = 1.0;
    lp.b[n + j] = q[j];
  }

  OtLpResult out;
  out.lp = solve_lp(lp);
  if (out.lp.status != LpStatus::optimal) {
    throw NumericalError(std::string("exact_ot_lp: LP is ") + to_string(out.lp.status));
  }
  out.plan = Eigen::Map<const Matrix>(out.lp.primal.data(), n, n);
  out.objective = out.lp.objective;
  return out;
}

BarycenterLpResult exact_barycenter_lp(const std::vector<DiscreteMeasure>& measures,
                                       const CostMatrix& cost) {
  if (measures.empty()) throw InputError("exact_barycenter_lp needs at least one measure");
  const Eigen::Index n = cost.size();
  const auto m = static_cast<Eigen::Index>(measures.size());
  for (const auto& p : measures) require_same_size(p.size(), n, "exact_barycenter_lp measure");
  const Eigen::Index vars = m * n * n + n;
  if (vars > 400) {
    throw InputError("exact_barycenter_lp: " + std::to_string(vars) + " variables exceed the limit of 400");
  }

  // Layout: plan l occupies [l n^2, (l+1) n^2), entry (i, j) at offset i + j n; q last.
  LpProblem lp;
  lp.A = Matrix::Zero(2 * m * n, vars);
  lp.b = Vector::Zero(2 * m * n);
  lp.c = Vector::Zero(vars);
  const Eigen::Index q_off = m * n * n;
  for (Eigen::Index l = 0; l < m; ++l) {
    const Eigen::Index off = l * n * n;
    lp.c.segment(off, n * n) = Eigen::Map<const Vector>(cost.entries().data(), n * n) / static_cast<double>(m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        lp.A(l * n + i, off + i + j * n) = 1.0;            // row sums = p_l
        lp.A(m * n + l * n + j, off + i + j * n) = 1.0;    // column sums = q
      }
      lp.b[l * n + i] = measures[static_cast<std::size_t>(l)][i];
    }
    for (Eigen::Index j = 0; j < n; ++j) lp.A(m * n + l * n + j, q_off + j) = -1.0;
  }

  BarycenterLpResult out;
  out.lp = solve_lp(lp);
  if (out.lp.status != LpStatus::optimal) {
    throw NumericalError(std::string("exact_barycenter_lp: LP is ") + to_string(out.lp.status));
  }
  out.objective = out.lp.objective;
  out.q = out.lp.primal.tail(n);
  for (Eigen::Index l = 0; l < m; ++l) {
    out.plans.push_back(Eigen::Map<const Matrix>(out.lp.primal.data() + l * n * n, n, n));
  }
  return out;
}

GridResult regularized_wb_grid(const std::vector<DiscreteMeasure>& measures, const CostMatrix& cost,
                               double gamma, double grid_step) {
  const Eigen::Index n = cost.size();
  if (n > 3) throw InputError("regularized_wb_grid supports n <= 3 only");
  if (measures.empty()) throw InputError("regularized_wb_grid needs at least one measure");
  if (!(grid_step > 0.0 && grid_step < 1.0)) throw ParameterError("grid_step must lie in (0, 1)");
  const long ticks = std::lround(1.0 / grid_step);
  if (std::abs(static_cast<double>(ticks) * grid_step - 1.0) > 1e-9) {
    throw ParameterError("1 / grid_step must be an integer");
  }

  GridResult best;
  best.objective = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& weights) {
    const DiscreteMeasure q(weights);
    double total = 0.0;
    for (const auto& p : measures) total += regularized_ot_value(cost, gamma, p, q);
    total /= static_cast<double>(measures.size());
    ++best.evaluated;
    if (total < best.objective) {
      best.objective = total;
      best.q = q.weights();
    }
  };

  const double s = 1.0 / static_cast<double>(ticks);
  if (n == 1) {
    consider(Vector::Ones(1));
  } else if (n == 2) {
    for (long a = 1; a < ticks; ++a) {
      Vector w(2);
      w << a * s, (ticks - a) * s;
      consider(w);
    }
  } else {
    for (long a = 1; a < ticks; ++a) {
      for (long b = 1; a + b < ticks; ++b) {
        Vector w(3);
        w << a * s, b * s, (ticks - a - b) * s;
        consider(w);
      }
    }
  }
  if (best.evaluated == 0) throw ParameterError("grid_step leaves no interior grid point");
  return best;
}

}  // namespace otkit
