#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <utility>

#include "otkit/errors.hpp"

namespace otkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point of the probability simplex. Construction rejects negative entries
/// and rescales the weights so that they sum to one.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(Vector weights);

  const Vector& weights() const noexcept { return weights_; }
  Eigen::Index size() const noexcept { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_[i]; }
  double min() const { return weights_.minCoeff(); }
  bool strictly_positive() const { return size() > 0 && min() > 0.0; }

  static DiscreteMeasure uniform(Eigen::Index n);

 private:
  Vector weights_;
};

/// Nonnegative square cost matrix with its cached max entry.
class CostMatrix {
 public:
  CostMatrix() = default;
  /// Throws InputError on negative entries, non-square shape, or (unless
  /// `allow_asymmetric`) any entry with C(i,j) != C(j,i).
  explicit CostMatrix(Matrix entries, bool allow_asymmetric = false);

  const Matrix& entries() const noexcept { return entries_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }
  double inf_norm() const noexcept { return inf_norm_; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }

 private:
  Matrix entries_;
  double inf_norm_ = 0.0;
};

/// Nonnegative coupling. `feasible_for` is populated by rounding, once the
/// marginals are known to match (p, q).
struct TransportPlan {
  Matrix entries;
  std::optional<std::pair<Vector, Vector>> feasible_for;

  Vector row_sums() const { return entries.rowwise().sum(); }
  Vector col_sums() const { return entries.colwise().sum().transpose(); }
};

/// Dual variables after the change of variables u = -y/gamma - 1/2.
struct DualPotentials {
  Vector u;
  Vector v;

  static DualPotentials zeros(Eigen::Index n) { return {Vector::Zero(n), Vector::Zero(n)}; }
  bool finite() const { return u.allFinite() && v.allFinite(); }
};

struct RegularizationParams {
  double gamma = 0.0;
  double eps = 0.0;
  double eps_prime = 0.0;

  /// Throws ParameterError unless gamma > 0, eps > 0 and eps' in (0, 2).
  void validate() const;
};

void require_positive_gamma(double gamma);
void require_same_size(Eigen::Index a, Eigen::Index b, const char* what);

/// log(sum_i w_i exp(x_i)), shifted by max(x). Empty input throws DomainError
/// ("empty reduction"); weights, when present, must be positive and match.
double logsumexp(std::span<const double> values, std::span<const double> weights = {});
double logsumexp(const Vector& values);

/// Row-wise log sums: out_i = logsumexp_j(u_i + v_j - C_ij / gamma).
Vector log_row_sums(const Vector& u, const Vector& v, const CostMatrix& cost, double gamma);
/// Column-wise log sums: out_j = logsumexp_i(u_i + v_j - C_ij / gamma).
Vector log_col_sums(const Vector& u, const Vector& v, const CostMatrix& cost, double gamma);
/// log(1^T B(u, v) 1).
double log_total_mass(const Vector& u, const Vector& v, const CostMatrix& cost, double gamma);

/// B(u,v)_ij = exp(u_i + v_j - C_ij / gamma).
Matrix scaling_matrix(const DualPotentials& pot, const CostMatrix& cost, double gamma);
/// B(u,v) / 1^T B(u,v) 1, evaluated without overflow.
Matrix normalized_scaling_matrix(const DualPotentials& pot, const CostMatrix& cost, double gamma);

/// <plan, ln plan> with 0 ln 0 = 0.
double neg_entropy(const Matrix& plan);
/// sum(a ln(a/b) - a + b). Requires b > 0 wherever a > 0.
double kl_divergence(const Matrix& a, const Matrix& b);
/// ||plan 1 - p||_1 + ||plan^T 1 - q||_1.
double marginal_violation(const Matrix& plan, const Vector& p, const Vector& q);
double marginal_violation(const Matrix& plan, const DiscreteMeasure& p, const DiscreteMeasure& q);
/// Frobenius inner product <C, plan>.
double transport_cost(const Matrix& plan, const CostMatrix& cost);
/// <C, plan> + gamma <plan, ln plan>.
double regularized_cost(const Matrix& plan, const CostMatrix& cost, double gamma);

/// Mixes a measure with the uniform one: (p + eps'/(divisor n)) / (1 + eps'/divisor).
/// This is the affine shrink (1 - eps'/d)(p + eps'/(d n) 1) rescaled back onto
/// the simplex; divisor 8 is the OT variant, 4 the barycenter variant.
DiscreteMeasure smooth_measure(const DiscreteMeasure& p, double eps_prime, double divisor);
std::pair<DiscreteMeasure, DiscreteMeasure> smooth_marginals(const DiscreteMeasure& p,
                                                             const DiscreteMeasure& q,
                                                             double eps_prime);

}  // namespace otkit
