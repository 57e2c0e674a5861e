#include "otkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace otkit {

DiscreteMeasure::DiscreteMeasure(Vector weights) : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw DomainError("measure must have at least one entry");
  if (!weights_.allFinite()) throw DomainError("measure entries must be finite");
  if ((weights_.array() < 0.0).any()) throw DomainError("measure entries must be nonnegative");
  const double total = weights_.sum();
  if (!(total > 0.0)) throw DomainError("measure has zero total mass");
  weights_ /= total;
}

DiscreteMeasure DiscreteMeasure::uniform(Eigen::Index n) {
  return DiscreteMeasure(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

CostMatrix::CostMatrix(Matrix entries, bool allow_asymmetric) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols()) {
    throw InputError("cost matrix must be square, got " + std::to_string(entries_.rows()) + "x" +
                     std::to_string(entries_.cols()));
  }
  if (entries_.size() == 0) throw InputError("cost matrix is empty");
  if (!entries_.allFinite()) throw InputError("cost matrix entries must be finite");
  if ((entries_.array() < 0.0).any()) throw InputError("cost matrix entries must be nonnegative");
  if (!allow_asymmetric) {
    for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < entries_.cols(); ++j) {
        if (entries_(i, j) != entries_(j, i)) {
          throw InputError("cost matrix is not symmetric at (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
        }
      }
    }
  }
  inf_norm_ = entries_.maxCoeff();
}

void RegularizationParams::validate() const {
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(eps_prime > 0.0 && eps_prime < 2.0)) throw ParameterError("eps' must lie in (0, 2)");
}

void require_positive_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be positive");
}

void require_same_size(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

double logsumexp(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw DomainError("empty reduction");
  if (!weights.empty() && weights.size() != values.size()) {
    throw DimensionError("logsumexp: values and weights differ in length");
  }
  const double top = *std::max_element(values.begin(), values.end());
  if (top == -std::numeric_limits<double>::infinity()) return top;
  double acc = 0.0;
  if (weights.empty()) {
    for (double x : values) acc += std::exp(x - top);
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(weights[i] > 0.0)) throw DomainError("logsumexp weights must be positive");
      acc += weights[i] * std::exp(values[i] - top);
    }
  }
  return top + std::log(acc);
}

double logsumexp(const Vector& values) {
  return logsumexp(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

namespace {

void check_pot_shape(const Vector& u, const Vector& v, const CostMatrix& cost) {
  require_same_size(u.size(), cost.size(), "potential u");
  require_same_size(v.size(), cost.size(), "potential v");
}

}  // namespace

Vector log_row_sums(const Vector& u, const Vector& v, const CostMatrix& cost, double gamma) {
  require_positive_gamma(gamma);
  check_pot_shape(u, v, cost);
  const Eigen::Index n = cost.size();
  const Matrix& c = cost.entries();
  Vector out(n);
  Vector buf(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) buf[j] = v[j] - c(i, j) / gamma;
    out[i] = u[i] + logsumexp(buf);
  }
  return out;
}

Vector log_col_sums(const Vector& u, const Vector& v, const CostMatrix& cost, double gamma) {
  require_positive_gamma(gamma);
  check_pot_shape(u, v, cost);
  const Eigen::Index n = cost.size();
  const Matrix& c = cost.entries();
  Vector out(n);
  Vector buf(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) buf[i] = u[i] - c(i, j) / gamma;
    out[j] = v[j] + logsumexp(buf);
  }
  return out;
}

double log_total_mass(const Vector& u, const Vector& v, const CostMatrix& cost, double gamma) {
  return logsumexp(log_row_sums(u, v, cost, gamma));
}

Matrix scaling_matrix(const DualPotentials& pot, const CostMatrix& cost, double gamma) {
  require_positive_gamma(gamma);
  check_pot_shape(pot.u, pot.v, cost);
  const Eigen::Index n = cost.size();
  Matrix b(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      b(i, j) = std::exp(pot.u[i] + pot.v[j] - cost(i, j) / gamma);
    }
  }
  return b;
}

Matrix normalized_scaling_matrix(const DualPotentials& pot, const CostMatrix& cost, double gamma) {
  const double log_mass = log_total_mass(pot.u, pot.v, cost, gamma);
  const Eigen::Index n = cost.size();
  Matrix b(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      b(i, j) = std::exp(pot.u[i] + pot.v[j] - cost(i, j) / gamma - log_mass);
    }
  }
  return b;
}

double neg_entropy(const Matrix& plan) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < plan.size(); ++k) {
    const double x = plan.data()[k];
    if (x < 0.0) throw DomainError("neg_entropy: plan has a negative entry");
    if (x > 0.0) acc += x * std::log(x);
  }
  return acc;
}

double kl_divergence(const Matrix& a, const Matrix& b) {
  require_same_size(a.rows(), b.rows(), "kl_divergence rows");
  require_same_size(a.cols(), b.cols(), "kl_divergence cols");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double x = a.data()[k];
    const double y = b.data()[k];
    if (x < 0.0 || y < 0.0) throw DomainError("kl_divergence: negative entry");
    if (x > 0.0) {
      if (y == 0.0) throw DomainError("kl_divergence: reference is zero where argument is positive");
      acc += x * std::log(x / y);
    }
    acc += y - x;
  }
  return acc;
}

double marginal_violation(const Matrix& plan, const Vector& p, const Vector& q) {
  require_same_size(plan.rows(), p.size(), "marginal_violation rows");
  require_same_size(plan.cols(), q.size(), "marginal_violation cols");
  const Vector rows = plan.rowwise().sum();
  const Vector cols = plan.colwise().sum().transpose();
  return (rows - p).lpNorm<1>() + (cols - q).lpNorm<1>();
}

double marginal_violation(const Matrix& plan, const DiscreteMeasure& p, const DiscreteMeasure& q) {
  return marginal_violation(plan, p.weights(), q.weights());
}

double transport_cost(const Matrix& plan, const CostMatrix& cost) {
  require_same_size(plan.rows(), cost.size(), "transport_cost rows");
  require_same_size(plan.cols(), cost.size(), "transport_cost cols");
  return plan.cwiseProduct(cost.entries()).sum();
}

double regularized_cost(const Matrix& plan, const CostMatrix& cost, double gamma) {
  return transport_cost(plan, cost) + gamma * neg_entropy(plan);
}

DiscreteMeasure smooth_measure(const DiscreteMeasure& p, double eps_prime, double divisor) {
  if (!(eps_prime > 0.0 && eps_prime < 2.0)) throw ParameterError("eps' must lie in (0, 2)");
  const double n = static_cast<double>(p.size());
  const double shrink = 1.0 - eps_prime / divisor;
  Vector mixed = shrink * (p.weights().array() + eps_prime / (divisor * n)).matrix();
  // The affine formula sums to (1 - e/d)(1 + e/d); the constructor restores 1.
  return DiscreteMeasure(std::move(mixed));
}

std::pair<DiscreteMeasure, DiscreteMeasure> smooth_marginals(const DiscreteMeasure& p,
                                                             const DiscreteMeasure& q,
                                                             double eps_prime) {
  require_same_size(p.size(), q.size(), "smooth_marginals");
  return {smooth_measure(p, eps_prime, 8.0), smooth_measure(q, eps_prime, 8.0)};
}

}  // namespace otkit
