#pragma once

#include <cmath>
#include <functional>

#include "otkit/core.hpp"

namespace otkit::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

inline DiscreteMeasure measure(std::initializer_list<double> xs) { return DiscreteMeasure(vec(xs)); }

// p = (0.3, 0.7), q = (0.6, 0.4), swap cost 1. The LP optimum is 0.3.
struct TwoByTwo {
  CostMatrix cost{mat({{0, 1}, {1, 0}})};
  DiscreteMeasure p = measure({0.3, 0.7});
  DiscreteMeasure q = measure({0.6, 0.4});
};

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Central differences with step 1e-6 (1 + |x_k|).
inline Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = 1e-6 * (1.0 + std::abs(x[k]));
    Vector lo = x;
    Vector hi = x;
    lo[k] -= h;
    hi[k] += h;
    g[k] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace otkit::testing
