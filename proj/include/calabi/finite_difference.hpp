#ifndef CALABI_FINITE_DIFFERENCE_HPP
#define CALABI_FINITE_DIFFERENCE_HPP

#include <Eigen/Dense>

namespace calabi::fd {

/// Central-difference Jacobian of a vector field; column j is d/dq_j.
template <class Field>
Eigen::MatrixXd jacobian(Field&& field, const Eigen::VectorXd& q, double h) {
  const Eigen::Index dim = q.size();
  Eigen::MatrixXd J;
  Eigen::VectorXd plus = q, minus = q;
  for (Eigen::Index j = 0; j < dim; ++j) {
    plus(j) = q(j) + h;
    minus(j) = q(j) - h;
    const Eigen::VectorXd column = (field(plus) - field(minus)) / (2.0 * h);
    if (j == 0) J.resize(column.size(), dim);
    J.col(j) = column;
    plus(j) = q(j);
    minus(j) = q(j);
  }
  return J;
}

/// Central second-difference Hessian of a scalar function. Diagonal entries
/// use the three-point stencil, mixed entries the four-corner stencil.
template <class Scalar>
Eigen::MatrixXd hessian(Scalar&& fn, const Eigen::VectorXd& q, double h) {
  const Eigen::Index dim = q.size();
  Eigen::MatrixXd out(dim, dim);
  const double center = fn(q);
  Eigen::VectorXd p = q;
  for (Eigen::Index i = 0; i < dim; ++i) {
    p(i) = q(i) + h;
    const double fp = fn(p);
    p(i) = q(i) - h;
    const double fm = fn(p);
    p(i) = q(i);
    out(i, i) = (fp - 2.0 * center + fm) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      auto corner = [&](double si, double sj) {
        p(i) = q(i) + si * h;
        p(j) = q(j) + sj * h;
        const double v = fn(p);
        p(i) = q(i);
        p(j) = q(j);
        return v;
      };
      const double mixed = (corner(1, 1) - corner(1, -1) - corner(-1, 1) +
                            corner(-1, -1)) /
                           (4.0 * h * h);
      out(i, j) = mixed;
      out(j, i) = mixed;
    }
  }
  return out;
}

}  // namespace calabi::fd

#endif  // CALABI_FINITE_DIFFERENCE_HPP
