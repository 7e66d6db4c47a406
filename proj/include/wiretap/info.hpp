#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace wiretap {

// -p log2 p with the 0 log 0 = 0 convention.
template <typename Scalar>
Scalar neg_xlog2x(Scalar p) {
  using std::log2;
  return p > Scalar(0) ? -p * log2(p) : Scalar(0);
}

template <typename Derived>
typename Derived::Scalar entropy(const Eigen::DenseBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h(0);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j) h += neg_xlog2x(p(i, j));
  return h;
}

// For a joint table with rows indexed by A and columns by B.
template <typename Derived>
typename Derived::Scalar conditional_entropy_rows_given_cols(const Eigen::MatrixBase<Derived>& joint) {
  return entropy(joint) - entropy(joint.colwise().sum());
}

template <typename Derived>
typename Derived::Scalar mutual_information(const Eigen::MatrixBase<Derived>& joint) {
  return entropy(joint.rowwise().sum()) + entropy(joint.colwise().sum()) - entropy(joint);
}

}  // namespace wiretap
