#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace juice {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Sorted, duplicate-free list of user indices.
using IndexSet = std::vector<int>;

/// Per-user M x M channel covariance matrices, indexed by user.
struct CovarianceSet {
  std::vector<CMatrix> matrices;

  int num_users() const { return static_cast<int>(matrices.size()); }
  int num_antennas() const {
    return matrices.empty() ? 0 : static_cast<int>(matrices.front().rows());
  }
};

}  // namespace juice
