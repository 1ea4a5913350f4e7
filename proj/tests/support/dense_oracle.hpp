#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

/// Row i holds P(A + B_1 + ... + B_i = j) for j <= N, built by full
/// enumeration of the i-fold convolution without truncating intermediates.
Eigen::MatrixXd transition_matrix(const std::vector<double>& pA, const std::vector<double>& pB,
                                  std::size_t N);

/// Stationary vector of the truncated chain: solves pi (I - P) = 0 with
/// sum(pi) = 1 by a dense LU factorization.
std::vector<double> dense_stationary(const std::vector<double>& pA, const std::vector<double>& pB,
                                     std::size_t N);

/// Power iteration pi_{n+1} = pi_n P from the point mass at 0.
std::vector<double> dense_power_iteration(const std::vector<double>& pA,
                                          const std::vector<double>& pB, std::size_t N,
                                          std::size_t steps);

}  // namespace oracle
