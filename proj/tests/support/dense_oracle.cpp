#include "support/dense_oracle.hpp"

namespace oracle {

namespace {

std::vector<double> full_convolve(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> out(x.size() + y.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
  }
  return out;
}

}  // namespace

Eigen::MatrixXd transition_matrix(const std::vector<double>& pA, const std::vector<double>& pB,
                                  std::size_t N) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(N + 1, N + 1);
  std::vector<double> row = pA;
  for (std::size_t i = 0; i <= N; ++i) {
    for (std::size_t j = 0; j <= N && j < row.size(); ++j) P(i, j) = row[j];
    row = full_convolve(row, pB);
  }
  return P;
}

std::vector<double> dense_stationary(const std::vector<double>& pA, const std::vector<double>& pB,
                                     std::size_t N) {
  const Eigen::MatrixXd P = transition_matrix(pA, pB, N);
  const auto n = static_cast<Eigen::Index>(N + 1);
  Eigen::MatrixXd M = (Eigen::MatrixXd::Identity(n, n) - P).transpose();
  M.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;
  const Eigen::VectorXd pi = M.fullPivLu().solve(rhs);
  return {pi.data(), pi.data() + n};
}

std::vector<double> dense_power_iteration(const std::vector<double>& pA,
                                          const std::vector<double>& pB, std::size_t N,
                                          std::size_t steps) {
  const Eigen::MatrixXd P = transition_matrix(pA, pB, N);
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(N + 1));
  pi(0) = 1.0;
  for (std::size_t s = 0; s < steps; ++s) pi = pi * P;
  return {pi.data(), pi.data() + pi.size()};
}

}  // namespace oracle
