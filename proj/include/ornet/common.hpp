// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ornet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Error taxonomy shared across modules. All inherit from std::runtime_error
// so callers can catch coarsely; the CLI maps them to exit codes.
struct DimensionError : std::runtime_error {
  explicit DimensionError(const std::string& m) : std::runtime_error("dimension error: " + m) {}
};
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& m) : std::runtime_error("domain error: " + m) {}
};
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& m) : std::runtime_error("numerical error: " + m) {}
};
struct IndexError : std::runtime_error {
  explicit IndexError(const std::string& m) : std::runtime_error("index error: " + m) {}
};
struct StabilityError : std::runtime_error {
  explicit StabilityError(const std::string& m) : std::runtime_error("stability error: " + m) {}
};
struct StepSizeError : std::runtime_error {
  explicit StepSizeError(const std::string& m) : std::runtime_error("step size error: " + m) {}
};
struct EmptySetError : std::runtime_error {
  explicit EmptySetError(const std::string& m) : std::runtime_error("empty set: " + m) {}
};
struct ReconstructionError : std::runtime_error {
  explicit ReconstructionError(const std::string& m) : std::runtime_error("reconstruction error: " + m) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error("io error: " + m) {}
};

inline void require(bool cond, const char* what) {
  if (!cond) throw DomainError(what);
}

inline bool all_finite(const Eigen::Ref<const Mat>& m) { return m.allFinite(); }

// Spectral (operator 2-) norm via SVD; small dense matrices only.
double operator_norm(const Mat& a);

}  // namespace ornet
