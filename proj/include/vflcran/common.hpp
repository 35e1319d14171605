/*
 * Copyright 2026 The vflcran Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef VFLCRAN_COMMON_HPP_
#define VFLCRAN_COMMON_HPP_

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vflcran {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

enum class ErrorCode {
  kInvalidArgument = 1,
  kDimensionMismatch,
  kDegenerate,       // zero-forcing singular, constant block, non-PD input
  kInfeasible,
  kNumerical,        // solver failed to converge
  kConfig,
  kIo,
  kDataset,
};

// All library failures are reported as vflcran::Error; the C API maps the
// code onto vfl_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void Require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

// Deterministic 64-bit seed for a (master, a, b, c) tuple.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace vflcran

#endif  // VFLCRAN_COMMON_HPP_
