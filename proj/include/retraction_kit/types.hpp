#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace rkit {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

//! Numerical thresholds shared by every module.
//!
//! `rank_rel` is relative to the largest singular value of the matrix under
//! test; the other two are absolute.
struct Tolerances {
  static constexpr double rank_rel = 1e-10;
  static constexpr double manifold = 1e-9;
  static constexpr double tangent = 1e-8;
};

enum class ErrorCode {
  InvalidArgument,
  RankDeficient,
  Singular,
  ProjectionFailed,
  InsufficientData,
  ConfigError,
  ExperimentError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::ProjectionFailed: return "ProjectionFailed";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ExperimentError: return "ExperimentError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rkit
