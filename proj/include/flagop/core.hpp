#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace flagop {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.1.0";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A generated weight that is zero, negative or not finite.
class WeightError : public Error {
 public:
  WeightError(Index index, double value);
  Index index() const { return index_; }
  double value() const { return value_; }

 private:
  Index index_;
  double value_;
};

class SizeCapError : public Error {
 public:
  SizeCapError(Index requested, Index cap);
  Index requested() const { return requested_; }
  Index cap() const { return cap_; }

 private:
  Index requested_;
  Index cap_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

}  // namespace flagop
