#pragma once

#include <stdexcept>
#include <string>

namespace qmotion {

// Base for every failure raised by the numerical kernels and models.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoSignChange : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InvalidRange : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Adaptive stepper needed a step below machine scale; carries the last accepted state.
class StepUnderflow : public NumericalError {
 public:
  StepUnderflow(const std::string& what, double t, double x)
      : NumericalError(what), t_(t), x_(x) {}
  double t() const { return t_; }
  double x() const { return x_; }

 private:
  double t_;
  double x_;
};

class DegenerateK : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GridTooCoarse : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The requested quantile does not exist because the total norm F(t) is <= P.
class NormBelowP : public NumericalError {
 public:
  NormBelowP(const std::string& what, double t) : NumericalError(what), t_(t) {}
  double t() const { return t_; }

 private:
  double t_;
};

class VelocitySingular : public NumericalError {
 public:
  VelocitySingular(const std::string& what, double t, double x)
      : NumericalError(what), t_(t), x_(x) {}
  double t() const { return t_; }
  double x() const { return x_; }

 private:
  double t_;
  double x_;
};

}  // namespace qmotion
