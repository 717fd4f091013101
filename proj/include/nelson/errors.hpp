#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nelson {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidPotentialError : public Error {
 public:
  using Error::Error;
};

class InvalidGridError : public Error {
 public:
  using Error::Error;
};

// Iterative solver ran out of budget. Carries the best residual seen and the
// residual after every restart.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual,
                   std::vector<double> history = {})
      : Error(what), best_residual_(best_residual), history_(std::move(history)) {}
  double best_residual() const noexcept { return best_residual_; }
  const std::vector<double>& history() const noexcept { return history_; }

 private:
  double best_residual_;
  std::vector<double> history_;
};

class ClassViolationError : public Error {
 public:
  ClassViolationError(const std::string& what, std::size_t worst_node)
      : Error(what), worst_node_(worst_node) {}
  std::size_t worst_node() const noexcept { return worst_node_; }

 private:
  std::size_t worst_node_;
};

class OverflowError : public Error {
 public:
  using Error::Error;
};

class CutoffOrderError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::size_t dim) : Error(what), dim_(dim) {}
  std::size_t dim() const noexcept { return dim_; }

 private:
  std::size_t dim_;
};

class ProvenanceError : public Error {
 public:
  using Error::Error;
};

// Raised by the shifted solver when it meets a direction with non-positive
// curvature, i.e. H - E + shift is not positive definite.
class ShiftTooSmallError : public Error {
 public:
  ShiftTooSmallError(const std::string& what, double rayleigh_quotient)
      : Error(what), rayleigh_quotient_(rayleigh_quotient) {}
  double rayleigh_quotient() const noexcept { return rayleigh_quotient_; }

 private:
  double rayleigh_quotient_;
};

class DiagnosticsError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double margin) : Error(what), margin_(margin) {}
  double margin() const noexcept { return margin_; }

 private:
  double margin_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field_path, const std::string& message)
      : Error(field_path + ": " + message), field_path_(field_path) {}
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

}  // namespace nelson
