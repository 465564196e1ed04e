#pragma once

#include <stdexcept>
#include <string>

namespace bife {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shape disagreement between two inputs. `axis` names the offending axis
/// ("units", "periods", "regressors", "factors").
class DimensionError : public Error {
 public:
  DimensionError(std::string axis, const std::string& what)
      : Error(what), axis_(std::move(axis)) {}
  const std::string& axis() const noexcept { return axis_; }

 private:
  std::string axis_;
};

/// A likelihood or derived quantity became non-finite. Carries the cell.
class NumericalError : public Error {
 public:
  NumericalError(int unit, int period, const std::string& what)
      : Error(what), unit_(unit), period_(period) {}
  int unit() const noexcept { return unit_; }
  int period() const noexcept { return period_; }

 private:
  int unit_;
  int period_;
};

/// Malformed or inconsistent input data (CSV rows, labels, responses).
class DataError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

}  // namespace bife
