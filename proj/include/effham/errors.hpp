#pragma once

#include <stdexcept>
#include <string>

namespace effham {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative method did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last, double previous)
      : Error(what), last_(last), previous_(previous) {}
  double last() const { return last_; }
  double previous() const { return previous_; }

 private:
  double last_;
  double previous_;
};

/// Energy level too close to max V: the Maupertuis metric degenerates.
class DegenerateMetricError : public Error {
 public:
  DegenerateMetricError(const std::string& what, double margin) : Error(what), margin_(margin) {}
  double margin() const { return margin_; }

 private:
  double margin_;
};

}  // namespace effham
