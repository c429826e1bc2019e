#ifndef ATLAB_ERRORS_HPP
#define ATLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace atlab {

/// An iterative solver exhausted its budget. Carries the last residual.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace atlab

#endif  // ATLAB_ERRORS_HPP
