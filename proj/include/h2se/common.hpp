#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>

namespace h2se {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

/// Raised when an operation is asked to do something that is well-formed but
/// not feasible under the configured resource caps (dense size, direct-solve
/// size). Callers that run grids of experiments record these and move on.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A square linear map given only through its action.
struct LinearOperator {
  Index size = 0;
  std::function<void(const Vector& in, Vector& out)> apply;

  Vector operator()(const Vector& in) const {
    Vector out(size);
    apply(in, out);
    return out;
  }
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw std::invalid_argument(message);
}

}  // namespace h2se
