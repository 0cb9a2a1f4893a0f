#pragma once

#include <stdexcept>
#include <string>

namespace kinobs {

/// Runtime failure inside a time integrator.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Requested time step exceeds the stability bound of the scheme.
class CflViolation : public SolverError {
public:
    CflViolation(double dt, double dt_max)
        : SolverError("time step " + std::to_string(dt) + " exceeds CFL bound " +
                      std::to_string(dt_max)),
          dt_(dt), dt_max_(dt_max) {}

    double dt() const { return dt_; }
    double dt_max() const { return dt_max_; }

private:
    double dt_;
    double dt_max_;
};

}  // namespace kinobs
