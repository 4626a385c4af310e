#pragma once

#include <stdexcept>
#include <string>

namespace flatflow {

// Geometry that fails a structural requirement (self-intersection,
// non-convex anisotropy parameters, bad snapshot data).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A point-query outside the tubular neighborhood where projection is defined.
struct OutOfTubeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mass discrepancy with nonzero mean: the pseudo-H^-1 distance is infinite.
struct InfiniteDistanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Triangulation could not produce a conforming mesh (clearance, tangency).
struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Linear or nonlinear solver failed to reach its contract.
struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Incremental minimization could not complete (lift breakdown etc.).
struct StepFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Optimizer stalled above tolerance; carries the best objective reached.
struct NonConvergence : std::runtime_error {
    NonConvergence(const std::string& msg, double best_value)
        : std::runtime_error(msg), best(best_value) {}
    double best;
};

// Fixed-point backend diverged; the minimize backend should be used instead.
struct BackendFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace flatflow
