#pragma once

#include <stdexcept>
#include <string>

namespace pstar {

/// A bracketed solve failed to converge or a bracket could not be established.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

/// The requested point is too close to the critical point for the solve to be
/// well conditioned.
struct near_critical_error : std::runtime_error {
    explicit near_critical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A density window contains no lattice points (or no reachable ones).
struct empty_window_error : std::runtime_error {
    explicit empty_window_error(const std::string& what) : std::runtime_error(what) {}
};

/// A computation would exceed the configured memory budget.
struct resource_error : std::runtime_error {
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pstar
