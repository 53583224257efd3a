#pragma once

#include <stdexcept>
#include <string>

namespace chfv {

/// Invalid configuration, file format, or parameter set. CLI exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Mesh construction or admissibility failure. CLI exit code 2.
struct MeshError : std::runtime_error {
    explicit MeshError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Nonlinear or linear solver breakdown. CLI exit code 3.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace chfv
