#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lpk {

using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double four_pi = 4.0 * std::numbers::pi;

/// Failure categories surfaced to callers and mapped to CLI exit codes.
enum class ErrorKind {
    invalid_argument,
    not_kato_class,
    truncation_failed,
    diagonal_singularity,
    grid_refinement,
    near_resonance,
    budget_exceeded,
    regime,
    invariant_violation,
    not_found,
    config,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

const char* to_string(ErrorKind kind) noexcept;

/// <t> = sqrt(1 + t^2)
inline double japanese(double t) { return std::sqrt(1.0 + t * t); }

} // namespace lpk
