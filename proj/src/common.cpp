#include "lpk/common.hpp"

namespace lpk {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::not_kato_class: return "not_kato_class";
    case ErrorKind::truncation_failed: return "truncation_failed";
    case ErrorKind::diagonal_singularity: return "diagonal_singularity";
    case ErrorKind::grid_refinement: return "grid_refinement";
    case ErrorKind::near_resonance: return "near_resonance";
    case ErrorKind::budget_exceeded: return "budget_exceeded";
    case ErrorKind::regime: return "regime";
    case ErrorKind::invariant_violation: return "invariant_violation";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

} // namespace lpk
