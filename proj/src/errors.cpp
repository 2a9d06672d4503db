#include "surfpde/errors.hpp"

namespace surfpde {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid-argument";
        case ErrorKind::unsupported_order: return "unsupported-order";
        case ErrorKind::unsupported_smoothness: return "unsupported-smoothness";
        case ErrorKind::ill_conditioned: return "ill-conditioned";
        case ErrorKind::generation_failure: return "generation-failure";
        case ErrorKind::singular_gradient: return "singular-gradient";
        case ErrorKind::ill_conditioned_neighborhood: return "ill-conditioned-neighborhood";
        case ErrorKind::non_finite: return "non-finite";
        case ErrorKind::empty_model: return "empty-model";
        case ErrorKind::oracle_scale_exceeded: return "oracle-scale-exceeded";
        case ErrorKind::exact_fit: return "exact-fit";
        case ErrorKind::insufficient_snapshots: return "insufficient-snapshots";
        case ErrorKind::non_convergence: return "non-convergence";
        case ErrorKind::blow_up: return "blow-up";
        case ErrorKind::parse: return "parse";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace surfpde
