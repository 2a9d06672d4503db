#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace surfpde {

enum class ErrorKind {
    invalid_argument,
    unsupported_order,
    unsupported_smoothness,
    ill_conditioned,
    generation_failure,
    singular_gradient,
    ill_conditioned_neighborhood,
    non_finite,
    empty_model,
    oracle_scale_exceeded,
    exact_fit,
    insufficient_snapshots,
    non_convergence,
    blow_up,
    parse,
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. The kind drives the CLI exit code: `parse` and
/// `invalid_argument` are usage errors, everything else is numerical.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, const std::string& message) {
    if (!condition) fail(ErrorKind::invalid_argument, message);
}

}  // namespace surfpde
