#pragma once

#include <stdexcept>
#include <string>

namespace kernrates {

/// Error classes surfaced by the library. The CLI maps these to exit codes.
enum class Errc {
    invalid_input,
    invalid_bandwidth,
    unsupported_order,
    numerical_failure,
    no_local_data,
    nonstationary_model,
    no_analytic_truth,
    parse_error,
    empty_supremum,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_input: return "invalid-input";
        case Errc::invalid_bandwidth: return "invalid-bandwidth";
        case Errc::unsupported_order: return "unsupported-order";
        case Errc::numerical_failure: return "numerical-failure";
        case Errc::no_local_data: return "no-local-data";
        case Errc::nonstationary_model: return "nonstationary-model";
        case Errc::no_analytic_truth: return "no-analytic-truth";
        case Errc::parse_error: return "parse-error";
        case Errc::empty_supremum: return "empty-supremum";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace kernrates
