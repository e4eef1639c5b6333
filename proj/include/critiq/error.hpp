#pragma once

#include <stdexcept>
#include <string>

namespace critiq {

// Every failure in the library maps to one of these named codes. The CLI
// groups them into exit classes: usage (1), data (2), backend (3).
enum class Errc {
    usage,

    // data / format errors
    io_error,
    empty_document,
    encoding_error,
    malformed_record,
    unknown_segment,
    schema_mismatch,
    empty_corpus,
    missing_labels,
    undefined_rate,
    degenerate_series,
    insufficient_population,
    zero_denominator,
    invalid_config,

    // gateway / backend errors
    transport_failure,
    parse_failure,
    script_miss,
    missing_variable,
    unknown_template,
    empty_generation,
    unsupported_operation,
};

const char* errc_name(Errc code) noexcept;

// Exit class per the CLI contract: 0 success, 1 usage, 2 data, 3 backend.
int errc_exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          message_(std::move(message)) {}

    Error(Errc code, std::string message, bool retryable)
        : Error(code, std::move(message)) {
        retryable_ = retryable;
    }

    Errc code() const noexcept { return code_; }
    const char* name() const noexcept { return errc_name(code_); }
    const std::string& message() const noexcept { return message_; }

    // Transient transport failures may be retried by the gateway.
    bool retryable() const noexcept { return retryable_; }

private:
    Errc code_;
    std::string message_;
    bool retryable_ = false;
};

}  // namespace critiq
