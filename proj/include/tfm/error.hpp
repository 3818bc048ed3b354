#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfm {

/// Coarse failure classes. The CLI prints the category name as the first
/// token of its diagnostic so scripts can dispatch on it.
enum class ErrorKind {
    invalid_argument,
    shape_mismatch,
    degenerate,
    non_stationary,
    io,
    parse,
    config,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace tfm
