#pragma once

#include <stdexcept>
#include <string>

namespace spectra {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed logs, schemas, maps, or mismatched dimensions.
class InputError : public Error {
public:
    using Error::Error;
};

/// A MinerConfig field outside its admissible range.
class ConfigError : public InputError {
public:
    ConfigError(std::string field, const std::string& what)
        : InputError("invalid config field '" + field + "': " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace spectra
