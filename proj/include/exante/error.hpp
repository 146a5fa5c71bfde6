#pragma once

#include <stdexcept>
#include <string>

namespace exante {

/// Base for every error raised by the library. `what()` carries a
/// module prefix ("dataset: ...", "dr: ...") so the CLI can print it as is.
class Error : public std::runtime_error {
public:
    Error(const std::string& module, const std::string& message)
        : std::runtime_error(module + ": " + message), module_(module) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

class DatasetError : public Error {
public:
    explicit DatasetError(const std::string& message) : Error("dataset", message) {}
};

class DgpError : public Error {
public:
    explicit DgpError(const std::string& message) : Error("oracle_dgp", message) {}
};

class FitError : public Error {
public:
    explicit FitError(const std::string& message) : Error("dr_estimator", message) {}
};

class ReturnsError : public Error {
public:
    explicit ReturnsError(const std::string& message) : Error("returns_engine", message) {}
};

class InferenceError : public Error {
public:
    explicit InferenceError(const std::string& message) : Error("inference", message) {}
};

class PolicyError : public Error {
public:
    explicit PolicyError(const std::string& message) : Error("policy", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("cli", message) {}
};

}  // namespace exante
