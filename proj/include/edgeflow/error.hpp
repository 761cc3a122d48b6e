#pragma once

#include <stdexcept>
#include <string>

namespace edgeflow {

struct DecodeError : std::runtime_error {
    explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

struct ParamError : std::invalid_argument {
    explicit ParamError(const std::string& what) : std::invalid_argument(what) {}
};

struct DiagnosticsError : std::runtime_error {
    explicit DiagnosticsError(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Non-transient HTTP failure (4xx); carries the response body for the caller.
struct RequestError : std::runtime_error {
    RequestError(int status_code, const std::string& body)
        : std::runtime_error("request failed with status " + std::to_string(status_code) +
                             ": " + body),
          status(status_code) {}
    int status;
};

struct MockError : std::runtime_error {
    explicit MockError(const std::string& what) : std::runtime_error(what) {}
};

struct PathExplosionError : std::runtime_error {
    explicit PathExplosionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace edgeflow
