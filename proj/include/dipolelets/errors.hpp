#pragma once

#include <stdexcept>
#include <string>

namespace dipolelets {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration: bad parameters, grid mismatches, schema violations.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Numerical-consistency failure (non-negligible imaginary residue, solver divergence).
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

/// File I/O failure with a machine-checkable code.
class IoError : public Error {
public:
    enum class Code {
        open_failed,
        malformed_header,
        truncated_payload,
        version_mismatch,
        unsupported_feature,
        write_failed,
    };

    IoError(Code code, const std::string& msg) : Error(msg), code_(code) {}
    Code code() const { return code_; }

    static const char* code_name(Code c) {
        switch (c) {
            case Code::open_failed: return "open_failed";
            case Code::malformed_header: return "malformed_header";
            case Code::truncated_payload: return "truncated_payload";
            case Code::version_mismatch: return "version_mismatch";
            case Code::unsupported_feature: return "unsupported_feature";
            case Code::write_failed: return "write_failed";
        }
        return "unknown";
    }

private:
    Code code_;
};

} // namespace dipolelets
