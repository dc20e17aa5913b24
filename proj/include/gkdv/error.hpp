#pragma once

#include <stdexcept>
#include <string>

namespace gkdv {

/// Invalid user-supplied configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical run produced NaN/Inf or overflowed (CLI exit code 3).
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& what, long step)
        : std::runtime_error(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

/// An operation was called outside its domain: odd grid sizes, representation
/// mismatch, insufficient modulation range for X_{s,b}, ... (CLI exit code 4).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

}  // namespace gkdv
