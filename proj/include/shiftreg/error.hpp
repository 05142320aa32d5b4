#pragma once

#include <stdexcept>
#include <string>

namespace shiftreg {

// Physics or model-validity violations (exit code 1 at the CLI).
class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SingularityError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class UnsupportedRegimeError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class CapacityError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class OutOfModelError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

class StatisticsError : public PhysicsError {
public:
    using PhysicsError::PhysicsError;
};

// Fit failures carry the residual trace of the last iterations.
class FitError : public PhysicsError {
public:
    FitError(const std::string& what, std::string trace = {})
        : PhysicsError(what), trace_(std::move(trace)) {}
    const std::string& trace() const noexcept { return trace_; }

private:
    std::string trace_;
};

// Configuration / file format problems (exit code 2 at the CLI).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, std::string field = {})
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line), field_(std::move(field)) {}
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace shiftreg
