#pragma once

#include <stdexcept>
#include <string>

namespace elute {

/// Invalid or inconsistent configuration (files, fields, parameter bounds).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure in a solver (step-size collapse, singular system).
class NumericsError : public std::runtime_error {
public:
    NumericsError(const std::string& what, double t = 0.0)
        : std::runtime_error(what), failure_time(t) {}
    double failure_time;
};

class InsufficientChainsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroWithinVarianceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegreesOfFreedomError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace elute
