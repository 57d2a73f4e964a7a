// errors.hpp: error taxonomy shared by all modules and mapped to CLI exit codes.

#pragma once

#include <stdexcept>
#include <string>

namespace tfld {

// Bad or inconsistent user input (config schema, invalid model parameters). Exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Requested computation exceeds a configured resource budget (dimension, memory). Exit code 3.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

// A numerical procedure failed to reach its accuracy contract. Exit code 4.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Feature outside the supported families (profile types, experiment options). Exit code 2.
class unsupported_error : public std::runtime_error {
public:
    explicit unsupported_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace tfld
