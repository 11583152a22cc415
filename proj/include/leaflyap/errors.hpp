// SPDX-License-Identifier: Apache-2.0
#ifndef LEAFLYAP_ERRORS_HPP
#define LEAFLYAP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace leaflyap {

// Error taxonomy shared by all modules; the CLI maps these to exit codes
// (domain -> 2, numeric -> 3, capability -> 4). Messages name module.operation.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what) {}
};

class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& where, const std::string& what)
        : std::runtime_error(where + ": " + what) {}
};

} // namespace leaflyap

#endif
