#pragma once

#include <stdexcept>
#include <string>

namespace rydgrover {

/// Invalid experiment configuration. `key()` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Numerical failure while integrating a trajectory or density matrix.
class IntegrationFault : public std::runtime_error {
public:
    IntegrationFault(double time, const std::string& what)
        : std::runtime_error(what + " (t = " + std::to_string(time) + " s)"), time_(time) {}

    double time() const noexcept { return time_; }

private:
    double time_;
};

/// The Rydberg excitation linewidth is undefined without Rydberg decay.
class UndefinedLinewidth : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace rydgrover
