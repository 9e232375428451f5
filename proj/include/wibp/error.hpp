#pragma once

#include <stdexcept>
#include <string>

namespace wibp {

/// Argument outside the domain of a numeric routine.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Model parameters violating a constraint; the message names the inequality.
class InvalidParameters : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidSubset : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A verification suite was asked to run on parameters outside its hypotheses.
class InapplicableSuite : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Memory guard tripped (dish table cap, oversized request).
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wibp
