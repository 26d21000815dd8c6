#pragma once

#include <stdexcept>
#include <string>

namespace lsi {

// Eigenvalue below the positivity floor handed to ln or a power.
class DomainError : public std::domain_error {
public:
    DomainError(const std::string& what, double eigenvalue)
        : std::domain_error(what), eigenvalue_(eigenvalue) {}
    double eigenvalue() const noexcept { return eigenvalue_; }

private:
    double eigenvalue_;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NotHermitianError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateGeneratorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DisconnectedGraphError : public std::runtime_error {
public:
    DisconnectedGraphError() : std::runtime_error("graph is disconnected") {}
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& location, const std::string& message)
        : std::runtime_error(location + ": " + message), location_(location) {}
    const std::string& location() const noexcept { return location_; }

private:
    std::string location_;
};

class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateStartError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lsi
