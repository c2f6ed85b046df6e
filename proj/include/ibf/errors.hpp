#pragma once

#include <stdexcept>
#include <string>

namespace ibf {

/// Invalid argument, malformed data file, or violated precondition.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A prior or dataset that cannot be split or summarized (zero mass, zero variance).
class DegenerateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class TransformError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The sampler could not find a finite starting point.
class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DiagnosticsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ibf
