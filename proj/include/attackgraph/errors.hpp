#pragma once

#include <stdexcept>
#include <string>

namespace ag {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownNode : public Error {
public:
    using Error::Error;
};

class AmbiguousMatch : public Error {
public:
    using Error::Error;
};

class ConnectedNode : public Error {
public:
    using Error::Error;
};

class ScenarioError : public Error {
public:
    using Error::Error;
};

class UnknownDevice : public Error {
public:
    using Error::Error;
};

class UnknownTopology : public Error {
public:
    using Error::Error;
};

class UnknownGeneration : public Error {
public:
    using Error::Error;
};

class UnknownSession : public Error {
public:
    using Error::Error;
};

// Raised when a merge session is used out of order (already demerged,
// attack merge before the reachability update, ...).
class SessionStateError : public Error {
public:
    using Error::Error;
};

class ArchiveError : public Error {
public:
    using Error::Error;
};

} // namespace ag
