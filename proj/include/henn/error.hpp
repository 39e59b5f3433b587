#pragma once

#include <stdexcept>
#include <string>

namespace henn {

enum class ErrorKind {
    Domain,
    Validation,
    Parse,
    Io,
    Unsupported,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& what) : Error(ErrorKind::Unsupported, what) {}
};

}  // namespace henn
