#pragma once

#include <stdexcept>
#include <string>

namespace lsfbm {

enum class ErrorKind {
    InvalidArgument,  // bad parameters or usage
    Data,             // malformed or unusable input data
    Numerical,        // a numerical procedure failed
    Io,               // file system errors
    Resource,         // refused because of a memory/size guard
};

/// Exception type thrown by every module; the kind maps onto C API status codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void throw_invalid(const std::string& what);
[[noreturn]] void throw_data(const std::string& what);
[[noreturn]] void throw_numerical(const std::string& what);

}  // namespace lsfbm
