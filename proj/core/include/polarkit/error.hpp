#pragma once

#include <stdexcept>
#include <string>

namespace polarkit {

// Every failure raised by the library carries one of these categories. The CLI
// maps them onto its exit codes (usage/format -> 2, io -> 3, domain -> 4).
enum class ErrorKind { Usage, Format, Io, Domain };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};
struct FormatError : Error {
    explicit FormatError(const std::string& what) : Error(ErrorKind::Format, what) {}
};
struct IoError : Error {
    explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};
struct DomainError : Error {
    explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

}  // namespace polarkit
