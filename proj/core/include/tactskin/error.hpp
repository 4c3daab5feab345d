#pragma once

#include <stdexcept>
#include <string>

namespace tactskin {

enum class ErrorKind { parse, config, geometry, chain, analysis };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

struct GeometryError : Error {
    explicit GeometryError(const std::string& what) : Error(ErrorKind::geometry, what) {}
};

struct ChainError : Error {
    explicit ChainError(const std::string& what) : Error(ErrorKind::chain, what) {}
};

struct AnalysisError : Error {
    explicit AnalysisError(const std::string& what) : Error(ErrorKind::analysis, what) {}
};

} // namespace tactskin
