#pragma once

#include <stdexcept>
#include <string>

namespace aftershock {

// Process exit codes used by the CLI.
enum class ExitCode : int {
    ok = 0,
    usage = 2,
    data = 3,
    fit = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::data; }
};

// Invalid configuration value; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error("config error [" + field + "]: " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }

private:
    std::string field_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("parse error at line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class DataError : public Error {
public:
    using Error::Error;
};

// An upstream artifact required by a subcommand does not exist.
class DependencyError : public Error {
public:
    explicit DependencyError(std::string path)
        : Error("missing upstream artifact: " + path), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

class FitError : public Error {
public:
    FitError(const std::string& what, std::string trace = {})
        : Error("fit error: " + what), trace_(std::move(trace)) {}
    const std::string& trace() const noexcept { return trace_; }
    ExitCode exit_code() const noexcept override { return ExitCode::fit; }

private:
    std::string trace_;
};

}  // namespace aftershock
