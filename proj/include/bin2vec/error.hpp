#ifndef BIN2VEC_ERROR_HPP
#define BIN2VEC_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bin2vec {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input bytes (ELF headers, truncated tables).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed ELF for a machine or class we do not handle.
class UnsupportedArchError : public Error {
public:
    UnsupportedArchError(std::string arch)
        : Error("unsupported architecture: " + arch), arch_(std::move(arch)) {}

    const std::string& arch() const { return arch_; }

private:
    std::string arch_;
};

class SignatureError : public Error {
public:
    explicit SignatureError(const std::string& opcode)
        : Error("unknown opcode: " + opcode), opcode_(opcode) {}

    const std::string& opcode() const { return opcode_; }

private:
    std::string opcode_;
};

/// Interchange dump violates the schema. Line numbers are 1-based.
class SchemaError : public Error {
public:
    SchemaError(std::size_t line, std::string key, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + (key.empty() ? std::string() : "key '" + key + "': ") + what),
          line_(line), key_(std::move(key)) {}

    std::size_t line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::size_t line_;
    std::string key_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

}

#endif
