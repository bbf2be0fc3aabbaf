#pragma once

#include <stdexcept>
#include <string>

namespace floorcast {

// Input document cannot be parsed at all (bad JSON/XML syntax, wrong root type).
struct MalformedDocument : std::runtime_error {
    explicit MalformedDocument(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates a data contract (empty collection,
// mismatched lengths, out-of-range values, ...). Exit code 2 territory.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration; carries the dotted field path that failed.
struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string field_path, const std::string& what)
        : std::runtime_error(field_path + ": " + what), field(std::move(field_path)) {}
};

}  // namespace floorcast
