#pragma once

#include <stdexcept>
#include <string>

namespace hirise {

// Invalid geometry: a pool factor that does not divide the array, an ROI that
// leaves the frame, a box larger than its scene.
class GeometryError : public std::runtime_error {
public:
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// Averaging network evaluated with no input branches.
class EmptyBranchSet : public std::runtime_error {
public:
    explicit EmptyBranchSet(const std::string& what) : std::runtime_error(what) {}
};

// Configuration values out of range or mutually inconsistent.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed file contents (PPM header, annotation line, sweep spec).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or unwritable files.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hirise
