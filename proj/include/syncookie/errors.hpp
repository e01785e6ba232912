#pragma once

#include <stdexcept>
#include <string>

namespace syncookie {

// Invalid scenario; field() names the offending config key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& why)
        : std::runtime_error(field + ": " + why), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Filesystem failure; path() is the file involved.
class IoError : public std::runtime_error {
public:
    IoError(std::string path, const std::string& why)
        : std::runtime_error(path + ": " + why), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace syncookie
