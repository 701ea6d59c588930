#pragma once

#include <stdexcept>
#include <string>

namespace uavcov {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& key, const std::string& what)
        : Error("parse error at '" + key + "': " + what), key_(key) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

class DimensionError : public Error { public: using Error::Error; };
class UnsupportedResolutionError : public Error { public: using Error::Error; };
class BoundsError : public Error { public: using Error::Error; };
class ParameterError : public Error { public: using Error::Error; };
class GeometryError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };
class ScenarioError : public Error { public: using Error::Error; };
class DegenerateTrackError : public Error { public: using Error::Error; };
class NoPathError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

class NoAirspaceError : public Error {
public:
    NoAirspaceError(std::size_t step, const std::string& what)
        : Error("no airspace at step " + std::to_string(step) + ": " + what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

} // namespace uavcov
