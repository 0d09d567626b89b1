#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace heatcoord {

// Root of every error the library throws. The CLI maps IoError to exit
// code 2 and every other Error to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ContractError : public Error {
public:
    using Error::Error;
};

class DegenerateHeatmapError : public Error {
public:
    DegenerateHeatmapError(std::size_t joint, const std::string& what)
        : Error("joint " + std::to_string(joint) + ": " + what), joints_{joint} {}

    // Several degenerate channels reported together.
    DegenerateHeatmapError(std::vector<std::size_t> joints, const std::string& what)
        : Error(what), joints_(std::move(joints)) {}

    std::size_t joint() const noexcept { return joints_.front(); }
    const std::vector<std::size_t>& joints() const noexcept { return joints_; }

private:
    std::vector<std::size_t> joints_;
};

// Invalid bench configuration; `field()` names the offending key.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace heatcoord
