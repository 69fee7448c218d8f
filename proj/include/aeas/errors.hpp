#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace aeas {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A corpus or label file violated the on-disk contract. `field` names the
// violated invariant (e.g. "epss", "cve_id") so callers can report it.
class CorpusError : public Error {
public:
    CorpusError(std::filesystem::path file, std::string field, const std::string& message)
        : Error(file.string() + ": " + field + ": " + message),
          file_(std::move(file)),
          field_(std::move(field)) {}

    const std::filesystem::path& file() const noexcept { return file_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::filesystem::path file_;
    std::string field_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace aeas
