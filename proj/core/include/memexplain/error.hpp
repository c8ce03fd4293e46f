#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace memexplain {

/// Bad input or configuration. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& message, std::string field = {})
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Validation failure that names the offending record ids.
class RecordError : public ValidationError {
public:
    RecordError(const std::string& message, std::vector<std::string> ids)
        : ValidationError(message + " [" + join(ids) + "]"), ids_(std::move(ids)) {}

    const std::vector<std::string>& ids() const noexcept { return ids_; }

private:
    static std::string join(const std::vector<std::string>& ids) {
        std::string out;
        for (const auto& id : ids) {
            if (!out.empty()) out += ", ";
            out += id;
        }
        return out;
    }

    std::vector<std::string> ids_;
};

/// Failure while running a pipeline step (I/O, provider, model backend). Exit code 2.
class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace memexplain
