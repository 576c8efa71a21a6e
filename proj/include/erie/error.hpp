#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace erie {

class Error : public std::runtime_error {
  public:
    enum class Kind { Parse, Validate, Data, Eval, Compile, Render, Io };

    Error(Kind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

struct Diagnostic {
    enum class Severity { Err, Warning };
    Severity severity = Severity::Err;
    std::string path;     // where in the spec ("stream.encoding.pitch", ...)
    std::string message;
};

struct ValidationReport {
    std::vector<Diagnostic> items;

    void error(std::string path, std::string message) {
        items.push_back({Diagnostic::Severity::Err, std::move(path), std::move(message)});
    }
    void warn(std::string path, std::string message) {
        items.push_back({Diagnostic::Severity::Warning, std::move(path), std::move(message)});
    }
    std::size_t error_count() const {
        std::size_t n = 0;
        for (const auto& d : items)
            if (d.severity == Diagnostic::Severity::Err) ++n;
        return n;
    }
    bool ok() const { return error_count() == 0; }
    std::string to_string() const;
};

}  // namespace erie
