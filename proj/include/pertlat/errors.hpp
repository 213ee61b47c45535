#pragma once

#include <stdexcept>
#include <string>

namespace pertlat {

// Error taxonomy used across modules. `code()` is stable and machine
// readable; the CLI maps it to exit statuses and error records.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// Bad arguments / config (CLI exit 2).
class ValidationError : public Error {
public:
    ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

// Model-level failures (CLI exit 3).
class ModelError : public Error {
public:
    ModelError(std::string code, const std::string& what) : Error(std::move(code), what) {}
};

class DivergentMean : public ModelError {
public:
    DivergentMean(const std::string& what) : ModelError("DivergentMean", what) {}
};

class MarginExceeded : public ModelError {
public:
    MarginExceeded(const std::string& what) : ModelError("MarginExceeded", what) {}
};

class MarginInsufficient : public ModelError {
public:
    MarginInsufficient(const std::string& what) : ModelError("MarginInsufficient", what) {}
};

class InteriorUnsaturated : public ModelError {
public:
    InteriorUnsaturated(const std::string& what) : ModelError("InteriorUnsaturated", what) {}
};

class RegionTooLarge : public ModelError {
public:
    RegionTooLarge(const std::string& what) : ModelError("RegionTooLarge", what) {}
};

class WindowTooSmall : public ModelError {
public:
    WindowTooSmall(const std::string& what) : ModelError("WindowTooSmall", what) {}
};

class ToleranceUnreachable : public ModelError {
public:
    ToleranceUnreachable(const std::string& what) : ModelError("ToleranceUnreachable", what) {}
};

class UnsupportedDimension : public ModelError {
public:
    UnsupportedDimension(const std::string& what) : ModelError("UnsupportedDimension", what) {}
};

class DegenerateFit : public ModelError {
public:
    DegenerateFit(const std::string& what) : ModelError("DegenerateFit", what) {}
};

} // namespace pertlat
