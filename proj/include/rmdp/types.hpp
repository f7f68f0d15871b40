#pragma once
// Shared primitive types, tolerances and error categories.

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rmdp {

inline constexpr const char* kToolVersion = "0.1.0";

/// Tolerance for stochasticity / feasibility checks on freshly constructed data.
inline constexpr double kConstructTol = 1e-12;
/// Tolerance for checks on derived objects (induced chains, solver outputs).
inline constexpr double kDerivedTol = 1e-9;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One validation finding. `state`/`action` are indices into the model
/// (-1 when not applicable), `rule` is a short machine-readable tag and
/// `message` a human-readable sentence naming the offending pieces.
struct Diagnostic {
    int state = -1;
    int action = -1;
    std::string rule;
    std::string message;
};

/// Malformed input document: syntax errors, schema violations, unknown names.
class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failure (missing file, unreadable path, write failure).
class IoError : public std::runtime_error {
  public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A structurally parseable model that violates semantic invariants.
/// Carries the full diagnostic list produced by validate().
class ValidationError : public std::runtime_error {
  public:
    ValidationError(std::string what, std::vector<Diagnostic> diagnostics)
        : std::runtime_error(std::move(what)), diagnostics_(std::move(diagnostics)) {}

    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

  private:
    std::vector<Diagnostic> diagnostics_;
};

}  // namespace rmdp
