#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace flexmarket {

/// Bad user input: malformed files, out-of-range parameters, inconsistent
/// dimensions. Maps to exit code 1 in the CLI.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Optimization backend failure or infeasible model. Maps to exit code 2.
class SolveError : public std::runtime_error {
public:
    SolveError(const std::string& what, std::vector<std::string> causes = {})
        : std::runtime_error(what), causes_(std::move(causes)) {}

    /// Row names from an irreducible infeasible subset, when one was found.
    [[nodiscard]] const std::vector<std::string>& causes() const { return causes_; }

private:
    std::vector<std::string> causes_;
};

/// Ledger that does not balance.
class AuditError : public std::runtime_error {
public:
    AuditError(const std::string& what, std::vector<std::string> offending)
        : std::runtime_error(what), offending_(std::move(offending)) {}

    [[nodiscard]] const std::vector<std::string>& offending() const { return offending_; }

private:
    std::vector<std::string> offending_;
};

}  // namespace flexmarket
