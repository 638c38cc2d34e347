#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drivewave {

enum class ErrorKind {
    config,             // invalid parameters, grid, or flags (CLI exit 2)
    degenerate_state,   // state outside an operation's domain, e.g. n <= 0
    numerical_blowup,   // NaN/Inf during time stepping
    boundary,           // query sits exactly on a threshold
    coexistence_absent, // no interior equilibrium
    not_converged,      // ODE or fixed-point iteration ran out of time
    search_failed,      // constant search hit its bound
    measurement,        // not enough data to fit a speed or rate
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::config: return "config";
        case ErrorKind::degenerate_state: return "degenerate_state";
        case ErrorKind::numerical_blowup: return "numerical_blowup";
        case ErrorKind::boundary: return "boundary";
        case ErrorKind::coexistence_absent: return "coexistence_absent";
        case ErrorKind::not_converged: return "not_converged";
        case ErrorKind::search_failed: return "search_failed";
        case ErrorKind::measurement: return "measurement";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what, std::vector<std::string> details = {})
        : std::runtime_error(what), kind_(kind), details_(std::move(details)) {}

    ErrorKind kind() const noexcept { return kind_; }
    // One entry per violated constraint for config errors.
    const std::vector<std::string>& details() const noexcept { return details_; }

private:
    ErrorKind kind_;
    std::vector<std::string> details_;
};

// Collects every violation before throwing, so a usage error reports them all.
class Violations {
public:
    void check(bool ok, std::string message) {
        if (!ok) items_.push_back(std::move(message));
    }
    void add(std::string message) { items_.push_back(std::move(message)); }
    void merge(const Violations& other) {
        items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    }
    bool empty() const { return items_.empty(); }
    const std::vector<std::string>& items() const { return items_; }

    void throw_if_any(const std::string& context) const {
        if (items_.empty()) return;
        std::string msg = context + ": ";
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (i) msg += "; ";
            msg += items_[i];
        }
        throw Error(ErrorKind::config, msg, items_);
    }

private:
    std::vector<std::string> items_;
};

} // namespace drivewave
