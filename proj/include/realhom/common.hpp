// realhom: homology of real zero sets of homogeneous polynomial systems
// on S^n and P^n via certified grid covering, nerve complexes and Smith
// normal form.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace realhom {

using index_t = std::int64_t;

// Invalid user input (malformed files, violated preconditions). CLI exit 3.
struct invalid_input : std::runtime_error {
    explicit invalid_input(const std::string& msg) : std::runtime_error(msg) {}
};

// A configured budget (grid points, simplices, mesh passes) was exceeded.
// CLI exit 2.
struct budget_exceeded : std::runtime_error {
    explicit budget_exceeded(const std::string& msg) : std::runtime_error(msg) {}
    budget_exceeded(const std::string& msg, double last_eta, index_t refine_count)
        : std::runtime_error(msg), last_eta(last_eta), refine_count(refine_count) {}
    double last_eta = 0.0;      // eta of the pass that hit the budget (0 if n/a)
    index_t refine_count = -1;  // unresolved points at that pass (-1 if n/a)
};

// A runtime invariant that should be unreachable was violated. CLI exit 4.
struct internal_error : std::logic_error {
    explicit internal_error(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace realhom
