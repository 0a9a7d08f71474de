#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace clocktree {

struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NoConvergenceError : std::runtime_error {
    int max_iter;
    double residual;
    NoConvergenceError(int iters, double res)
        : std::runtime_error("boundary law iteration did not converge after " +
                             std::to_string(iters) +
                             " iterations, residual " + std::to_string(res)),
          max_iter(iters), residual(res) {}
};

struct WrongBranchError : std::runtime_error {
    std::vector<int> A;
    double outside_mass;
    WrongBranchError(std::vector<int> a, double mass)
        : std::runtime_error("boundary law converged to a non-A-localized branch "
                             "(mass outside A = " + std::to_string(mass) +
                             "); beta too small for this A"),
          A(std::move(a)), outside_mass(mass) {}
};

struct SizeLimitError : std::runtime_error {
    explicit SizeLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace clocktree
