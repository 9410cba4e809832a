#pragma once

#include <utility>

#include "gcf/errors.hpp"

namespace gcf {

enum class PenaltyVariant { C11, Smooth };

/// Penalty beta_delta(x) = C0 * beta(x/delta) built from a base profile with
/// beta(x) = 0 for x >= 1, beta''(x) = 0 for x < 0 and beta(0) = -1.
///
/// Variants:
///   C11    linear -1 + 2x below zero, quadratic bridge -(1-x)^2 on [0,1)
///   Smooth same linear part, C^2 quartic bridge -1 + 2x - 2x^3 + x^4 on [0,1)
///
/// Both are non-decreasing and concave; C11 is the default used by the solver.
class PenaltyFunction {
public:
    PenaltyFunction() = default;

    double delta() const { return delta_; }
    double c0() const { return c0_; }
    PenaltyVariant variant() const { return variant_; }

    double value(double x) const { return c0_ * base_value(x / delta_); }
    double derivative(double x) const { return c0_ / delta_ * base_derivative(x / delta_); }
    std::pair<double, double> eval(double x) const { return {value(x), derivative(x)}; }

    friend PenaltyFunction make_penalty(double delta, double c0, PenaltyVariant variant);

private:
    PenaltyFunction(double delta, double c0, PenaltyVariant variant)
        : delta_(delta), c0_(c0), variant_(variant) {}

    double base_value(double s) const;
    double base_derivative(double s) const;

    double delta_ = 1.0;
    double c0_ = 1.0;
    PenaltyVariant variant_ = PenaltyVariant::C11;
};

PenaltyFunction make_penalty(double delta, double c0, PenaltyVariant variant = PenaltyVariant::C11);

}  // namespace gcf
