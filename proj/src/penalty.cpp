#include "gcf/penalty.hpp"

#include <cmath>

namespace gcf {

PenaltyFunction make_penalty(double delta, double c0, PenaltyVariant variant) {
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw Error(ErrorCode::InvalidParameter, "penalty width delta must be positive");
    if (!(c0 > 0.0) || !std::isfinite(c0))
        throw Error(ErrorCode::InvalidParameter, "penalty scale C0 must be positive");
    return PenaltyFunction(delta, c0, variant);
}

double PenaltyFunction::base_value(double s) const {
    if (s >= 1.0) return 0.0;
    if (s < 0.0) return -1.0 + 2.0 * s;
    if (variant_ == PenaltyVariant::C11) {
        const double t = 1.0 - s;
        return -t * t;
    }
    return -1.0 + s * (2.0 + s * s * (-2.0 + s));
}

double PenaltyFunction::base_derivative(double s) const {
    if (s >= 1.0) return 0.0;
    if (s < 0.0) return 2.0;
    if (variant_ == PenaltyVariant::C11) return 2.0 * (1.0 - s);
    return 2.0 + s * s * (-6.0 + 4.0 * s);
}

}  // namespace gcf
