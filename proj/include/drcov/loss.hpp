#pragma once

#include <algorithm>
#include <cmath>

namespace drcov {

// log(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Positive-weighted binary cross-entropy on a logit:
//   w * z * -log(sigmoid(s)) + (1 - z) * -log(1 - sigmoid(s))
// using -log(sigmoid(s)) = softplus(-s) and -log(1 - sigmoid(s)) = softplus(s).
inline double weighted_bce(double logit, double label, double pos_weight) noexcept {
    return pos_weight * label * softplus(-logit) + (1.0 - label) * softplus(logit);
}

// d weighted_bce / d logit.
inline double weighted_bce_grad(double logit, double label, double pos_weight) noexcept {
    const double p = sigmoid(logit);
    return pos_weight * label * (p - 1.0) + (1.0 - label) * p;
}

}  // namespace drcov
