#pragma once

#include <cmath>

#include "coveq/errors.hpp"

namespace coveq {

// A probability carried together with its natural logarithm.
//
// The log form stays exact when the plain value underflows (normal tail
// beyond t ~ 39), which is what downstream log-space combiners consume.
struct PValue {
    double value = 1.0;      // in [0, 1]
    double log_value = 0.0;  // log(value), <= 0; finite or -inf

    static PValue from_log(double lv) {
        if (std::isnan(lv) || lv > 0.0)
            throw DomainError("p-value log out of range (log > 0)");
        return PValue{std::exp(lv), lv};
    }

    static PValue from_value(double v) {
        if (!(v >= 0.0) || v > 1.0)
            throw DomainError("p-value out of [0,1]");
        return PValue{v, std::log(v)};
    }
};

}  // namespace coveq
