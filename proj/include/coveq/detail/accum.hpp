#pragma once

#include <cmath>

namespace coveq::detail {

// Neumaier variant of Kahan summation: tracks a running compensation so sums
// of terms spanning many orders of magnitude stay accurate.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace coveq::detail
