#pragma once

#include <cmath>

namespace swingup::detail {

// Neumaier compensated accumulator. Reductions over state vectors (norms,
// populations, photon-number means) use this so the rounded result does not
// depend on summation order; the mode-relabeling symmetry test asserts
// bit-identical swapped observables, which plain double sums cannot provide.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }

    double value() const { return sum + comp; }
};

}  // namespace swingup::detail
