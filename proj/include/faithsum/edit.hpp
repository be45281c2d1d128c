#pragma once

#include "faithsum/params.hpp"

namespace faithsum {

// Task vector negation: theta0 - lambda * (theta_minus - theta0).
// lambda == 0 returns theta0 bit-for-bit.
inline ParamVector tvn(const ParamVector& theta0, const ParamVector& theta_minus,
                       double lambda) {
    ParamVector out = theta0;
    if (lambda != 0.0) {
        ParamVector task_vector = param_arith(theta_minus, theta0, 1.0, -1.0);
        param_axpy(-lambda, task_vector, out);
    } else {
        // still reject mismatched layouts on the identity path
        ParamVector unused = param_arith(theta_minus, theta0, 1.0, -1.0);
    }
    return out;
}

// Contrastive ensembling: theta0 + lambda * (theta_plus - theta_minus).
inline ParamVector cape(const ParamVector& theta0, const ParamVector& theta_plus,
                        const ParamVector& theta_minus, double lambda) {
    ParamVector diff = param_arith(theta_plus, theta_minus, 1.0, -1.0);
    if (!theta0.layout || !theta0.layout->compatible(*diff.layout)) {
        throw std::invalid_argument("cape: parameter layouts do not match");
    }
    ParamVector out = theta0;
    if (lambda != 0.0) param_axpy(lambda, diff, out);
    return out;
}

}  // namespace faithsum
