#pragma once

#include <vector>

namespace faithsum {

struct Correlation {
    double pearson_rho = 0.0;
    double pearson_p = 0.0;
    double spearman_rho = 0.0;
    double spearman_p = 0.0;
};

// Pearson on values, Spearman on average ranks (ties averaged); two-sided
// p-values from the t-approximation with n-2 degrees of freedom. Throws
// std::invalid_argument on length mismatch or n < 3 and std::domain_error
// when either input is constant.
Correlation correlation_stats(const std::vector<double>& x, const std::vector<double>& y);

// Fleiss' kappa over an items x categories count table; every item must
// carry the same number of ratings n >= 2.
double fleiss_kappa(const std::vector<std::vector<int>>& table);

}  // namespace faithsum
