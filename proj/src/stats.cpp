#include "faithsum/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace faithsum {

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw std::domain_error("correlation is undefined for constant input");
    }
    return sxy / std::sqrt(sxx * syy);
}

// average ranks, ties share the mean of their positions
std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
        i = j + 1;
    }
    return r;
}

// two-sided p for H0: rho = 0 via t = r sqrt((n-2)/(1-r^2))
double p_value(double rho, std::size_t n) {
    const auto df = static_cast<double>(n - 2);
    const double denom = 1.0 - rho * rho;
    if (denom <= 0.0) return 0.0;
    const double t = std::fabs(rho) * std::sqrt(df / denom);
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace

Correlation correlation_stats(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("correlation_stats: input lengths differ");
    }
    if (x.size() < 3) {
        throw std::invalid_argument("correlation_stats: need at least 3 observations");
    }
    Correlation result;
    result.pearson_rho = pearson(x, y);
    result.pearson_p = p_value(result.pearson_rho, x.size());
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    result.spearman_rho = pearson(rx, ry);
    result.spearman_p = p_value(result.spearman_rho, x.size());
    return result;
}

double fleiss_kappa(const std::vector<std::vector<int>>& table) {
    if (table.empty() || table.front().empty()) {
        throw std::invalid_argument("fleiss_kappa: empty rating table");
    }
    const std::size_t categories = table.front().size();
    long long raters = -1;
    for (const auto& row : table) {
        if (row.size() != categories) {
            throw std::invalid_argument("fleiss_kappa: ragged rating table");
        }
        long long row_sum = 0;
        for (int count : row) {
            if (count < 0) throw std::invalid_argument("fleiss_kappa: negative count");
            row_sum += count;
        }
        if (raters < 0) raters = row_sum;
        if (row_sum != raters) {
            throw std::invalid_argument("fleiss_kappa: items have different rating counts");
        }
    }
    if (raters < 2) throw std::invalid_argument("fleiss_kappa: need at least 2 ratings per item");

    const auto n_items = static_cast<double>(table.size());
    const auto n = static_cast<double>(raters);
    double p_bar = 0.0;
    std::vector<double> category_share(categories, 0.0);
    for (const auto& row : table) {
        double agree = 0.0;
        for (std::size_t j = 0; j < categories; ++j) {
            const auto c = static_cast<double>(row[j]);
            agree += c * (c - 1.0);
            category_share[j] += c;
        }
        p_bar += agree / (n * (n - 1.0));
    }
    p_bar /= n_items;
    double pe = 0.0;
    for (double share : category_share) {
        const double pj = share / (n_items * n);
        pe += pj * pj;
    }
    if (std::fabs(1.0 - pe) < 1e-12) {
        // everyone used one category everywhere: complete agreement
        return 1.0;
    }
    return (p_bar - pe) / (1.0 - pe);
}

}  // namespace faithsum
