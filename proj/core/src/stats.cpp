#include "bpmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace bpmap {

double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks needs nonempty samples");
    size_t i = 0, j = 0;
    double d = 0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

double ks_pvalue(double d, int64_t n, int64_t m) {
    double ne = static_cast<double>(n) * static_cast<double>(m) / static_cast<double>(n + m);
    double sq = std::sqrt(ne);
    double lambda = (sq + 0.12 + 0.11 / sq) * d;
    if (lambda < 0.04) return 1.0;  // series is all ones; the limit is 1
    // Q(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2)
    double sum = 0, sign = 1;
    bool converged = false;
    for (int j = 1; j <= 200; ++j) {
        double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16 * (1 + std::abs(sum))) {
            converged = true;
            break;
        }
    }
    if (!converged) return 1.0;
    double p = 2.0 * sum;
    return std::min(1.0, std::max(0.0, p));
}

KsTest ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    KsTest t;
    t.statistic = ks_statistic(a, b);
    t.p_value = ks_pvalue(t.statistic, static_cast<int64_t>(a.size()), static_cast<int64_t>(b.size()));
    return t;
}

double chi_square_pvalue(double stat, double dof) {
    if (dof <= 0) return 1.0;
    return boost::math::gamma_q(dof / 2.0, stat / 2.0);
}

ChiSquare chi_square_gof(const std::vector<double>& probs, const std::vector<int64_t>& observed,
                         int64_t n_total, double min_expected) {
    if (probs.size() != observed.size()) throw std::invalid_argument("chi-square arity mismatch");
    double psum = 0;
    int64_t osum = 0;
    for (double p : probs) psum += p;
    for (int64_t o : observed) osum += o;
    if (psum > 1 + 1e-9 || osum > n_total) throw std::invalid_argument("chi-square cell mass exceeds total");

    struct Cell {
        double e;
        double o;
    };
    std::vector<Cell> cells;
    for (size_t i = 0; i < probs.size(); ++i)
        cells.push_back({probs[i] * static_cast<double>(n_total), static_cast<double>(observed[i])});
    if (psum < 1 - 1e-12)
        cells.push_back({(1 - psum) * static_cast<double>(n_total), static_cast<double>(n_total - osum)});

    // Pool low-expectation cells (smallest first) until each pool clears the floor.
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.e < b.e; });
    std::vector<Cell> pooled;
    Cell acc{0, 0};
    for (const auto& c : cells) {
        if (c.e >= min_expected) {
            pooled.push_back(c);
        } else {
            acc.e += c.e;
            acc.o += c.o;
            if (acc.e >= min_expected) {
                pooled.push_back(acc);
                acc = {0, 0};
            }
        }
    }
    if (acc.e > 0) {
        if (pooled.empty()) {
            pooled.push_back(acc);
        } else {
            auto it = std::min_element(pooled.begin(), pooled.end(),
                                       [](const Cell& a, const Cell& b) { return a.e < b.e; });
            it->e += acc.e;
            it->o += acc.o;
        }
    }

    ChiSquare r;
    r.cells = static_cast<int64_t>(pooled.size());
    for (const auto& c : pooled) r.statistic += (c.o - c.e) * (c.o - c.e) / c.e;
    r.dof = r.cells - 1;
    r.p_value = r.dof > 0 ? chi_square_pvalue(r.statistic, static_cast<double>(r.dof)) : 1.0;
    return r;
}

}  // namespace bpmap
