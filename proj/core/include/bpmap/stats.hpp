#pragma once

#include <cstdint>
#include <vector>

namespace bpmap {

/// Two-sample Kolmogorov-Smirnov statistic; inputs must be sorted.
double ks_statistic(const std::vector<double>& a, const std::vector<double>& b);

/// Asymptotic two-sample KS p-value with the usual small-sample correction.
double ks_pvalue(double d, int64_t n, int64_t m);

struct KsTest {
    double statistic = 0;
    double p_value = 1;
};

KsTest ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ChiSquare {
    double statistic = 0;
    int64_t dof = 0;
    double p_value = 1;
    int64_t cells = 0;  // after pooling
};

/// Goodness of fit against exact cell probabilities. Cells whose expected
/// count falls below min_expected are pooled before the statistic is formed.
/// `probs` may sum to less than 1; the remainder becomes an implicit cell
/// matched against n - sum(observed).
ChiSquare chi_square_gof(const std::vector<double>& probs, const std::vector<int64_t>& observed,
                         int64_t n_total, double min_expected = 5.0);

double chi_square_pvalue(double stat, double dof);

}  // namespace bpmap
