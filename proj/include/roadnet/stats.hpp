#pragma once
// Kolmogorov-Smirnov tests and small summary-statistics helpers.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace roadnet {

// Kolmogorov tail Q(lambda) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2)
inline double kolmogorov_q(double lambda) {
    if (lambda < 1e-10) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 128; ++k) {
        const double t = std::exp(-2.0 * static_cast<double>(k) * k * lambda * lambda);
        sum += sign * t;
        if (t < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double stat = 0.0;
    double p_value = 1.0;
};

// one-sample KS against an arbitrary CDF; finite-n correction per the usual
// sqrt(n) + 0.12 + 0.11/sqrt(n) effective multiplier
template <typename Cdf>
KsResult ks_test(std::vector<double> xs, Cdf&& cdf) {
    if (xs.empty()) throw std::invalid_argument("ks_test: empty sample");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, std::fabs(f - static_cast<double>(i) / n),
                      std::fabs(static_cast<double>(i + 1) / n - f)});
    }
    const double sn = std::sqrt(n);
    return KsResult{d, kolmogorov_q((sn + 0.12 + 0.11 / sn) * d)};
}

inline KsResult ks_test_two(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_test_two: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = std::sqrt(na * nb / (na + nb));
    return KsResult{d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// unbiased sample variance
inline double variance_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / static_cast<double>(xs.size() - 1);
}

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols: bad input");
    const double n = static_cast<double>(x.size());
    const double mx = mean_of(x), my = mean_of(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols: degenerate abscissas");
    OlsFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r_squared = (syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
    (void)n;
    return f;
}

}  // namespace roadnet
