#pragma once
// Nonparametric tests for comparing schemes across subjects, plus the
// summary numbers behind a violin plot.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include "json.hpp"

#include "p300/error.hpp"

namespace p300::stats {

struct TestReport {
    double statistic = 0.0;
    double p_value = 1.0;
    std::string method;
    std::vector<int> n;
    std::vector<std::string> flags;
};

inline nlohmann::json report_to_json(const TestReport& r) {
    return {{"statistic", r.statistic}, {"p_value", r.p_value}, {"method", r.method}, {"n", r.n}, {"flags", r.flags}};
}

inline double mean(const std::vector<double>& x) {
    require(!x.empty(), "mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1); 0 for a single value.
inline double sd(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double q = 0.0;
    for (double v : x) q += (v - m) * (v - m);
    return std::sqrt(q / static_cast<double>(x.size() - 1));
}

/// Midranks (1-based) of x.
inline std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

/// Sum of t^3 - t over tie groups.
inline double tie_term(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size();) {
        std::size_t j = i;
        while (j < x.size() && x[j] == x[i]) ++j;
        const double t = static_cast<double>(j - i);
        s += t * t * t - t;
        i = j;
    }
    return s;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

// ---------------------------------------------------------------------------
// Normality

/// Shapiro-Wilk W with Royston's polynomial approximations for the
/// coefficients and the p-value; 3 <= n <= 5000.
inline TestReport shapiro_wilk(std::vector<double> x) {
    const int n = static_cast<int>(x.size());
    require(n >= 3 && n <= 5000, "Shapiro-Wilk needs 3..5000 values");
    std::sort(x.begin(), x.end());
    require(x.front() < x.back(), "Shapiro-Wilk: sample is constant");

    std::vector<double> m(n), a(n);
    double mm = 0.0;
    for (int i = 0; i < n; ++i) {
        m[i] = normal_quantile((i + 1 - 0.375) / (n + 0.25));
        mm += m[i] * m[i];
    }
    if (n == 3) {
        a[0] = -std::sqrt(0.5);
        a[2] = std::sqrt(0.5);
    } else {
        const double u = 1.0 / std::sqrt(static_cast<double>(n));
        const double rn = std::sqrt(mm);
        const double an = m[n - 1] / rn + 0.221157 * u - 0.147981 * u * u - 2.071190 * std::pow(u, 3) +
                          4.434685 * std::pow(u, 4) - 2.706056 * std::pow(u, 5);
        double phi;
        int lo = 1;
        a[n - 1] = an;
        a[0] = -an;
        if (n > 5) {
            const double an1 = m[n - 2] / rn + 0.042981 * u - 0.293762 * u * u - 1.752461 * std::pow(u, 3) +
                               5.682633 * std::pow(u, 4) - 3.582633 * std::pow(u, 5);
            phi = (mm - 2 * m[n - 1] * m[n - 1] - 2 * m[n - 2] * m[n - 2]) / (1 - 2 * an * an - 2 * an1 * an1);
            a[n - 2] = an1;
            a[1] = -an1;
            lo = 2;
        } else {
            phi = (mm - 2 * m[n - 1] * m[n - 1]) / (1 - 2 * an * an);
        }
        for (int i = lo; i < n - lo; ++i) a[i] = m[i] / std::sqrt(phi);
    }

    const double xbar = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double num = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        num += a[i] * x[i];
        ss += (x[i] - xbar) * (x[i] - xbar);
    }
    const double w = std::min(1.0, num * num / ss);

    double p;
    if (n == 3) {
        constexpr double pi = 3.14159265358979323846;
        p = std::max(0.0, 6.0 / pi * (std::asin(std::sqrt(w)) - std::asin(std::sqrt(0.75))));
    } else if (n <= 11) {
        const double g = -2.273 + 0.459 * n;
        const double mu = 0.5440 - 0.39978 * n + 0.025054 * n * n - 0.0006714 * n * n * n;
        const double sigma = std::exp(1.3822 - 0.77857 * n + 0.062767 * n * n - 0.0020322 * n * n * n);
        const double lw = std::log(1.0 - w);
        p = g - lw <= 0.0 ? 0.0 : 1.0 - normal_cdf((-std::log(g - lw) - mu) / sigma);
    } else {
        const double ln = std::log(static_cast<double>(n));
        const double mu = 0.0038915 * ln * ln * ln - 0.083751 * ln * ln - 0.31082 * ln - 1.5861;
        const double sigma = std::exp(0.0030302 * ln * ln - 0.082676 * ln - 0.4803);
        p = 1.0 - normal_cdf((std::log(1.0 - w) - mu) / sigma);
    }
    return {w, std::clamp(p, 0.0, 1.0), "shapiro-wilk (royston)", {n}, {}};
}

/// Kolmogorov limiting survival function P(K > lambda).
inline double kolmogorov_q(double lambda) {
    if (lambda < 0.2) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

/// One-sample Kolmogorov-Smirnov distance to the normal fitted by sample
/// mean and SD; asymptotic p with Stephens' small-n correction. The fit is
/// not accounted for (this is not the Lilliefors test), so p is conservative.
inline TestReport ks_normality(std::vector<double> x) {
    const int n = static_cast<int>(x.size());
    require(n >= 5, "Kolmogorov-Smirnov needs at least 5 values");
    const double mu = mean(x), s = sd(x);
    require(s > 0.0, "Kolmogorov-Smirnov: sample is constant");
    std::sort(x.begin(), x.end());
    double d = 0.0;
    for (int i = 0; i < n; ++i) {
        const double f = normal_cdf((x[i] - mu) / s);
        d = std::max({d, (i + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double rn = std::sqrt(static_cast<double>(n));
    return {d, kolmogorov_q((rn + 0.12 + 0.11 / rn) * d), "kolmogorov-smirnov vs fitted normal (asymptotic)", {n}, {}};
}

// ---------------------------------------------------------------------------
// Kruskal-Wallis

inline double kruskal_h(const std::vector<std::vector<double>>& groups) {
    std::vector<double> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    const double big_n = static_cast<double>(all.size());
    const auto r = ranks(all);
    double s = 0.0;
    std::size_t off = 0;
    for (const auto& g : groups) {
        double rs = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) rs += r[off + i];
        s += rs * rs / static_cast<double>(g.size());
        off += g.size();
    }
    const double h = 12.0 / (big_n * (big_n + 1.0)) * s - 3.0 * (big_n + 1.0);
    const double c = 1.0 - tie_term(all) / (big_n * big_n * big_n - big_n);
    return c > 0.0 ? h / c : 0.0;
}

inline constexpr int kKruskalExactMaxN = 8;

/// H with tie correction. For a total of at most 8 values the p-value is the
/// exact permutation probability P(H >= h_obs) over all distinct assignments
/// of the pooled values to groups of the observed sizes; above that it is
/// the chi-squared approximation with k - 1 degrees of freedom.
inline TestReport kruskal_wallis(const std::vector<std::vector<double>>& groups) {
    require(groups.size() >= 2, "Kruskal-Wallis needs at least 2 groups");
    std::vector<int> sizes;
    std::vector<double> all;
    for (const auto& g : groups) {
        require(!g.empty(), "Kruskal-Wallis: empty group");
        sizes.push_back(static_cast<int>(g.size()));
        all.insert(all.end(), g.begin(), g.end());
    }
    const int big_n = static_cast<int>(all.size());
    require(big_n >= 5, "Kruskal-Wallis needs at least 5 values in total");
    TestReport rep;
    rep.n = sizes;
    if (tie_term(all) == static_cast<double>(big_n) * big_n * big_n - big_n) {
        rep.method = "kruskal-wallis";
        rep.flags.push_back("all values tied");
        return rep;
    }
    rep.statistic = kruskal_h(groups);

    if (big_n <= kKruskalExactMaxN) {
        rep.method = "kruskal-wallis (exact permutation)";
        // Enumerate group labelings of positions as a multiset permutation.
        std::vector<int> label;
        for (std::size_t g = 0; g < sizes.size(); ++g) label.insert(label.end(), sizes[g], static_cast<int>(g));
        long hit = 0, total = 0;
        const double tol = 1e-9 * std::max(1.0, std::fabs(rep.statistic));
        std::vector<std::vector<double>> perm(groups.size());
        do {
            for (auto& g : perm) g.clear();
            for (int i = 0; i < big_n; ++i) perm[label[i]].push_back(all[i]);
            hit += kruskal_h(perm) >= rep.statistic - tol;
            ++total;
        } while (std::next_permutation(label.begin(), label.end()));
        rep.p_value = static_cast<double>(hit) / static_cast<double>(total);
    } else {
        rep.method = "kruskal-wallis (chi-squared)";
        boost::math::chi_squared chi(static_cast<double>(groups.size() - 1));
        rep.p_value = boost::math::cdf(boost::math::complement(chi, std::max(0.0, rep.statistic)));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank

inline constexpr int kWilcoxonExactMaxN = 25;

/// Paired signed-rank test on a - b. Zero differences are dropped and
/// flagged; ties in |d| get midranks. Exact two-sided p (sign-flip null) for
/// n <= 25 after dropping zeros, else the normal approximation with tie
/// correction and continuity correction. The statistic is min(W+, W-).
inline TestReport wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size(), "Wilcoxon: samples differ in length");
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) d.push_back(a[i] - b[i]);
    TestReport rep;
    const int n = static_cast<int>(d.size());
    rep.n = {n};
    if (n < static_cast<int>(a.size()))
        rep.flags.push_back(std::to_string(a.size() - d.size()) + " zero differences dropped");
    if (n == 0) {
        rep.method = "wilcoxon signed-rank";
        rep.flags.push_back("all differences zero");
        return rep;
    }
    require(n >= 5, "Wilcoxon needs at least 5 nonzero differences");

    std::vector<double> absd(n);
    for (int i = 0; i < n; ++i) absd[i] = std::fabs(d[i]);
    const auto r = ranks(absd);
    double wplus = 0.0;
    for (int i = 0; i < n; ++i)
        if (d[i] > 0) wplus += r[i];
    const double total = n * (n + 1) / 2.0;
    rep.statistic = std::min(wplus, total - wplus);

    if (n <= kWilcoxonExactMaxN) {
        rep.method = "wilcoxon signed-rank (exact)";
        // Doubled ranks are integers even with midranks.
        std::vector<int> r2(n);
        int sum2 = 0;
        for (int i = 0; i < n; ++i) sum2 += (r2[i] = static_cast<int>(std::lround(2.0 * r[i])));
        std::vector<double> dist(sum2 + 1, 0.0);
        dist[0] = 1.0;
        for (int i = 0; i < n; ++i)
            for (int s = sum2; s >= r2[i]; --s) dist[s] += dist[s - r2[i]];
        const int w2 = static_cast<int>(std::lround(2.0 * rep.statistic));
        double tail = 0.0;
        for (int s = 0; s <= w2; ++s) tail += dist[s];
        rep.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, n));
    } else {
        rep.method = "wilcoxon signed-rank (normal approximation)";
        const double mu = total / 2.0;
        const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term(absd) / 48.0;
        const double z = (std::fabs(wplus - mu) - 0.5) / std::sqrt(var);
        rep.p_value = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::max(0.0, z))));
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Violin summary

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& s, double q) {
    require(!s.empty(), "quantile of an empty sample");
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

struct ViolinSummary {
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0, sd = 0;
    int n = 0;
    std::vector<double> edges;     // bins + 1 values
    std::vector<double> densities; // integrates to 1
};

/// Quartile block plus a histogram density with Freedman-Diaconis bins.
inline ViolinSummary violin(std::vector<double> x) {
    require(!x.empty(), "violin summary of an empty sample");
    std::sort(x.begin(), x.end());
    ViolinSummary v;
    v.n = static_cast<int>(x.size());
    v.min = x.front();
    v.max = x.back();
    v.q1 = quantile_sorted(x, 0.25);
    v.median = quantile_sorted(x, 0.5);
    v.q3 = quantile_sorted(x, 0.75);
    v.mean = mean(x);
    v.sd = sd(x);
    const double range = v.max - v.min;
    const double h = 2.0 * (v.q3 - v.q1) / std::cbrt(static_cast<double>(v.n));
    int bins = 1;
    if (range > 0.0 && h > 0.0) bins = std::clamp(static_cast<int>(std::ceil(range / h)), 1, 1000);
    const double width = range > 0.0 ? range / bins : 1.0;
    const double lo = range > 0.0 ? v.min : v.min - 0.5;
    for (int i = 0; i <= bins; ++i) v.edges.push_back(lo + i * width);
    std::vector<int> counts(bins, 0);
    for (double xi : x) counts[std::min(bins - 1, static_cast<int>((xi - lo) / width))]++;
    for (int c : counts) v.densities.push_back(c / (v.n * width));
    return v;
}

inline nlohmann::json violin_to_json(const ViolinSummary& v) {
    return {{"n", v.n},       {"min", v.min}, {"q1", v.q1},     {"median", v.median},
            {"q3", v.q3},     {"max", v.max}, {"mean", v.mean}, {"sd", v.sd},
            {"edges", v.edges}, {"densities", v.densities}};
}

}  // namespace p300::stats
