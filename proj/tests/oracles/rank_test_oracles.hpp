#pragma once
// Brute-force null distributions for the rank tests.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace p300::oracle {

/// Two-sided signed-rank p by enumerating all 2^n sign assignments of the
/// (midranked) absolute differences: P(|W+ - mu| >= |w_obs - mu|).
inline double wilcoxon_enumerated_p(const std::vector<double>& diffs) {
    const int n = static_cast<int>(diffs.size());
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) {
        double less = 0, equal = 0;
        for (int j = 0; j < n; ++j) {
            if (std::fabs(diffs[j]) < std::fabs(diffs[i])) ++less;
            else if (std::fabs(diffs[j]) == std::fabs(diffs[i])) ++equal;
        }
        r[i] = less + (equal + 1) / 2.0;
    }
    double obs = 0;
    for (int i = 0; i < n; ++i)
        if (diffs[i] > 0) obs += r[i];
    const double mu = n * (n + 1) / 4.0;
    long hit = 0;
    const long total = 1L << n;
    for (long mask = 0; mask < total; ++mask) {
        double w = 0;
        for (int i = 0; i < n; ++i)
            if (mask >> i & 1) w += r[i];
        hit += std::fabs(w - mu) >= std::fabs(obs - mu) - 1e-9;
    }
    return static_cast<double>(hit) / static_cast<double>(total);
}

/// H statistic computed from scratch (midranks by counting).
inline double kruskal_h_naive(const std::vector<std::vector<double>>& groups) {
    std::vector<double> all;
    for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
    const double n = static_cast<double>(all.size());
    auto rank_of = [&](double v) {
        double less = 0, equal = 0;
        for (double u : all) {
            if (u < v) ++less;
            else if (u == v) ++equal;
        }
        return less + (equal + 1) / 2.0;
    };
    double h = 0;
    for (const auto& g : groups) {
        double rbar = 0;
        for (double v : g) rbar += rank_of(v);
        rbar /= static_cast<double>(g.size());
        h += g.size() * (rbar - (n + 1) / 2.0) * (rbar - (n + 1) / 2.0);
    }
    h *= 12.0 / (n * (n + 1));
    double ties = 0;
    std::vector<double> s = all;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < s.size();) {
        std::size_t j = i;
        while (j < s.size() && s[j] == s[i]) ++j;
        const double t = static_cast<double>(j - i);
        ties += t * t * t - t;
        i = j;
    }
    return h / (1.0 - ties / (n * n * n - n));
}

/// Exact KW p over all n! orderings of the pooled values into the observed
/// group sizes.
inline double kruskal_permutation_p(const std::vector<std::vector<double>>& groups) {
    std::vector<double> all;
    std::vector<std::size_t> sizes;
    for (const auto& g : groups) {
        all.insert(all.end(), g.begin(), g.end());
        sizes.push_back(g.size());
    }
    const double obs = kruskal_h_naive(groups);
    std::vector<int> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    long hit = 0, total = 0;
    do {
        std::vector<std::vector<double>> perm;
        std::size_t off = 0;
        for (auto sz : sizes) {
            std::vector<double> g;
            for (std::size_t i = 0; i < sz; ++i) g.push_back(all[order[off + i]]);
            perm.push_back(std::move(g));
            off += sz;
        }
        hit += kruskal_h_naive(perm) >= obs - 1e-9;
        ++total;
    } while (std::next_permutation(order.begin(), order.end()));
    return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace p300::oracle
