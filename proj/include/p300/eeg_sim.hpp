#pragma once
// Classifier-score sources for simulated flashes: synthetic feature cohorts
// for training, and per-subject score models (Gaussian, or resampling pools
// keyed by the previous and current flash state) for typing simulations.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "p300/error.hpp"
#include "p300/swlda.hpp"
#include "p300/symbols.hpp"

namespace p300::eeg {

using swlda::Label;

enum class ScoreMode { gaussian, pooled };

inline std::string_view mode_name(ScoreMode m) { return m == ScoreMode::gaussian ? "gaussian" : "pooled"; }

inline ScoreMode parse_mode(std::string_view s) {
    if (s == "gaussian") return ScoreMode::gaussian;
    if (s == "pooled") return ScoreMode::pooled;
    throw ValidationError("unknown score mode: " + std::string(s));
}

constexpr int pool_index(Label prev, Label cur) { return 2 * static_cast<int>(prev) + static_cast<int>(cur); }

struct SubjectScoreModel {
    ScoreMode mode = ScoreMode::gaussian;
    double mu_a = 1.0, sd_a = 1.0;  // attended
    double mu_n = 0.0, sd_n = 1.0;  // non-attended
    std::array<std::vector<double>, 4> pools;  // indexed by pool_index(prev, cur)
    std::vector<std::string> diagnostics;

    void validate() const {
        require(std::isfinite(mu_a) && std::isfinite(mu_n), "score model means must be finite");
        require(sd_a > 0.0 && sd_n > 0.0 && std::isfinite(sd_a) && std::isfinite(sd_n),
                "score model standard deviations must be positive");
        if (mode == ScoreMode::pooled)
            for (const auto& p : pools) require(!p.empty(), "pooled score model has an empty pool");
    }

    /// Separation of the two score distributions in pooled-SD units.
    double dprime() const { return (mu_a - mu_n) / std::sqrt(0.5 * (sd_a * sd_a + sd_n * sd_n)); }
};

inline SubjectScoreModel gaussian_model(double mu_a, double sd_a, double mu_n, double sd_n) {
    SubjectScoreModel m;
    m.mu_a = mu_a;
    m.sd_a = sd_a;
    m.mu_n = mu_n;
    m.sd_n = sd_n;
    m.validate();
    return m;
}

/// Fits a score model from a subject's held-out score sequence (in flash
/// order). Pools are keyed by the true state of the previous and current
/// flash, so their sizes sum to n - 1.
inline SubjectScoreModel fit_score_model(const std::vector<double>& scores, const std::vector<Label>& labels,
                                         ScoreMode mode, double sd_floor = 1e-6) {
    require(scores.size() == labels.size(), "fit_score_model: scores and labels differ in length");
    require(sd_floor > 0.0, "fit_score_model: sd floor must be positive");
    std::array<double, 2> sum{}, sq{};
    std::array<std::size_t, 2> cnt{};
    for (std::size_t i = 0; i < scores.size(); ++i) {
        require(std::isfinite(scores[i]), "fit_score_model: non-finite score");
        const int c = static_cast<int>(labels[i]);
        sum[c] += scores[i];
        cnt[c]++;
    }
    require(cnt[0] >= 1 && cnt[1] >= 1, "fit_score_model: both labels must be present");
    std::array<double, 2> mean{sum[0] / cnt[0], sum[1] / cnt[1]};
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int c = static_cast<int>(labels[i]);
        sq[c] += (scores[i] - mean[c]) * (scores[i] - mean[c]);
    }
    auto sd = [&](int c) { return std::max(sd_floor, cnt[c] > 1 ? std::sqrt(sq[c] / (cnt[c] - 1)) : 0.0); };

    SubjectScoreModel m;
    m.mode = mode;
    m.mu_n = mean[0];
    m.sd_n = sd(0);
    m.mu_a = mean[1];
    m.sd_a = sd(1);
    if (mode == ScoreMode::pooled) {
        for (std::size_t i = 1; i < scores.size(); ++i) m.pools[pool_index(labels[i - 1], labels[i])].push_back(scores[i]);
        for (Label prev : {Label::non_attended, Label::attended}) {
            for (Label cur : {Label::non_attended, Label::attended}) {
                auto& pool = m.pools[pool_index(prev, cur)];
                if (!pool.empty()) continue;
                // Marginal fallback: every score of the current state.
                for (std::size_t i = 0; i < scores.size(); ++i)
                    if (labels[i] == cur) pool.push_back(scores[i]);
                m.diagnostics.push_back("pool (" + std::to_string(static_cast<int>(prev)) + "," +
                                        std::to_string(static_cast<int>(cur)) +
                                        ") empty; using the marginal pool of the current state");
            }
        }
    }
    m.validate();
    return m;
}

/// Per-worker sampler. The chain is driven by the true flash state; the
/// first draw behaves as if preceded by a non-attended flash.
struct SamplerState {
    Label prev = Label::non_attended;
    std::mt19937_64 rng;

    explicit SamplerState(std::uint64_t seed = 0) : rng(seed) {}
};

inline double draw_score(const SubjectScoreModel& model, SamplerState& state, Label cur) {
    double y;
    if (model.mode == ScoreMode::pooled) {
        const auto& pool = model.pools[pool_index(state.prev, cur)];
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        y = pool[pick(state.rng)];
    } else {
        const bool a = cur == Label::attended;
        std::normal_distribution<double> nd(a ? model.mu_a : model.mu_n, a ? model.sd_a : model.sd_n);
        y = nd(state.rng);
    }
    state.prev = cur;
    return y;
}

/// Score-pool CSV: prev_state,cur_state,score.
inline void write_pool_csv(const SubjectScoreModel& m, std::ostream& out) {
    out << "prev_state,cur_state,score\n";
    out.precision(17);
    for (int prev = 0; prev < 2; ++prev)
        for (int cur = 0; cur < 2; ++cur)
            for (double s : m.pools[2 * prev + cur]) out << prev << ',' << cur << ',' << s << '\n';
}

inline SubjectScoreModel read_pool_csv(std::istream& in, double sd_floor = 1e-6) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)) && line.starts_with("prev_state,cur_state,score"),
            "score-pool file must start with prev_state,cur_state,score");
    SubjectScoreModel m;
    m.mode = ScoreMode::pooled;
    std::array<std::vector<double>, 2> by_cur;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int prev = -1, cur = -1;
        double s = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(line);
        ss >> prev >> c1 >> cur >> c2 >> s;
        require(ss && c1 == ',' && c2 == ',' && (prev == 0 || prev == 1) && (cur == 0 || cur == 1) &&
                    std::isfinite(s),
                "score-pool file line " + std::to_string(lineno) + " is malformed");
        m.pools[2 * prev + cur].push_back(s);
        by_cur[cur].push_back(s);
    }
    for (int c = 0; c < 2; ++c) require(!by_cur[c].empty(), "score-pool file lacks one of the states");
    auto stats = [&](const std::vector<double>& v, double& mu, double& sd) {
        mu = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double q = 0;
        for (double x : v) q += (x - mu) * (x - mu);
        sd = std::max(sd_floor, v.size() > 1 ? std::sqrt(q / (v.size() - 1)) : 0.0);
    };
    stats(by_cur[0], m.mu_n, m.sd_n);
    stats(by_cur[1], m.mu_a, m.sd_a);
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Synthetic cohorts

struct CohortParams {
    int n_subjects = 20;
    double dprime_mean = 1.5;
    double dprime_sd = 0.3;
    int n_features = 32;
    int chars = 20;
    int sequences_per_char = 10;  // 12 flashes each
    int clusters = 1;
    double major_cluster_share = 0.7;  // used when clusters == 2
    double template_jitter = 0.35;     // per-subject departure from the cluster template
    std::uint64_t seed = 1;

    void validate() const {
        require(n_subjects >= 1, "cohort needs at least one subject");
        require(dprime_mean >= 0.0 && dprime_sd >= 0.0, "d' parameters must be >= 0");
        require(n_features >= 1, "cohort needs at least one feature");
        require(chars >= 1 && sequences_per_char >= 1, "cohort needs characters and sequences");
        require(clusters >= 1, "cohort needs at least one cluster");
        require(major_cluster_share > 0.0 && major_cluster_share <= 1.0, "cluster share must be in (0, 1]");
        require(template_jitter >= 0.0, "template jitter must be >= 0");
    }
};

struct SyntheticSubject {
    swlda::SubjectData data;
    double dprime = 0.0;
    int cluster = 0;
    Eigen::VectorXd direction;  // unit vector; w = direction separates classes by exactly d'
};

inline Eigen::VectorXd random_unit(std::mt19937_64& rng, int dims) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(dims);
    for (int i = 0; i < dims; ++i) v(i) = g(rng);
    return v / v.norm();
}

/// Cluster of subject i: the first round(share * n) subjects belong to
/// cluster 0, the rest are spread over the remaining clusters.
inline int cluster_of(int i, const CohortParams& p) {
    if (p.clusters == 1) return 0;
    const int major = static_cast<int>(std::lround(p.major_cluster_share * p.n_subjects));
    if (i < major) return 0;
    return 1 + (i - major) % (p.clusters - 1);
}

/// Row/column flash labels for one character: per sequence a random order of
/// the 12 groups, of which the target's row and column are attended.
inline std::vector<Label> flash_labels(std::mt19937_64& rng, int sequences) {
    std::uniform_int_distribution<int> cell(0, kNumSymbols - 1);
    const int target = cell(rng);
    const int row = target / kBoardCols, col = kBoardRows + target % kBoardCols;
    std::vector<Label> out;
    std::array<int, kGroupsPerSequence> order;
    for (int s = 0; s < sequences; ++s) {
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (int g : order) out.push_back(g == row || g == col ? Label::attended : Label::non_attended);
    }
    return out;
}

/// Attended flashes are d' * u + noise, others noise alone, with isotropic
/// unit-variance noise; projecting on u separates the class means by d'.
inline std::vector<SyntheticSubject> gen_synthetic_cohort(const CohortParams& p) {
    p.validate();
    std::mt19937_64 rng(p.seed);
    std::vector<Eigen::VectorXd> centers;
    for (int c = 0; c < p.clusters; ++c) centers.push_back(random_unit(rng, p.n_features));

    std::normal_distribution<double> dprime(p.dprime_mean, p.dprime_sd);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<SyntheticSubject> cohort;
    for (int i = 0; i < p.n_subjects; ++i) {
        SyntheticSubject s;
        s.cluster = cluster_of(i, p);
        s.dprime = std::max(0.0, dprime(rng));
        Eigen::VectorXd dir = centers[s.cluster] + p.template_jitter * random_unit(rng, p.n_features);
        s.direction = dir / dir.norm();
        s.data.subject = i;

        const int per_char = p.sequences_per_char * kGroupsPerSequence;
        const int total = p.chars * per_char;
        s.data.features.resize(total, p.n_features);
        for (int c = 0; c < p.chars; ++c) {
            const auto labels = flash_labels(rng, p.sequences_per_char);
            for (int f = 0; f < per_char; ++f) {
                const int row = c * per_char + f;
                s.data.rows.push_back({i, c, f, labels[f]});
                for (int j = 0; j < p.n_features; ++j) s.data.features(row, j) = noise(rng);
                if (labels[f] == Label::attended) s.data.features.row(row) += s.dprime * s.direction.transpose();
            }
        }
        cohort.push_back(std::move(s));
    }
    return cohort;
}

inline std::vector<swlda::SubjectData> cohort_data(const std::vector<SyntheticSubject>& cohort) {
    std::vector<swlda::SubjectData> out;
    for (const auto& s : cohort) out.push_back(s.data);
    return out;
}

}  // namespace p300::eeg
