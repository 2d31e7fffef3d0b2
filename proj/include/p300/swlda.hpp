#pragma once
// Stepwise linear discriminant analysis: forward/backward feature selection
// on partial F-tests, with the class label (1 attended, 0 not) regressed on
// the selected features by ordinary least squares.

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "p300/error.hpp"

namespace p300::swlda {

enum class Label : std::uint8_t { non_attended = 0, attended = 1 };

/// Where a feature row came from.
struct FlashRecord {
    int subject = 0;
    int char_index = 0;
    int flash_index = 0;
    Label label = Label::non_attended;
};

/// One subject's labelled flashes; row i of `features` belongs to rows[i].
struct SubjectData {
    int subject = 0;
    std::vector<FlashRecord> rows;
    Eigen::MatrixXd features;  // flashes x dims

    int dims() const { return static_cast<int>(features.cols()); }
    std::size_t size() const { return rows.size(); }
};

struct Params {
    double p_enter = 0.10;
    double p_remove = 0.15;
    int max_features = 60;

    void validate() const {
        require(p_enter > 0.0 && p_enter < 1.0, "p_enter must be in (0, 1)");
        require(p_remove > 0.0 && p_remove <= 1.0, "p_remove must be in (0, 1]");
        require(p_enter < p_remove, "p_enter must be smaller than p_remove");
        require(max_features >= 1, "max_features must be >= 1");
    }
};

struct ClassifierWeights {
    int dims = 0;
    std::vector<int> selected;    // ascending feature indices
    std::vector<double> weights;  // aligned with selected
    double intercept = 0.0;
    bool empty_selection = false;  // nothing passed p_enter
};

namespace detail {

/// Centered normal equations; RSS of any subset follows from a small solve.
struct Gram {
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    Eigen::VectorXd x_mean;
    double y_mean = 0.0;
    double yty = 0.0;
    std::size_t n = 0;
};

inline Gram gram(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Gram g;
    g.n = static_cast<std::size_t>(x.rows());
    g.x_mean = x.colwise().mean();
    g.y_mean = y.mean();
    const Eigen::MatrixXd xc = x.rowwise() - g.x_mean.transpose();
    const Eigen::VectorXd yc = y.array() - g.y_mean;
    g.xtx = xc.transpose() * xc;
    g.xty = xc.transpose() * yc;
    g.yty = yc.squaredNorm();
    return g;
}

struct Fit {
    Eigen::VectorXd beta;
    double rss = 0.0;
};

/// OLS restricted to `set`; nullopt when the subset is collinear.
inline std::optional<Fit> fit_subset(const Gram& g, const std::vector<int>& set) {
    const auto k = static_cast<Eigen::Index>(set.size());
    if (k == 0) return Fit{Eigen::VectorXd(), g.yty};
    Eigen::MatrixXd a(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        b(i) = g.xty(set[i]);
        for (Eigen::Index j = 0; j < k; ++j) a(i, j) = g.xtx(set[i], set[j]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) return std::nullopt;
    Fit f;
    f.beta = qr.solve(b);
    f.rss = std::max(0.0, g.yty - b.dot(f.beta));
    return f;
}

/// Upper-tail p of the partial F for one feature.
inline double partial_f_p(double rss_small, double rss_big, double df2) {
    if (df2 <= 0.0) return 1.0;
    if (rss_big <= 0.0) return rss_small > 0.0 ? 0.0 : 1.0;
    const double f = (rss_small - rss_big) / (rss_big / df2);
    if (!(f > 0.0)) return 1.0;
    boost::math::fisher_f dist(1.0, df2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

}  // namespace detail

inline Eigen::VectorXd label_vector(const std::vector<FlashRecord>& rows) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) y(static_cast<Eigen::Index>(i)) = rows[i].label == Label::attended;
    return y;
}

inline ClassifierWeights swlda_train(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Params& params = {}) {
    params.validate();
    require(x.rows() == y.size(), "swlda_train: feature and label counts differ");
    require(x.rows() >= 3, "swlda_train: need at least 3 flashes");
    const double pos = y.sum();
    require(pos > 0.0 && pos < static_cast<double>(y.size()), "swlda_train: both classes must be present");

    const auto g = detail::gram(x, y);
    const int dims = static_cast<int>(x.cols());
    const double n = static_cast<double>(g.n);
    std::vector<int> set;
    std::vector<char> in(dims, 0);
    auto current = *detail::fit_subset(g, set);

    for (int iter = 0; iter < 4 * dims + 8; ++iter) {
        bool changed = false;
        // forward
        if (static_cast<int>(set.size()) < params.max_features && current.rss > 0.0) {
            int best = -1;
            double best_p = 1.0;
            std::optional<detail::Fit> best_fit;
            for (int j = 0; j < dims; ++j) {
                if (in[j]) continue;
                auto trial = set;
                trial.insert(std::upper_bound(trial.begin(), trial.end(), j), j);
                auto fit = detail::fit_subset(g, trial);
                if (!fit) continue;  // collinear with the current set
                const double p = detail::partial_f_p(current.rss, fit->rss, n - static_cast<double>(trial.size()) - 1.0);
                if (best < 0 || p < best_p) {
                    best = j;
                    best_p = p;
                    best_fit = std::move(fit);
                }
            }
            if (best >= 0 && best_p < params.p_enter) {
                set.insert(std::upper_bound(set.begin(), set.end(), best), best);
                in[best] = 1;
                current = std::move(*best_fit);
                changed = true;
            }
        }
        // backward
        while (set.size() > 1) {
            int worst = -1;
            double worst_p = 0.0;
            std::optional<detail::Fit> worst_fit;
            for (std::size_t k = 0; k < set.size(); ++k) {
                auto trial = set;
                trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(k));
                auto fit = detail::fit_subset(g, trial);
                if (!fit) continue;
                const double p = detail::partial_f_p(fit->rss, current.rss, n - static_cast<double>(set.size()) - 1.0);
                if (p > worst_p) {
                    worst = static_cast<int>(k);
                    worst_p = p;
                    worst_fit = std::move(fit);
                }
            }
            if (worst < 0 || worst_p <= params.p_remove) break;
            in[set[worst]] = 0;
            set.erase(set.begin() + worst);
            current = std::move(*worst_fit);
            changed = true;
        }
        if (!changed) break;
    }

    ClassifierWeights w;
    w.dims = dims;
    w.selected = set;
    w.empty_selection = set.empty();
    w.intercept = g.y_mean;
    for (std::size_t k = 0; k < set.size(); ++k) {
        w.weights.push_back(current.beta(static_cast<Eigen::Index>(k)));
        w.intercept -= current.beta(static_cast<Eigen::Index>(k)) * g.x_mean(set[k]);
    }
    return w;
}

/// Dot product of the weights with the selected features (no intercept).
template <class Row>
double score_flash(const ClassifierWeights& w, const Row& z) {
    require(static_cast<int>(z.size()) == w.dims, "score_flash: feature dimension mismatch");
    double s = 0.0;
    for (std::size_t k = 0; k < w.selected.size(); ++k) s += w.weights[k] * z[w.selected[k]];
    return s;
}

inline Eigen::VectorXd score_all(const ClassifierWeights& w, const Eigen::MatrixXd& x) {
    require(static_cast<int>(x.cols()) == w.dims, "score_all: feature dimension mismatch");
    Eigen::VectorXd s = Eigen::VectorXd::Zero(x.rows());
    for (std::size_t k = 0; k < w.selected.size(); ++k) s += w.weights[k] * x.col(w.selected[k]);
    return s;
}

// ---------------------------------------------------------------------------
// Cross-validation

/// Held-out scores for one subject, aligned with its rows. Rows whose fold
/// was skipped carry no score.
struct HeldOutScores {
    int subject = 0;
    std::vector<double> scores;
    std::vector<Label> labels;
    std::vector<char> scored;
    std::vector<ClassifierWeights> models;  // one per trained fold (one for ASCV)
    std::vector<int> training_subjects;     // ASCV provenance
    std::vector<std::string> diagnostics;

    std::size_t scored_count() const { return static_cast<std::size_t>(std::count(scored.begin(), scored.end(), 1)); }
};

inline constexpr int kMinCharacters = 20;

/// k-fold within-subject cross-validation. Folds are contiguous blocks of
/// characters so no character's flashes straddle training and test.
inline HeldOutScores run_wscv(const SubjectData& data, int folds = 3, const Params& params = {}) {
    require(folds >= 2, "run_wscv: need at least 2 folds");
    std::vector<int> chars;
    for (const auto& r : data.rows) chars.push_back(r.char_index);
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    require(static_cast<int>(chars.size()) >= kMinCharacters,
            "run_wscv: subject " + std::to_string(data.subject) + " has fewer than 20 characters");
    require(static_cast<int>(chars.size()) >= folds, "run_wscv: more folds than characters");

    std::map<int, int> fold_of;
    for (std::size_t i = 0; i < chars.size(); ++i)
        fold_of[chars[i]] = static_cast<int>(i * folds / chars.size());

    HeldOutScores out;
    out.subject = data.subject;
    out.scores.assign(data.size(), 0.0);
    out.scored.assign(data.size(), 0);
    for (const auto& r : data.rows) out.labels.push_back(r.label);

    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train, test;
        for (std::size_t i = 0; i < data.size(); ++i)
            (fold_of[data.rows[i].char_index] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
        Eigen::MatrixXd x = data.features(train, Eigen::all);
        Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i)
            y(static_cast<Eigen::Index>(i)) = data.rows[train[i]].label == Label::attended;
        const double pos = y.sum();
        if (pos == 0.0 || pos == static_cast<double>(y.size())) {
            out.diagnostics.push_back("fold " + std::to_string(f) + " skipped: a class is absent");
            continue;
        }
        auto w = swlda_train(x, y, params);
        for (auto i : test) {
            out.scores[i] = score_flash(w, data.features.row(i));
            out.scored[i] = 1;
        }
        out.models.push_back(std::move(w));
    }
    return out;
}

/// Standardizes every column to zero mean and unit variance (columns with
/// no spread are only centered).
inline Eigen::MatrixXd zscore_columns(const Eigen::MatrixXd& x) {
    Eigen::MatrixXd out = x.rowwise() - x.colwise().mean();
    const double denom = x.rows() > 1 ? static_cast<double>(x.rows() - 1) : 1.0;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double sd = std::sqrt(out.col(j).squaredNorm() / denom);
        if (sd > 0.0) out.col(j) /= sd;
    }
    return out;
}

/// Leave-one-subject-out: train on every other subject's flashes pooled,
/// score all of the held-out subject's flashes.
inline HeldOutScores run_ascv(const std::vector<SubjectData>& all, int test_subject, const Params& params = {},
                              bool zscore = true) {
    require(all.size() >= 2, "run_ascv: need at least 2 subjects");
    const SubjectData* test = nullptr;
    Eigen::Index rows = 0;
    int dims = -1;
    for (const auto& s : all) {
        if (dims < 0) dims = s.dims();
        require(s.dims() == dims, "run_ascv: subjects differ in feature dimension");
        if (s.subject == test_subject)
            test = &s;
        else
            rows += static_cast<Eigen::Index>(s.size());
    }
    require(test != nullptr, "run_ascv: unknown test subject " + std::to_string(test_subject));

    HeldOutScores out;
    out.subject = test_subject;
    Eigen::MatrixXd x(rows, dims);
    Eigen::VectorXd y(rows);
    Eigen::Index at = 0;
    for (const auto& s : all) {
        if (s.subject == test_subject) continue;
        x.middleRows(at, static_cast<Eigen::Index>(s.size())) = zscore ? zscore_columns(s.features) : s.features;
        y.segment(at, static_cast<Eigen::Index>(s.size())) = label_vector(s.rows);
        at += static_cast<Eigen::Index>(s.size());
        out.training_subjects.push_back(s.subject);
    }
    auto w = swlda_train(x, y, params);
    const Eigen::VectorXd s = score_all(w, zscore ? zscore_columns(test->features) : test->features);
    out.scores.assign(s.data(), s.data() + s.size());
    out.scored.assign(test->size(), 1);
    for (const auto& r : test->rows) out.labels.push_back(r.label);
    out.models.push_back(std::move(w));
    return out;
}

// ---------------------------------------------------------------------------
// Labelled-feature CSV: subject,char_index,flash_index,label,f0,f1,...

inline void write_feature_csv(const std::vector<SubjectData>& cohort, std::ostream& out) {
    int dims = cohort.empty() ? 0 : cohort.front().dims();
    out << "subject,char_index,flash_index,label";
    for (int j = 0; j < dims; ++j) out << ",f" << j;
    out << '\n';
    out.precision(17);
    for (const auto& s : cohort) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto& r = s.rows[i];
            out << r.subject << ',' << r.char_index << ',' << r.flash_index << ','
                << static_cast<int>(r.label);
            for (int j = 0; j < dims; ++j) out << ',' << s.features(static_cast<Eigen::Index>(i), j);
            out << '\n';
        }
    }
}

inline std::vector<SubjectData> read_feature_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "feature file is empty");
    const auto header_cols = std::count(line.begin(), line.end(), ',') + 1;
    require(header_cols >= 5 && line.starts_with("subject,char_index,flash_index,label"),
            "feature file header must start with subject,char_index,flash_index,label");
    const int dims = static_cast<int>(header_cols - 4);

    std::map<int, std::pair<std::vector<FlashRecord>, std::vector<double>>> by_subject;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(cell, &used));
                require(used == cell.size(), "trailing characters");
            } catch (const std::exception&) {
                throw ValidationError("feature file line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        require(static_cast<long>(vals.size()) == header_cols,
                "feature file line " + std::to_string(lineno) + ": wrong column count");
        require(vals[3] == 0.0 || vals[3] == 1.0, "feature file line " + std::to_string(lineno) + ": label must be 0/1");
        FlashRecord r{static_cast<int>(vals[0]), static_cast<int>(vals[1]), static_cast<int>(vals[2]),
                      vals[3] == 1.0 ? Label::attended : Label::non_attended};
        auto& slot = by_subject[r.subject];
        slot.first.push_back(r);
        slot.second.insert(slot.second.end(), vals.begin() + 4, vals.end());
    }
    std::vector<SubjectData> out;
    for (auto& [id, rows] : by_subject) {
        SubjectData s;
        s.subject = id;
        s.rows = std::move(rows.first);
        s.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            rows.second.data(), static_cast<Eigen::Index>(s.rows.size()), dims);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace p300::swlda
