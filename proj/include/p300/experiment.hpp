#pragma once
// Scheme comparison over a cohort: every (condition, subject, training mode)
// cell is an independent simulation with its own derived seed, run on a
// small worker pool.

#include <atomic>
#include <cstdint>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "p300/eeg_sim.hpp"
#include "p300/error.hpp"
#include "p300/sim.hpp"
#include "p300/stats.hpp"
#include "p300/swlda.hpp"

namespace p300::experiment {

enum class Training { wscv, ascv };

inline std::string_view training_name(Training t) { return t == Training::wscv ? "wscv" : "ascv"; }

inline Training parse_training(std::string_view s) {
    if (s == "wscv") return Training::wscv;
    if (s == "ascv") return Training::ascv;
    throw ValidationError("unknown training mode '" + std::string(s) + "'");
}

struct Condition {
    board::Scheme scheme = board::Scheme::diagonal;
    sim::Predictor predictor = sim::Predictor::none;

    std::string label() const {
        std::string s(board::scheme_name(scheme));
        if (predictor != sim::Predictor::none) s += "+" + std::string(sim::predictor_name(predictor));
        return s;
    }
};

/// "diagonal", "diagonal+trellis", "random+layered", ...
inline Condition parse_condition(std::string_view s) {
    Condition c;
    const auto plus = s.find('+');
    c.scheme = board::parse_scheme(s.substr(0, plus));
    if (plus != std::string_view::npos) c.predictor = sim::parse_predictor(s.substr(plus + 1));
    return c;
}

/// Score model fitted to one subject's held-out classifier scores.
inline eeg::SubjectScoreModel model_from_held_out(const swlda::HeldOutScores& h, eeg::ScoreMode mode) {
    std::vector<double> s;
    std::vector<swlda::Label> l;
    for (std::size_t i = 0; i < h.scores.size(); ++i) {
        if (!h.scored[i]) continue;
        s.push_back(h.scores[i]);
        l.push_back(h.labels[i]);
    }
    return eeg::fit_score_model(s, l, mode);
}

struct FittedModels {
    std::vector<eeg::SubjectScoreModel> models;  // by subject position
    std::vector<std::string> diagnostics;
};

inline FittedModels fit_models(const std::vector<swlda::SubjectData>& data, Training training, eeg::ScoreMode mode,
                               int folds = 3, const swlda::Params& params = {}) {
    FittedModels out;
    for (const auto& d : data) {
        const auto held = training == Training::wscv ? swlda::run_wscv(d, folds, params)
                                                     : swlda::run_ascv(data, d.subject, params);
        for (const auto& msg : held.diagnostics)
            out.diagnostics.push_back("subject " + std::to_string(d.subject) + ": " + msg);
        auto m = model_from_held_out(held, mode);
        for (const auto& msg : m.diagnostics)
            out.diagnostics.push_back("subject " + std::to_string(d.subject) + ": " + msg);
        out.models.push_back(std::move(m));
    }
    return out;
}

struct CellResult {
    int condition = 0;
    Training training = Training::wscv;
    int subject = 0;
    std::uint64_t seed = 0;
    double itr = 0.0;
    double retry = 0.0;
    int selections = 0;
    int flashes = 0;
    int abandoned = 0;
    int items = 0;
    bool transcript_matches = false;
};

struct ComparisonSpec {
    std::vector<Condition> conditions;
    std::vector<Training> trainings{Training::wscv, Training::ascv};
    sim::SimConfig sim;  // scheme and predictor are overridden per condition
    std::uint64_t seed = 1;
    int workers = 1;

    void validate() const {
        require(conditions.size() >= 2, "a comparison needs at least 2 conditions");
        require(!trainings.empty(), "a comparison needs at least 1 training mode");
        require(workers >= 1, "workers must be >= 1");
        sim.validate();
    }
};

struct GroupSummary {
    int condition = 0;
    Training training = Training::wscv;
    stats::ViolinSummary itr;
    double retry_mean = 0.0;
    int abandoned = 0;
};

struct PairwiseTest {
    int a = 0, b = 0;
    Training training = Training::wscv;
    stats::TestReport report;
};

struct ComparisonResult {
    std::vector<Condition> conditions;
    std::vector<CellResult> cells;
    std::vector<GroupSummary> summaries;
    std::vector<PairwiseTest> pairwise;

    std::vector<double> itr_series(int condition, Training t) const {
        std::vector<double> out;
        for (const auto& c : cells)
            if (c.condition == condition && c.training == t) out.push_back(c.itr);
        return out;
    }
    const GroupSummary& summary(int condition, Training t) const {
        for (const auto& s : summaries)
            if (s.condition == condition && s.training == t) return s;
        throw ValidationError("no summary for condition " + std::to_string(condition));
    }
    const PairwiseTest* pair(int a, int b, Training t) const {
        for (const auto& p : pairwise)
            if (p.training == t && ((p.a == a && p.b == b) || (p.a == b && p.b == a))) return &p;
        return nullptr;
    }
};

inline std::uint64_t cell_seed(std::uint64_t master, int subject, const Condition& c, Training t) {
    return sim::derive_seed(master, {static_cast<std::uint64_t>(subject), static_cast<std::uint64_t>(c.scheme),
                                     static_cast<std::uint64_t>(c.predictor), static_cast<std::uint64_t>(t)});
}

/// Runs `jobs` tasks on `workers` threads; each task writes only its own slot.
inline void parallel_for(std::size_t jobs, int workers, const std::function<void(std::size_t)>& task) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto loop = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs;) {
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(jobs)));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(loop);
    loop();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

/// `models[t]` holds one score model per subject for trainings[t].
inline ComparisonResult run_comparison(const ComparisonSpec& spec, const sim::Language& lang,
                                       const std::vector<std::vector<eeg::SubjectScoreModel>>& models,
                                       const std::vector<int>& subject_ids, const std::string& goal) {
    spec.validate();
    require(models.size() == spec.trainings.size(), "one model set per training mode");
    for (const auto& m : models) require(m.size() == subject_ids.size(), "one score model per subject");

    ComparisonResult res;
    res.conditions = spec.conditions;
    for (std::size_t t = 0; t < spec.trainings.size(); ++t)
        for (std::size_t c = 0; c < spec.conditions.size(); ++c)
            for (std::size_t s = 0; s < subject_ids.size(); ++s) {
                CellResult cell;
                cell.condition = static_cast<int>(c);
                cell.training = spec.trainings[t];
                cell.subject = subject_ids[s];
                cell.seed = cell_seed(spec.seed, cell.subject, spec.conditions[c], cell.training);
                res.cells.push_back(cell);
            }

    parallel_for(res.cells.size(), spec.workers, [&](std::size_t i) {
        auto& cell = res.cells[i];
        const std::size_t t = std::find(spec.trainings.begin(), spec.trainings.end(), cell.training) -
                              spec.trainings.begin();
        const std::size_t s =
            std::find(subject_ids.begin(), subject_ids.end(), cell.subject) - subject_ids.begin();
        sim::SimConfig cfg = spec.sim;
        cfg.scheme = spec.conditions[cell.condition].scheme;
        cfg.predictor = spec.conditions[cell.condition].predictor;
        const auto r = sim::simulate_subject(cfg, lang, models[t][s], goal, cell.seed);
        cell.itr = r.itr;
        cell.retry = r.retry;
        cell.selections = static_cast<int>(r.selections.size());
        cell.flashes = r.total_flashes();
        cell.abandoned = r.abandoned();
        cell.items = static_cast<int>(r.items.size());
        cell.transcript_matches = r.transcript == r.goal;
    });

    for (auto t : spec.trainings) {
        for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
            GroupSummary g;
            g.condition = static_cast<int>(c);
            g.training = t;
            g.itr = stats::violin(res.itr_series(g.condition, t));
            std::vector<double> retry;
            for (const auto& cell : res.cells)
                if (cell.condition == g.condition && cell.training == t) {
                    retry.push_back(cell.retry);
                    g.abandoned += cell.abandoned;
                }
            g.retry_mean = stats::mean(retry);
            res.summaries.push_back(std::move(g));
        }
        for (std::size_t a = 0; a < spec.conditions.size(); ++a)
            for (std::size_t b = a + 1; b < spec.conditions.size(); ++b) {
                PairwiseTest p;
                p.a = static_cast<int>(a);
                p.b = static_cast<int>(b);
                p.training = t;
                const auto xa = res.itr_series(p.a, t), xb = res.itr_series(p.b, t);
                try {
                    p.report = stats::wilcoxon_signed_rank(xa, xb);
                } catch (const ValidationError& e) {
                    p.report.method = "wilcoxon signed-rank";
                    p.report.p_value = 1.0;
                    p.report.flags.push_back(e.what());
                }
                res.pairwise.push_back(std::move(p));
            }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Output

/// One row per subject x condition x training mode.
inline void write_results_csv(const ComparisonResult& r, std::ostream& out) {
    out << "subject,condition,training,seed,itr,retry_rate,selections,flashes,abandoned,items,transcript_matches\n";
    for (const auto& c : r.cells)
        out << c.subject << ',' << r.conditions[c.condition].label() << ',' << training_name(c.training) << ','
            << c.seed << ',' << c.itr << ',' << c.retry << ',' << c.selections << ',' << c.flashes << ','
            << c.abandoned << ',' << c.items << ',' << (c.transcript_matches ? 1 : 0) << '\n';
}

/// Mean +- SD table: one row per condition, one column pair per training.
inline void write_table_csv(const ComparisonResult& r, const std::vector<Training>& trainings, std::ostream& out) {
    out << "condition";
    for (auto t : trainings) out << ',' << training_name(t) << "_itr_mean," << training_name(t) << "_itr_sd,"
                                 << training_name(t) << "_itr";
    out << '\n';
    for (std::size_t c = 0; c < r.conditions.size(); ++c) {
        out << r.conditions[c].label();
        for (auto t : trainings) {
            const auto& s = r.summary(static_cast<int>(c), t);
            std::ostringstream pm;
            pm.setf(std::ios::fixed);
            pm.precision(2);
            pm << s.itr.mean << " +- " << s.itr.sd;
            out << ',' << s.itr.mean << ',' << s.itr.sd << ',' << pm.str();
        }
        out << '\n';
    }
}

inline nlohmann::json comparison_to_json(const ComparisonResult& r) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : r.summaries)
        groups.push_back({{"condition", r.conditions[g.condition].label()},
                          {"training", training_name(g.training)},
                          {"itr", stats::violin_to_json(g.itr)},
                          {"retry_rate_mean", g.retry_mean},
                          {"abandoned_items", g.abandoned}});
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : r.pairwise)
        pairs.push_back({{"a", r.conditions[p.a].label()},
                         {"b", r.conditions[p.b].label()},
                         {"training", training_name(p.training)},
                         {"wilcoxon", stats::report_to_json(p.report)}});
    return {{"groups", groups}, {"pairwise", pairs}};
}

}  // namespace p300::experiment
