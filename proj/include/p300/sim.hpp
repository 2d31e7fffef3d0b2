#pragma once
// Closed-loop typing simulation: a simulated subject copies a goal text on
// the speller, one selection at a time, and the run is scored as ITR and
// retry rate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "p300/decoder.hpp"
#include "p300/eeg_sim.hpp"
#include "p300/error.hpp"
#include "p300/flashboard.hpp"
#include "p300/lm.hpp"
#include "p300/symbols.hpp"
#include "p300/word_predictor.hpp"

namespace p300::sim {

enum class Predictor { none, trellis, layered };

inline std::string_view predictor_name(Predictor p) {
    switch (p) {
        case Predictor::none: return "none";
        case Predictor::trellis: return "trellis";
        case Predictor::layered: return "layered";
    }
    return "?";
}

inline Predictor parse_predictor(std::string_view s) {
    if (s == "none") return Predictor::none;
    if (s == "trellis") return Predictor::trellis;
    if (s == "layered") return Predictor::layered;
    throw ValidationError("unknown predictor '" + std::string(s) + "'");
}

/// How the suggestion slots get prior mass.
///  - fixed: total `suggestion_mass`, split by score; characters scaled by
///    the remainder
///  - joint: each word's own probability, taken from the character that
///    leads to it
enum class SlotMass { fixed, joint };

inline std::string_view slot_mass_name(SlotMass m) { return m == SlotMass::fixed ? "fixed" : "joint"; }

inline SlotMass parse_slot_mass(std::string_view s) {
    if (s == "fixed") return SlotMass::fixed;
    if (s == "joint") return SlotMass::joint;
    throw ValidationError("unknown slot mass mode '" + std::string(s) + "'");
}

struct SimConfig {
    board::Scheme scheme = board::Scheme::diagonal;
    Predictor predictor = Predictor::none;
    decode::DecoderConfig decoder;
    double soa = 0.125;   // seconds between flash onsets
    double pause = 0.0;   // seconds between selections
    double suggestion_mass = 0.5;
    SlotMass slot_mass = SlotMass::joint;
    int suggestions = predict::kMaxSuggestions;
    predict::BoardPriorOptions prior;
    predict::TrellisOptions trellis;

    void validate() const {
        decoder.validate();
        require(soa > 0.0, "soa must be > 0");
        require(pause >= 0.0, "pause must be >= 0");
        require(suggestion_mass >= 0.0 && suggestion_mass <= 1.0, "suggestion_mass must be in [0, 1]");
        require(suggestions >= 1 && suggestions <= predict::kMaxSuggestions, "suggestions must be in [1, 6]");
    }
};

/// Language side of the simulation, shared by every cell of a run. Priors
/// and suggestion lists depend only on the typed text, so they are memoized;
/// most subjects walk the same on-track prefixes.
class Language {
public:
    Language(const lm::ModelStack& stack, const predict::ExternalPredictor* external = nullptr,
             predict::TrellisOptions trellis = {}, predict::ErrorSink on_error = predict::log_to_stderr)
        : stack_(&stack), external_(external), trellis_(trellis), on_error_(std::move(on_error)) {}

    const lm::ModelStack& stack() const { return *stack_; }
    bool has_external() const { return external_ != nullptr; }

    CharVector char_prior(const std::string& history) const {
        {
            std::lock_guard lock(mu_);
            if (auto it = priors_.find(history); it != priors_.end()) return it->second;
        }
        const CharVector p = lm::char_prior(*stack_, history);
        std::lock_guard lock(mu_);
        priors_.emplace(history, p);
        return p;
    }

    std::vector<predict::Suggestion> suggestions(Predictor kind, std::string_view context, std::string_view prefix,
                                                 int n) const {
        if (kind == Predictor::none) return {};
        std::string key;
        key.reserve(context.size() + prefix.size() + 8);
        key.append(predictor_name(kind)).push_back('|');
        key.append(std::to_string(n)).push_back('|');
        key.append(context).push_back('|');
        key.append(prefix);
        {
            std::lock_guard lock(mu_);
            if (auto it = words_.find(key); it != words_.end()) return it->second;
        }
        auto out = kind == Predictor::trellis
                       ? predict::trellis_complete(*stack_, context, prefix, static_cast<std::size_t>(n), trellis_)
                       : predict::layered_predict(external_, *stack_, context, prefix, n, trellis_, on_error_);
        std::lock_guard lock(mu_);
        words_.emplace(std::move(key), out);
        return out;
    }

private:
    const lm::ModelStack* stack_;
    const predict::ExternalPredictor* external_;
    predict::TrellisOptions trellis_;
    predict::ErrorSink on_error_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, CharVector> priors_;
    mutable std::unordered_map<std::string, std::vector<predict::Suggestion>> words_;
};

struct SelectionRecord {
    int item = 0;  // goal position the subject was working on
    SymbolId intended;
    SymbolId selected;
    int flashes = 0;
    double seconds = 0.0;
    bool correct = false;
    bool backspace = false;
    bool word = false;
    int advanced = 0;
};

struct ItemRecord {
    int flashes = 0;
    double seconds = 0.0;
    int attempts = 0;
    bool abandoned = false;
};

struct SimResult {
    std::string goal;
    std::string transcript;
    std::vector<SelectionRecord> selections;
    std::vector<ItemRecord> items;
    double itr = 0.0;
    double retry = 0.0;

    int abandoned() const {
        int n = 0;
        for (const auto& it : items) n += it.abandoned;
        return n;
    }
    int total_flashes() const {
        int n = 0;
        for (const auto& s : selections) n += s.flashes;
        return n;
    }
};

struct ItrInputs {
    int n = kNumSymbols;
    double t = 0.0;    // seconds per correctly advanced character
    double p_f = 0.0;  // selection error probability
    double t_r = 0.0;  // time of one character selection
    double t_c = 0.0;  // mean backspace time
};

/// Bits per minute: log2(N + 1) / (T + P_f (T_r + T_c)) * 60.
inline double itr(const ItrInputs& in) {
    require(in.n >= 1, "ITR grid size must be >= 1");
    require(in.t >= 0.0 && in.t_r >= 0.0 && in.t_c >= 0.0, "ITR times must be >= 0");
    require(in.p_f >= 0.0 && in.p_f <= 1.0, "ITR error probability must be in [0, 1]");
    const double denom = in.t + in.p_f * (in.t_r + in.t_c);
    require(denom > 0.0, "ITR denominator is zero");
    return std::log2(static_cast<double>(in.n) + 1.0) / denom * 60.0;
}

/// ITR terms from a run's selections: T is the correct forward time per
/// character advanced, T_r the mean time of a correct single-character
/// selection, T_c the mean backspace time and P_f the share of selections
/// that were wrong. Returns nullopt when no selection advanced the text.
inline std::optional<ItrInputs> itr_inputs(const std::vector<SelectionRecord>& sel) {
    double forward_s = 0.0, char_s = 0.0, back_s = 0.0;
    int advanced = 0, errors = 0, backs = 0, chars = 0;
    for (const auto& s : sel) {
        if (!s.correct) ++errors;
        if (s.backspace) {
            back_s += s.seconds;
            ++backs;
        } else if (s.correct) {
            forward_s += s.seconds;
            advanced += s.advanced;
            if (!s.word) {
                char_s += s.seconds;
                ++chars;
            }
        }
    }
    if (advanced <= 0) return std::nullopt;
    ItrInputs in;
    in.t = forward_s / advanced;
    in.p_f = static_cast<double>(errors) / static_cast<double>(sel.size());
    in.t_r = chars > 0 ? char_s / chars : in.t;
    in.t_c = backs > 0 ? back_s / backs : in.t_r;
    return in;
}

/// Subject ITR: the rate over completed work, with abandoned items counted
/// as ITR 0 in the per-item average.
inline double subject_itr(const SimResult& r) {
    const auto in = itr_inputs(r.selections);
    if (!in || r.items.empty()) return 0.0;
    const double kept = static_cast<double>(r.items.size() - r.abandoned()) / static_cast<double>(r.items.size());
    return itr(*in) * kept;
}

inline double retry_rate(const std::vector<SelectionRecord>& sel) {
    require(!sel.empty(), "retry rate needs at least one selection");
    int backs = 0;
    for (const auto& s : sel) backs += s.backspace;
    return static_cast<double>(backs) / static_cast<double>(sel.size());
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline nlohmann::json members_json(const board::SymbolSet& set) {
    auto arr = nlohmann::json::array();
    for (int i = 0; i < kNumSymbols; ++i)
        if (set.test(i)) arr.push_back(symbol_label(SymbolId{i}));
    return arr;
}

}  // namespace detail

/// Seed for one cell, independent of run order.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
    std::uint64_t x = master;
    std::uint64_t out = detail::splitmix64(x);
    for (auto p : parts) {
        x ^= p + 0x632BE59BD9B4E019ULL + (out << 6) + (out >> 2);
        out = detail::splitmix64(x);
    }
    return out;
}

/// Normalizes a target text into a goal ending in a word space, so that the
/// last word can be finished by a completion.
inline std::string make_goal(std::string_view target, std::size_t char_budget = 0) {
    std::string t = lm::normalize_text(target);
    if (char_budget > 0 && t.size() > char_budget) {
        t.resize(char_budget);
        while (!t.empty() && t.back() == ' ') t.pop_back();
    }
    require(!t.empty(), "target text is empty after normalization");
    if (t.back() != ' ') t.push_back(' ');
    return t;
}

/// Types `goal` to the end. Every flash score is drawn from `model` given
/// whether the intended symbol was lit; `trace`, when given, receives one
/// JSON line per flash.
inline SimResult simulate_subject(const SimConfig& cfg, const Language& lang, const eeg::SubjectScoreModel& model,
                                  const std::string& goal, std::uint64_t seed, std::ostream* trace = nullptr) {
    cfg.validate();
    model.validate();
    decode::TypingSession session(goal);
    std::uint64_t s = seed;
    std::mt19937_64 schedule_rng(detail::splitmix64(s));
    eeg::SamplerState sampler(detail::splitmix64(s));
    const auto order = board::default_order(cfg.scheme);
    const int abandon_flashes = cfg.decoder.abandon_scans * kGroupsPerSequence;

    SimResult r;
    r.goal = goal;
    r.items.resize(goal.size());
    std::size_t frontier = 0;
    int stalled = 0;  // flashes since the on-track frontier last moved

    while (!session.done()) {
        if (stalled >= abandon_flashes) {
            session.force_next_char();
            r.items[session.typed().size() - 1].abandoned = true;
            frontier = std::max(frontier, session.on_track_length());
            stalled = 0;
            continue;
        }

        const std::string history(session.typed());
        const auto prior_chars = lang.char_prior(history);
        auto prior = predict::board_prior(prior_chars, cfg.prior);
        const auto words = lang.suggestions(cfg.predictor, session.context(), session.partial_word(), cfg.suggestions);
        std::vector<std::string> slot_words;
        for (const auto& w : words) slot_words.push_back(w.word);
        if (!words.empty()) {
            if (cfg.slot_mass == SlotMass::fixed) {
                prior = predict::attach_suggestions(prior, words, cfg.suggestion_mass);
            } else {
                const double scale = (1.0 - cfg.prior.backspace_mass) * (1.0 - cfg.prior.uniform_floor);
                const double floor = (1.0 - cfg.prior.backspace_mass) * cfg.prior.uniform_floor / kNumChars;
                prior = predict::attach_suggestions_joint(prior, words, session.partial_word(), scale, floor);
            }
        }

        SelectionRecord rec;
        rec.item = static_cast<int>(std::min(session.on_track_length(), goal.size() - 1));
        rec.intended = session.intended(slot_words);
        auto state = decode::DecoderState::from_prior(prior);
        const auto flash = [&](const board::SymbolSet& members) {
            const bool lit = members.test(rec.intended.index());
            const double y = eeg::draw_score(model, sampler, lit ? swlda::Label::attended : swlda::Label::non_attended);
            if (trace) {
                nlohmann::json j{{"item", rec.item},
                                 {"selection", r.selections.size()},
                                 {"flash", state.flashes_seen},
                                 {"group", detail::members_json(members)},
                                 {"attended", lit},
                                 {"score", y}};
                *trace << j.dump() << '\n';
            }
            return y;
        };

        if (cfg.scheme == board::Scheme::huffman) {
            const auto tree = board::build_huffman(prior);
            rec.selected = decode::huffman_select(tree, model, state, cfg.decoder, flash);
        } else {
            const auto layout = board::build_layout(cfg.scheme, prior);
            rec.selected = decode::rowcol_select(layout, prior, order, model, state, cfg.decoder, schedule_rng, flash);
        }
        rec.flashes = state.flashes_seen;
        rec.seconds = rec.flashes * cfg.soa + cfg.pause;

        const auto out = session.apply(rec.selected, slot_words);
        rec.correct = out.correct;
        rec.backspace = out.backspace;
        rec.word = out.word;
        rec.advanced = out.advanced;
        auto& item = r.items[rec.item];
        item.flashes += rec.flashes;
        item.seconds += rec.seconds;
        ++item.attempts;
        r.selections.push_back(rec);

        stalled += rec.flashes;
        if (session.on_track_length() > frontier) {
            frontier = session.on_track_length();
            stalled = 0;
        }
    }

    r.transcript = session.typed();
    r.itr = subject_itr(r);
    r.retry = r.selections.empty() ? 0.0 : retry_rate(r.selections);
    return r;
}

inline nlohmann::json result_summary_json(const SimResult& r) {
    return {{"itr", r.itr},
            {"retry_rate", r.retry},
            {"selections", r.selections.size()},
            {"flashes", r.total_flashes()},
            {"items", r.items.size()},
            {"abandoned", r.abandoned()},
            {"transcript_matches", r.transcript == r.goal}};
}

}  // namespace p300::sim
