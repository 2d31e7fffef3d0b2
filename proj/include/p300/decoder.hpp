#pragma once
// Bayesian selection over the 36 board items. Each flash multiplies every
// item's posterior by the attended or non-attended score density, depending
// on whether the item was lit; a selection is made once the largest
// posterior reaches the threshold or the flash budget runs out.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "p300/eeg_sim.hpp"
#include "p300/error.hpp"
#include "p300/flashboard.hpp"
#include "p300/symbols.hpp"

namespace p300::decode {

/// When the row/column decoder tests the stopping threshold.
enum class CheckPoint { flash, sequence };

inline std::string_view check_point_name(CheckPoint c) { return c == CheckPoint::flash ? "flash" : "sequence"; }

inline CheckPoint parse_check_point(std::string_view s) {
    if (s == "flash") return CheckPoint::flash;
    if (s == "sequence") return CheckPoint::sequence;
    throw ValidationError("unknown check point '" + std::string(s) + "'");
}

struct DecoderConfig {
    double p_thresh = 0.95;
    int max_sequences = 10;   // 12 flashes each
    int abandon_scans = 75;
    CheckPoint check = CheckPoint::sequence;

    int flash_budget() const { return max_sequences * kGroupsPerSequence; }

    void validate() const {
        require(p_thresh > 0.5 && p_thresh <= 1.0, "p_thresh must be in (0.5, 1]");
        require(max_sequences >= 1, "max_sequences must be >= 1");
        require(abandon_scans >= max_sequences, "abandon_scans must be >= max_sequences");
    }
};

inline double log_normal_pdf(double y, double mu, double sd) {
    constexpr double kLogSqrt2Pi = 0.91893853320467274178;
    const double z = (y - mu) / sd;
    return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

inline double flash_likelihood(double y, bool in_group, const eeg::SubjectScoreModel& m) {
    return std::exp(in_group ? log_normal_pdf(y, m.mu_a, m.sd_a) : log_normal_pdf(y, m.mu_n, m.sd_n));
}

struct DecoderState {
    BoardVector posterior{};
    int flashes_seen = 0;

    static DecoderState from_prior(const BoardVector& prior) {
        DecoderState s;
        double sum = 0.0;
        for (double p : prior) {
            require(p >= 0.0 && std::isfinite(p), "decoder prior must be finite and >= 0");
            sum += p;
        }
        require(sum > 0.0, "decoder prior has no mass");
        for (int i = 0; i < kNumSymbols; ++i) s.posterior[i] = prior[i] / sum;
        return s;
    }

    int argmax() const {
        return static_cast<int>(std::max_element(posterior.begin(), posterior.end()) - posterior.begin());
    }
    double max() const { return *std::max_element(posterior.begin(), posterior.end()); }
    double mass(const board::SymbolSet& set) const { return board::set_mass(set, posterior); }
};

/// One flash of `group` with classifier score y. Works in log space and
/// renormalizes, so long runs of flashes never underflow to zero.
inline void posterior_update(DecoderState& s, const board::SymbolSet& group, double y,
                             const eeg::SubjectScoreModel& m) {
    const double la = log_normal_pdf(y, m.mu_a, m.sd_a);
    const double ln = log_normal_pdf(y, m.mu_n, m.sd_n);
    std::array<double, kNumSymbols> lp;
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kNumSymbols; ++i) {
        lp[i] = s.posterior[i] > 0.0 ? std::log(s.posterior[i]) + (group.test(i) ? la : ln)
                                     : -std::numeric_limits<double>::infinity();
        top = std::max(top, lp[i]);
    }
    double sum = 0.0;
    for (int i = 0; i < kNumSymbols; ++i) sum += (s.posterior[i] = std::exp(lp[i] - top));
    for (double& p : s.posterior) p /= sum;
    ++s.flashes_seen;
}

/// Argmax once the threshold is reached, or unconditionally when the budget
/// is spent. Ties go to the lowest index.
inline std::optional<SymbolId> maybe_select(const DecoderState& s, const DecoderConfig& cfg) {
    if (s.max() >= cfg.p_thresh || s.flashes_seen >= cfg.flash_budget()) return SymbolId{s.argmax()};
    return std::nullopt;
}

/// Row/column selection: sequences of 12 group flashes until maybe_select
/// fires, tested after every flash or after every full sequence. `flash(members)` returns the classifier score for one flash.
template <class Flash>
SymbolId rowcol_select(const board::VirtualLayout& layout, const BoardVector& prior, board::FlashOrder order,
                       const eeg::SubjectScoreModel& model, DecoderState& s, const DecoderConfig& cfg,
                       std::mt19937_64& rng, Flash&& flash) {
    for (;;) {
        for (const auto& g : board::highlight_schedule(layout, prior, order, rng)) {
            posterior_update(s, g.members, flash(g.members), model);
            if (cfg.check == CheckPoint::flash)
                if (auto sel = maybe_select(s, cfg)) return *sel;
        }
        if (cfg.check == CheckPoint::sequence)
            if (auto sel = maybe_select(s, cfg)) return *sel;
    }
}

/// Huffman selection. At each internal node the "1" child is flashed until
/// its share of the node's posterior mass leaves (1 - p_thresh, p_thresh),
/// or `max_sequences` flashes pass (then the larger share wins). A leaf is
/// confirmed by one flash of the leaf alone; it is accepted when its board
/// posterior is at least one half, otherwise the walk restarts at the root
/// keeping the accumulated evidence. The overall flash budget ends the walk
/// with the posterior argmax.
template <class Flash>
SymbolId huffman_select(const board::HuffmanTree& tree, const eeg::SubjectScoreModel& model, DecoderState& s,
                        const DecoderConfig& cfg, Flash&& flash) {
    board::HuffmanCursor cur(tree);
    int node_flashes = 0;
    for (;;) {
        if (s.flashes_seen >= cfg.flash_budget()) return SymbolId{s.argmax()};
        if (cur.at_leaf()) {
            const SymbolId leaf = cur.leaf_symbol();
            board::SymbolSet only;
            only.set(leaf.index());
            posterior_update(s, only, flash(only), model);
            if (s.posterior[leaf.index()] >= 0.5) return leaf;
            cur.restart();
            node_flashes = 0;
            continue;
        }
        const auto g = *board::huffman_next_flash(tree, cur.node());
        posterior_update(s, g.members, flash(g.members), model);
        ++node_flashes;
        const double node_mass = s.mass(tree.node(cur.node()).members);
        const double share = node_mass > 0.0 ? s.mass(g.members) / node_mass : 0.5;
        if (share >= cfg.p_thresh || share <= 1.0 - cfg.p_thresh || node_flashes >= cfg.max_sequences) {
            cur.advance(share >= 0.5);
            node_flashes = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// Typing with the backspace protocol

struct Commit {
    std::string text;
    bool word = false;
};

struct SelectionOutcome {
    bool correct = false;   // text stays on track and the selection was wanted
    bool backspace = false;
    bool word = false;
    int advanced = 0;       // characters of new on-track text
};

/// Typed text against a goal. A selection commits one character, one word
/// completion (remaining letters plus a space) or a backspace that removes
/// the last commit whole.
class TypingSession {
public:
    explicit TypingSession(std::string goal) : goal_(std::move(goal)) {
        require(!goal_.empty(), "typing goal is empty");
        for (char c : goal_) require(char_index(c) >= 0, "typing goal must be normalized (A-Z and space)");
    }

    const std::string& goal() const { return goal_; }
    const std::string& typed() const { return typed_; }
    const std::vector<Commit>& commits() const { return commits_; }
    bool on_track() const { return typed_.size() <= goal_.size() && goal_.compare(0, typed_.size(), typed_) == 0; }
    bool done() const { return typed_ == goal_; }

    /// Typed text up to and including the last space.
    std::string_view context() const {
        const auto sp = typed_.rfind(' ');
        return sp == std::string::npos ? std::string_view() : std::string_view(typed_).substr(0, sp + 1);
    }
    std::string_view partial_word() const { return std::string_view(typed_).substr(context().size()); }

    /// Text a slot word would commit.
    std::string word_commit(std::string_view word) const {
        const auto partial = partial_word();
        require(word.starts_with(partial), "suggestion does not extend the partial word");
        return std::string(word.substr(partial.size())) + " ";
    }

    /// What the simulated user attends to: backspace when off track, else a
    /// slot holding the correct next word, else the next goal character.
    SymbolId intended(const std::vector<std::string>& slot_words) const {
        if (!on_track()) return kBackspace;
        for (std::size_t k = 0; k < slot_words.size() && k < static_cast<std::size_t>(kNumSlots); ++k) {
            if (!slot_words[k].starts_with(partial_word())) continue;
            if (extends_on_track(word_commit(slot_words[k]))) return slot_symbol(static_cast<int>(k));
        }
        return symbol_for_char(goal_[typed_.size()]);
    }

    SelectionOutcome apply(SymbolId sel, const std::vector<std::string>& slot_words) {
        const bool was_on_track = on_track();
        const std::size_t before = on_track_length();
        SelectionOutcome out;
        if (sel.is_backspace()) {
            out.backspace = true;
            out.correct = !was_on_track;
            if (!commits_.empty()) {
                typed_.resize(typed_.size() - commits_.back().text.size());
                commits_.pop_back();
            }
        } else {
            std::string text;
            if (sel.is_slot()) {
                const auto k = static_cast<std::size_t>(sel.slot());
                if (k >= slot_words.size()) throw std::logic_error("selected an empty suggestion slot");
                text = word_commit(slot_words[k]);
                out.word = true;
            } else {
                text = std::string(1, index_char(sel.index()));
            }
            out.correct = was_on_track && extends_on_track(text);
            typed_ += text;
            commits_.push_back({std::move(text), out.word});
        }
        out.advanced = static_cast<int>(on_track_length()) - static_cast<int>(before);
        return out;
    }

    /// Gives up on the current goal character: drops commits until the text
    /// is back on track, then commits that character directly.
    void force_next_char() {
        while (!on_track() && !commits_.empty()) {
            typed_.resize(typed_.size() - commits_.back().text.size());
            commits_.pop_back();
        }
        if (done()) return;
        std::string text(1, goal_[typed_.size()]);
        typed_ += text;
        commits_.push_back({std::move(text), false});
    }

    /// Length of the longest on-track prefix of the typed text.
    std::size_t on_track_length() const {
        std::size_t n = 0;
        while (n < typed_.size() && n < goal_.size() && typed_[n] == goal_[n]) ++n;
        return n;
    }

private:
    bool extends_on_track(const std::string& text) const {
        const std::size_t end = typed_.size() + text.size();
        return end <= goal_.size() && goal_.compare(typed_.size(), text.size(), text) == 0;
    }

    std::string goal_;
    std::string typed_;
    std::vector<Commit> commits_;
};

}  // namespace p300::decode
