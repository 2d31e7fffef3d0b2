#pragma once
// Word completion. A max-product trellis over the character models proposes
// completions of the partial word; an optional external predictor (a
// transformer service or the table-driven mock) is consulted first and the
// trellis fills whatever slots it leaves empty.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"

#include "p300/error.hpp"
#include "p300/lm.hpp"
#include "p300/symbols.hpp"

namespace p300::predict {

inline constexpr int kMaxSuggestions = 6;

enum class Source { external, trellis };

inline std::string_view source_name(Source s) { return s == Source::external ? "external" : "trellis"; }

struct Suggestion {
    std::string word;
    double score = 0.0;
    Source source = Source::trellis;
    double prob = 0.0;  // model probability of the completion, never renormalized

    friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

/// Typed history handed to the character models: prior words, a separating
/// space when needed, then the partial word.
inline std::string join_history(std::string_view context, std::string_view prefix) {
    std::string h(context);
    if (!h.empty() && h.back() != ' ') h.push_back(' ');
    h.append(prefix);
    return h;
}

inline bool is_word(std::string_view w) {
    return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'A' && c <= 'Z'; });
}

struct TrellisOptions {
    int max_len = 14;
    double space_floor = 0.1;  // emit a completion when p(space) reaches this
};

/// Sorts by descending score, ties by word, and truncates to n.
inline void rank_and_truncate(std::vector<Suggestion>& v, std::size_t n) {
    std::sort(v.begin(), v.end(), [](const Suggestion& a, const Suggestion& b) {
        return a.score != b.score ? a.score > b.score : a.word < b.word;
    });
    if (v.size() > n) v.resize(n);
}

/// Max-product trellis. Stage s holds at most one path per final letter.
/// A nonempty path is emitted as a completion (score = path probability times
/// p(space)) when space is its most likely continuation or p(space) reaches
/// the floor; it stops extending once space is the most likely continuation.
/// Scores are raw path probabilities.
inline std::vector<Suggestion> trellis_complete(const lm::ModelStack& stack, std::string_view context,
                                                std::string_view prefix, int n,
                                                const TrellisOptions& opt = {}) {
    require(n >= 1, "trellis_complete: n must be >= 1");
    require(opt.max_len >= static_cast<int>(prefix.size()), "trellis_complete: max_len shorter than prefix");
    require(prefix.empty() || is_word(prefix), "trellis_complete: prefix must be uppercase letters");

    const std::string base = join_history(context, "");
    struct Path {
        std::string word;
        double prob = 0.0;
    };
    std::vector<Path> stage{{std::string(prefix), 1.0}};
    std::vector<Suggestion> found;

    for (int len = static_cast<int>(prefix.size()); len <= opt.max_len && !stage.empty(); ++len) {
        std::array<std::optional<Path>, kNumLetters> next{};
        for (const Path& path : stage) {
            const CharVector q = lm::char_prior(stack, base + path.word);
            const double p_space = q[kSpaceIndex];
            const double best_letter = *std::max_element(q.begin(), q.begin() + kNumLetters);
            const bool space_best = p_space > best_letter;
            if (!path.word.empty()) {
                if (space_best || p_space >= opt.space_floor)
                    found.push_back({path.word, path.prob * p_space, Source::trellis, path.prob * p_space});
                if (space_best) continue;
            }
            if (len == opt.max_len) continue;
            for (int c = 0; c < kNumLetters; ++c) {
                if (!(q[c] > 0.0)) continue;
                Path cand{path.word + index_char(c), path.prob * q[c]};
                auto& slot = next[c];
                if (!slot || cand.prob > slot->prob || (cand.prob == slot->prob && cand.word < slot->word))
                    slot = std::move(cand);
            }
        }
        stage.clear();
        for (auto& p : next)
            if (p) stage.push_back(std::move(*p));
    }
    rank_and_truncate(found, static_cast<std::size_t>(n));
    return found;
}

// ---------------------------------------------------------------------------
// External predictor protocol

struct CompletionRequest {
    std::string context;
    std::string prefix;
    int n = kMaxSuggestions;
};

struct ScoredWord {
    std::string word;
    double logprob = 0.0;
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline nlohmann::json request_to_json(const CompletionRequest& r) {
    return {{"context", r.context}, {"prefix", r.prefix}, {"n", r.n}};
}

inline CompletionRequest request_from_json(const nlohmann::json& j) {
    try {
        CompletionRequest r{j.at("context").get<std::string>(), j.at("prefix").get<std::string>(),
                            j.at("n").get<int>()};
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed request: ") + e.what());
    }
}

inline nlohmann::json response_to_json(const std::vector<ScoredWord>& words) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& w : words) arr.push_back({{"word", w.word}, {"logprob", w.logprob}});
    return {{"suggestions", std::move(arr)}};
}

inline std::vector<ScoredWord> response_from_json(const nlohmann::json& j) {
    std::vector<ScoredWord> out;
    try {
        for (const auto& s : j.at("suggestions")) {
            ScoredWord w{s.at("word").get<std::string>(), s.at("logprob").get<double>()};
            if (!std::isfinite(w.logprob)) throw ProtocolError("non-finite logprob");
            out.push_back(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("malformed response: ") + e.what());
    }
    return out;
}

/// Anything that answers completion requests. Implementations must be safe
/// to call from several simulation threads at once.
class ExternalPredictor {
public:
    virtual ~ExternalPredictor() = default;
    /// Throws ProtocolError on transport or format failure.
    virtual std::vector<ScoredWord> complete(const CompletionRequest& req) const = 0;
};

/// Last word of the context ("" when there is none). The context holds
/// complete words only; the partial word travels as the prefix.
inline std::string context_tail(std::string_view context) {
    const std::string norm = lm::normalize_text(context);
    const auto words = lm::split_words(norm);
    return words.empty() ? std::string() : std::string(words.back());
}

/// Deterministic stand-in for the transformer service: a lookup table keyed
/// by (last complete context word, prefix), with "*" as the any-context row.
class MockPredictor : public ExternalPredictor {
public:
    static constexpr std::string_view kAnyContext = "*";

    void add(std::string tail, std::string prefix, std::vector<ScoredWord> words) {
        table_[{std::move(tail), std::move(prefix)}] = std::move(words);
    }

    std::vector<ScoredWord> complete(const CompletionRequest& req) const override {
        const std::string prefix = lm::normalize_text(req.prefix);
        auto it = table_.find({context_tail(req.context), prefix});
        if (it == table_.end()) it = table_.find({std::string(kAnyContext), prefix});
        if (it == table_.end()) return {};
        std::vector<ScoredWord> out = it->second;
        if (req.n >= 0 && out.size() > static_cast<std::size_t>(req.n)) out.resize(req.n);
        return out;
    }

    std::size_t size() const { return table_.size(); }

    /// One JSON object per line: {"context": tail, "prefix": p, "suggestions": [...]}.
    void save(const std::filesystem::path& file) const {
        std::ofstream out(file, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + file.string());
        for (const auto& [key, words] : table_) {
            nlohmann::json j = response_to_json(words);
            j["context"] = key.first;
            j["prefix"] = key.second;
            out << j.dump() << '\n';
        }
    }

    static MockPredictor load(const std::filesystem::path& file) {
        std::ifstream in(file, std::ios::binary);
        require(static_cast<bool>(in), "cannot read mock table: " + file.string());
        MockPredictor m;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                m.add(j.at("context").get<std::string>(), j.at("prefix").get<std::string>(), response_from_json(j));
            } catch (const std::exception& e) {
                throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        return m;
    }

private:
    std::map<std::pair<std::string, std::string>, std::vector<ScoredWord>> table_;
};

/// Builds a mock table from a word-bigram model of `knowledge`: for each
/// (previous word, prefix of the next word) the `per_entry` most frequent
/// continuations, plus unigram rows under the any-context key.
inline MockPredictor build_mock_table(std::string_view knowledge, int per_entry = kMaxSuggestions) {
    require(per_entry >= 1, "mock table needs at least one suggestion per entry");
    const std::string text = lm::normalize_text(knowledge);
    const auto words = lm::split_words(text);
    require(!words.empty(), "mock knowledge text has no words");

    using Counts = std::map<std::string, std::uint64_t>;
    std::map<std::string, Counts> by_tail;
    for (std::size_t i = 0; i < words.size(); ++i) {
        by_tail[std::string(MockPredictor::kAnyContext)][std::string(words[i])]++;
        if (i > 0) by_tail[std::string(words[i - 1])][std::string(words[i])]++;
    }

    MockPredictor mock;
    for (const auto& [tail, counts] : by_tail) {
        // prefix -> candidate words, filled by walking every prefix of every word
        std::map<std::string, std::vector<std::pair<std::string, std::uint64_t>>> rows;
        for (const auto& [w, n] : counts)
            for (std::size_t k = 0; k <= w.size(); ++k) rows[w.substr(0, k)].emplace_back(w, n);
        for (auto& [prefix, cands] : rows) {
            std::uint64_t total = 0;
            for (const auto& c : cands) total += c.second;
            std::stable_sort(cands.begin(), cands.end(),
                             [](const auto& a, const auto& b) { return a.second > b.second; });
            std::vector<ScoredWord> out;
            for (std::size_t i = 0; i < cands.size() && i < static_cast<std::size_t>(per_entry); ++i)
                out.push_back({cands[i].first, std::log(static_cast<double>(cands[i].second) / total)});
            mock.add(tail, prefix, std::move(out));
        }
    }
    return mock;
}

// ---------------------------------------------------------------------------
// Layering

using ErrorSink = std::function<void(std::string_view)>;

inline void log_to_stderr(std::string_view msg) { std::cerr << "predictor: " << msg << '\n'; }

/// External suggestions first, trellis fills the remaining slots. Each
/// source's scores are normalized within the source and weighted by the
/// share of slots it holds, so the returned scores sum to 1.
inline std::vector<Suggestion> layered_predict(const ExternalPredictor* client, const lm::ModelStack& stack,
                                               std::string_view context, std::string_view prefix, int n,
                                               const TrellisOptions& opt = {},
                                               const ErrorSink& on_error = log_to_stderr) {
    require(n >= 1 && n <= kMaxSuggestions, "layered_predict: n must be in [1, 6]");

    std::vector<Suggestion> ext;
    if (client) {
        try {
            const auto words = client->complete({std::string(context), std::string(prefix), n});
            std::set<std::string> seen;
            for (const auto& w : words) {
                std::string up = lm::normalize_text(w.word);
                if (!is_word(up) || !up.starts_with(prefix) || !seen.insert(up).second) continue;
                ext.push_back({std::move(up), std::exp(w.logprob), Source::external, std::exp(w.logprob)});
                if (ext.size() == static_cast<std::size_t>(n)) break;
            }
        } catch (const std::exception& e) {
            if (on_error) on_error(e.what());
            ext.clear();
        }
    }

    std::vector<Suggestion> fill;
    if (ext.size() < static_cast<std::size_t>(n)) {
        // Ask for enough trellis words to survive de-duplication.
        auto tr = trellis_complete(stack, context, prefix, n + static_cast<int>(ext.size()), opt);
        for (auto& s : tr) {
            if (fill.size() + ext.size() == static_cast<std::size_t>(n)) break;
            const bool dup = std::any_of(ext.begin(), ext.end(), [&](const Suggestion& e) { return e.word == s.word; });
            if (!dup) fill.push_back(std::move(s));
        }
    }

    auto normalize = [](std::vector<Suggestion>& v, double share) {
        double sum = 0.0;
        for (const auto& s : v) sum += s.score;
        for (auto& s : v) s.score = sum > 0.0 ? share * s.score / sum : share / v.size();
    };
    const double total = static_cast<double>(ext.size() + fill.size());
    if (total > 0) {
        normalize(ext, ext.size() / total);
        normalize(fill, fill.size() / total);
    }
    ext.insert(ext.end(), std::make_move_iterator(fill.begin()), std::make_move_iterator(fill.end()));
    return ext;
}

// ---------------------------------------------------------------------------
// Board priors

struct BoardPriorOptions {
    double backspace_mass = 0.05;   // share of the board reserved for backspace
    double uniform_floor = 1e-3;    // mixed into the character prior so no cell is unreachable
};

/// Board-level prior without suggestions: letters and space from the
/// character model, a fixed backspace mass, slots at zero.
inline BoardVector board_prior(const CharVector& chars, const BoardPriorOptions& opt = {}) {
    require(opt.backspace_mass >= 0.0 && opt.backspace_mass < 1.0, "backspace mass must be in [0, 1)");
    require(opt.uniform_floor >= 0.0 && opt.uniform_floor <= 1.0, "uniform floor must be in [0, 1]");
    double sum = 0.0;
    for (double x : chars) sum += x;
    BoardVector out{};
    for (int i = 0; i < kNumChars; ++i) {
        const double p = sum > 0.0 ? chars[i] / sum : 1.0 / kNumChars;
        out[i] = (1.0 - opt.backspace_mass) * ((1.0 - opt.uniform_floor) * p + opt.uniform_floor / kNumChars);
    }
    out[kBackspaceIndex] = opt.backspace_mass;
    return out;
}

/// Gives the suggestion slots total mass lambda, split by score; every other
/// cell is scaled by 1 - lambda. No suggestions means lambda = 0.
inline BoardVector attach_suggestions(const BoardVector& prior, const std::vector<Suggestion>& suggestions,
                                      double lambda) {
    require(suggestions.size() <= static_cast<std::size_t>(kNumSlots), "too many suggestions for the board");
    require(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0, 1]");
    BoardVector out = prior;
    for (int i = kFirstSlotIndex; i < kNumSymbols; ++i) out[i] = 0.0;
    if (suggestions.empty()) lambda = 0.0;

    double score_sum = 0.0;
    for (const auto& s : suggestions) {
        require(std::isfinite(s.score) && s.score >= 0.0, "suggestion score must be finite and >= 0");
        score_sum += s.score;
    }
    for (int i = 0; i < kFirstSlotIndex; ++i) out[i] *= 1.0 - lambda;
    for (std::size_t k = 0; k < suggestions.size(); ++k) {
        const double share = score_sum > 0.0 ? suggestions[k].score / score_sum : 1.0 / suggestions.size();
        out[kFirstSlotIndex + k] = lambda * share;
    }
    return out;
}

/// Next-selection prior for a user who always takes a listed word. Each slot
/// gets its word's probability (`prob`, on the character scale of `prior`),
/// taken from the cell of the character that continues `prefix` toward that
/// word; that cell keeps at least `floor`. Other cells are untouched and the
/// result is renormalized, since an external model's word probabilities need
/// not agree with the character model.
inline BoardVector attach_suggestions_joint(const BoardVector& prior, const std::vector<Suggestion>& suggestions,
                                            std::string_view prefix, double char_scale = 1.0, double floor = 0.0) {
    require(suggestions.size() <= static_cast<std::size_t>(kNumSlots), "too many suggestions for the board");
    require(char_scale > 0.0 && floor >= 0.0, "joint suggestion prior: bad scale or floor");
    BoardVector out = prior;
    for (int i = kFirstSlotIndex; i < kNumSymbols; ++i) out[i] = 0.0;
    for (std::size_t k = 0; k < suggestions.size(); ++k) {
        const auto& s = suggestions[k];
        require(std::isfinite(s.prob) && s.prob >= 0.0, "suggestion probability must be finite and >= 0");
        require(s.word.size() >= prefix.size() && std::string_view(s.word).starts_with(prefix),
                "suggestion does not extend the prefix");
        const int c = s.word.size() == prefix.size() ? kSpaceIndex : char_index(s.word[prefix.size()]);
        const double want = char_scale * s.prob;
        out[kFirstSlotIndex + k] = want;
        out[c] = std::max(std::min(out[c], floor), out[c] - want);
    }
    double sum = 0.0;
    for (double v : out) sum += v;
    require(sum > 0.0, "joint suggestion prior has no mass");
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace p300::predict
