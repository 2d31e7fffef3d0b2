#pragma once
// Layered character language model: unigram, bigram, trigram, within-word
// and across-word (biword) count tables combined by a Kneser-Ney style
// back-off chain. Each level discounts its own relative frequency by d_k and
// hands the freed mass, scaled by L_k, down to the next simpler level.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "p300/error.hpp"
#include "p300/symbols.hpp"

namespace p300::lm {

enum class Level { unigram, bigram, trigram, word, biword };

inline constexpr std::array<Level, 5> kAllLevels = {Level::unigram, Level::bigram, Level::trigram,
                                                   Level::word, Level::biword};

inline std::string_view level_name(Level level) {
    switch (level) {
        case Level::unigram: return "unigram";
        case Level::bigram: return "bigram";
        case Level::trigram: return "trigram";
        case Level::word: return "word";
        case Level::biword: return "biword";
    }
    return "?";
}

inline Level parse_level(std::string_view name) {
    for (Level l : kAllLevels)
        if (level_name(l) == name) return l;
    throw ValidationError("unknown model level: " + std::string(name));
}

struct SmoothingParams {
    double d1 = 0.5;  // biword
    double d2 = 0.5;  // word
    double d3 = 0.5;  // trigram
    double d4 = 0.5;  // bigram

    void validate() const {
        for (double d : {d1, d2, d3, d4})
            require(d >= 0.0 && d <= 1.0, "smoothing discounts must lie in [0, 1]");
    }
};

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
};

/// Occurrence counts for one level. Context counts live in the same table as
/// shorter keys (bigram "A" = number of bigrams starting with 'A'; word "QUI"
/// = number of words starting with "QUI"), so every lookup in the
/// chain is a single key fetch.
class CountTable {
public:
    using Map = std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;

    explicit CountTable(Level level = Level::unigram) : level_(level) {}

    Level level() const { return level_; }

    void add(std::string_view key, std::uint64_t n = 1) {
        if (n == 0) return;
        if (level_ == Level::bigram)
            require(key.size() <= 2, "bigram keys have at most 2 characters");
        if (level_ == Level::trigram)
            require(key.size() <= 3, "trigram keys have at most 3 characters");
        if (level_ == Level::unigram) require(key.size() == 1, "unigram keys are single characters");
        auto it = counts_.find(key);
        if (it == counts_.end())
            counts_.emplace(std::string(key), n);
        else
            it->second += n;
        total_ += n;
        finalized_ = false;
    }

    /// Recomputes the distinct-continuation index. Must run before queries.
    void finalize() {
        distinct_.clear();
        for (const auto& [key, n] : counts_) {
            if (key.empty()) continue;
            if (char_index(key.back()) < 0) continue;
            std::string_view parent(key.data(), key.size() - 1);
            if (counts_.find(parent) == counts_.end()) continue;
            ++distinct_[std::string(parent)];
        }
        finalized_ = true;
    }

    std::uint64_t count(std::string_view key) const {
        auto it = counts_.find(key);
        return it == counts_.end() ? 0 : it->second;
    }

    /// Number of distinct letters/space that follow `context` in this table.
    std::uint64_t distinct_continuations(std::string_view context) const {
        if (!finalized_) throw std::logic_error("CountTable queried before finalize()");
        auto it = distinct_.find(context);
        return it == distinct_.end() ? 0 : it->second;
    }

    /// Sum of all stored counts; for the unigram level this is unigram_model('').
    std::uint64_t total() const { return total_; }
    std::size_t size() const { return counts_.size(); }
    bool finalized() const { return finalized_; }
    const Map& entries() const { return counts_; }

    std::vector<std::pair<std::string, std::uint64_t>> sorted_entries() const {
        std::vector<std::pair<std::string, std::uint64_t>> out(counts_.begin(), counts_.end());
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    Level level_;
    Map counts_;
    Map distinct_;
    std::uint64_t total_ = 0;
    bool finalized_ = true;
};

/// Builds a bigram or trigram table from full n-gram counts, adding the
/// matching context counts.
inline CountTable make_ngram_table(Level level, const std::map<std::string, std::uint64_t>& grams) {
    CountTable t(level);
    for (const auto& [key, n] : grams) {
        t.add(key, n);
        if (level == Level::bigram || level == Level::trigram)
            t.add(std::string_view(key).substr(0, key.size() - 1), n);
    }
    t.finalize();
    return t;
}

struct ModelStack {
    std::array<CountTable, 5> tables{CountTable(Level::unigram), CountTable(Level::bigram),
                                     CountTable(Level::trigram), CountTable(Level::word),
                                     CountTable(Level::biword)};
    SmoothingParams params;

    CountTable& table(Level l) { return tables[static_cast<int>(l)]; }
    const CountTable& table(Level l) const { return tables[static_cast<int>(l)]; }
    const CountTable& unigram() const { return table(Level::unigram); }
    const CountTable& bigram() const { return table(Level::bigram); }
    const CountTable& trigram() const { return table(Level::trigram); }
    const CountTable& word() const { return table(Level::word); }
    const CountTable& biword() const { return table(Level::biword); }

    void finalize() {
        for (auto& t : tables) t.finalize();
    }
};

struct Tokenization {
    bool fold_case = true;
};

/// Uppercase-folds, drops everything but letters and whitespace, and collapses
/// whitespace runs to single spaces (trimmed at both ends).
inline std::string normalize_text(std::string_view raw, const Tokenization& tok = {}) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    for (char ch : raw) {
        if (ch == ' ' || ch == '\n' || ch == '\t' || ch == '\r' || ch == '\f' || ch == '\v') {
            pending_space = !out.empty();
            continue;
        }
        char c = ch;
        if (tok.fold_case && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
        if (!(c >= 'A' && c <= 'Z')) continue;
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

inline std::vector<std::string_view> split_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && text[i] == ' ') ++i;
        std::size_t j = i;
        while (j < text.size() && text[j] != ' ') ++j;
        if (j > i) words.push_back(text.substr(i, j - i));
        i = j;
    }
    return words;
}

/// Counts all five levels from a raw corpus.
inline ModelStack build_models(std::string_view corpus_text, const Tokenization& tok = {},
                               const SmoothingParams& params = {}) {
    params.validate();
    const std::string text = normalize_text(corpus_text, tok);
    require(!text.empty(), "corpus is empty after normalization");

    ModelStack stack;
    stack.params = params;
    auto& uni = stack.table(Level::unigram);
    auto& bi = stack.table(Level::bigram);
    auto& tri = stack.table(Level::trigram);
    auto& word = stack.table(Level::word);
    auto& biword = stack.table(Level::biword);
    const std::string_view view(text);

    for (std::size_t i = 0; i < text.size(); ++i) {
        uni.add(view.substr(i, 1));
        if (i + 2 <= text.size()) {
            bi.add(view.substr(i, 2));
            bi.add(view.substr(i, 1));
        }
        if (i + 3 <= text.size()) {
            tri.add(view.substr(i, 3));
            tri.add(view.substr(i, 2));
        }
    }

    const auto words = split_words(view);
    std::string key;
    for (std::size_t w = 0; w < words.size(); ++w) {
        const std::string_view cur = words[w];
        for (std::size_t k = 0; k <= cur.size(); ++k) word.add(cur.substr(0, k));
        key.assign(cur);
        key.push_back(' ');
        word.add(key);

        if (w == 0) continue;
        std::string base(words[w - 1]);
        base.push_back(' ');
        for (std::size_t k = 0; k <= cur.size(); ++k) {
            key = base;
            key.append(cur.substr(0, k));
            biword.add(key);
        }
        key = base;
        key.append(cur);
        key.push_back(' ');
        biword.add(key);
    }
    stack.finalize();
    return stack;
}

/// Context strings each level conditions on, derived from decoded history.
struct ChainContexts {
    std::string biword;  // "<previous word> <current partial word>"
    std::string word;    // current partial word
    std::string trigram; // last two characters
    std::string bigram;  // last character
    bool has_biword = false;
    bool has_trigram = false;
    bool has_bigram = false;
};

inline ChainContexts chain_contexts(std::string_view history) {
    ChainContexts ctx;
    const auto last_space = history.rfind(' ');
    if (last_space == std::string_view::npos) {
        ctx.word = std::string(history);
    } else {
        ctx.word = std::string(history.substr(last_space + 1));
        const std::string_view before = history.substr(0, last_space);
        const auto prev_space = before.rfind(' ');
        const std::string_view prev_word =
            prev_space == std::string_view::npos ? before : before.substr(prev_space + 1);
        if (!prev_word.empty()) {
            ctx.biword.assign(prev_word);
            ctx.biword.push_back(' ');
            ctx.biword += ctx.word;
            ctx.has_biword = true;
        }
    }
    if (history.size() >= 2) {
        ctx.trigram = std::string(history.substr(history.size() - 2));
        ctx.has_trigram = true;
    }
    if (!history.empty()) {
        ctx.bigram = std::string(history.substr(history.size() - 1));
        ctx.has_bigram = true;
    }
    return ctx;
}

namespace detail {

// One level of the chain:
//   max(count(ctx+c) - d, 0) / count(ctx) + d * L * lower,  L = distinct(ctx) / count(ctx)
// With count(ctx) == 0 the discounted term is 0 and L = 1.
inline double level_term(const CountTable& table, bool has_ctx, std::string& ctx, char c, double d,
                         double lower) {
    const std::uint64_t n_ctx = has_ctx ? table.count(ctx) : 0;
    if (n_ctx == 0) return d * lower;
    ctx.push_back(c);
    const double n = static_cast<double>(table.count(ctx));
    ctx.pop_back();
    const double denom = static_cast<double>(n_ctx);
    const double norm = static_cast<double>(table.distinct_continuations(ctx)) / denom;
    return std::max(n - d, 0.0) / denom + d * norm * lower;
}

inline double chain_value(const ModelStack& stack, ChainContexts& ctx, char c) {
    const auto& p = stack.params;
    const auto& uni = stack.unigram();
    const char key[1] = {c};
    const double p_uni =
        uni.total() == 0 ? 0.0
                         : static_cast<double>(uni.count(std::string_view(key, 1))) /
                               static_cast<double>(uni.total());
    const double p_bi = level_term(stack.bigram(), ctx.has_bigram, ctx.bigram, c, p.d4, p_uni);
    const double p_tri = level_term(stack.trigram(), ctx.has_trigram, ctx.trigram, c, p.d3, p_bi);
    const double p_word = level_term(stack.word(), true, ctx.word, c, p.d2, p_tri);
    return level_term(stack.biword(), ctx.has_biword, ctx.biword, c, p.d1, p_word);
}

}  // namespace detail

/// Raw (unnormalized) back-off chain value for character `c` after `history`.
inline double smoothed_char_prob(const ModelStack& stack, std::string_view history, SymbolId c) {
    require(c.is_char(), "smoothed_char_prob is defined for letters and word-space only");
    auto ctx = chain_contexts(history);
    return detail::chain_value(stack, ctx, index_char(c.index()));
}

/// Raw chain values for all 27 characters.
inline CharVector char_chain(const ModelStack& stack, std::string_view history) {
    auto ctx = chain_contexts(history);
    CharVector out{};
    for (int i = 0; i < kNumChars; ++i) out[i] = detail::chain_value(stack, ctx, index_char(i));
    return out;
}

/// Normalized next-character prior over letters + space. The raw chain leaks
/// mass whenever a level backs off with L = 1, so the vector is renormalized;
/// an all-zero chain yields the uniform distribution.
inline CharVector char_prior(const ModelStack& stack, std::string_view history) {
    CharVector v = char_chain(stack, history);
    double sum = 0.0;
    for (double x : v) sum += x;
    if (!(sum > 0.0)) {
        v.fill(1.0 / kNumChars);
        return v;
    }
    for (double& x : v) x /= sum;
    return v;
}

// ---------------------------------------------------------------------------
// Persistence: one `<level>.counts` file per level, sorted `key<TAB>count`
// lines, LF endings.
// ---------------------------------------------------------------------------

inline void save_table(const CountTable& table, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    for (const auto& [key, n] : table.sorted_entries()) out << key << '\t' << n << '\n';
}

inline CountTable load_table(Level level, const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    require(static_cast<bool>(in), "cannot read count file: " + file.string());
    CountTable t(level);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.rfind('\t');
        require(tab != std::string::npos,
                file.string() + ":" + std::to_string(lineno) + ": expected key<TAB>count");
        std::uint64_t n = 0;
        try {
            n = std::stoull(line.substr(tab + 1));
        } catch (const std::exception&) {
            throw ValidationError(file.string() + ":" + std::to_string(lineno) + ": bad count");
        }
        t.add(std::string_view(line).substr(0, tab), n);
    }
    t.finalize();
    return t;
}

inline void save_models(const ModelStack& stack, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (Level l : kAllLevels)
        save_table(stack.table(l), dir / (std::string(level_name(l)) + ".counts"));
}

inline ModelStack load_models(const std::filesystem::path& dir, const SmoothingParams& params = {}) {
    params.validate();
    ModelStack stack;
    stack.params = params;
    for (Level l : kAllLevels)
        stack.table(l) = load_table(l, dir / (std::string(level_name(l)) + ".counts"));
    return stack;
}

}  // namespace p300::lm
