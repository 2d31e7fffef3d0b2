#pragma once
// Random fixtures shared by the unit tests and the acceptance run.

#include <algorithm>
#include <map>
#include <random>
#include <string>

#include "p300/lm.hpp"

namespace p300::testing {

inline std::string random_corpus(std::mt19937_64& rng, const std::string& letters, int n_words) {
    std::uniform_int_distribution<int> len(1, 5);
    std::uniform_int_distribution<std::size_t> pick(0, letters.size() - 1);
    std::string out;
    for (int w = 0; w < n_words; ++w) {
        if (w) out.push_back(' ');
        int l = len(rng);
        for (int i = 0; i < l; ++i) out.push_back(letters[pick(rng)]);
    }
    return out;
}

// Mix of in-corpus substrings (known contexts) and arbitrary strings (OOV).
inline std::string random_history(std::mt19937_64& rng, const std::string& corpus, const std::string& letters) {
    std::uniform_int_distribution<int> coin(0, 2);
    if (coin(rng) != 0 && corpus.size() > 2) {
        std::uniform_int_distribution<std::size_t> start(0, corpus.size() - 1);
        std::size_t s = start(rng);
        std::uniform_int_distribution<std::size_t> len(0, std::min<std::size_t>(12, corpus.size() - s));
        std::string h = corpus.substr(s, len(rng));
        while (!h.empty() && h.front() == ' ') h.erase(h.begin());
        return h;
    }
    std::uniform_int_distribution<int> len(0, 9);
    std::uniform_int_distribution<std::size_t> pick(0, letters.size());
    std::string h;
    int l = len(rng);
    for (int i = 0; i < l; ++i) {
        std::size_t k = pick(rng);
        char c = k == letters.size() ? ' ' : letters[k];
        if (c == ' ' && (h.empty() || h.back() == ' ')) continue;
        h.push_back(c);
    }
    return h;
}

// First-order LM over a random letter subset: only unigram and bigram
// tables are populated, so each next-character distribution depends on the
// last character alone.
inline lm::ModelStack random_bigram_lm(std::mt19937_64& rng, int alphabet_size) {
    std::string letters = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    std::shuffle(letters.begin(), letters.end(), rng);
    std::string alpha = letters.substr(0, alphabet_size) + " ";
    std::uniform_int_distribution<int> uni(1, 20), big(0, 9);
    std::uniform_real_distribution<double> d(0.1, 0.9);

    lm::ModelStack stack;
    stack.params = {d(rng), d(rng), d(rng), d(rng)};
    for (char c : alpha) stack.table(lm::Level::unigram).add(std::string(1, c), uni(rng));
    std::map<std::string, std::uint64_t> grams;
    for (char a : alpha)
        for (char b : alpha)
            if (int n = big(rng); n > 0) grams[std::string{a, b}] = n;
    stack.table(lm::Level::bigram) = lm::make_ngram_table(lm::Level::bigram, grams);
    stack.finalize();
    return stack;
}

}  // namespace p300::testing
