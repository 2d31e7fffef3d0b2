#include "p300/word_predictor.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <set>
#include <thread>

#include "oracles/trellis_oracle.hpp"
#include "p300/http_predictor.hpp"
#include "generators.hpp"
#include "test_util.hpp"

namespace p300::predict {
namespace {

using testing::random_bigram_lm;

std::vector<std::string> words_of(const std::vector<Suggestion>& v) {
    std::vector<std::string> out;
    for (const auto& s : v) out.push_back(s.word);
    return out;
}

const lm::ModelStack& doi_models() {
    static const lm::ModelStack stack = lm::build_models(testing::read_file(testing::data_path("doi.txt")));
    return stack;
}

TEST(TrellisComplete, SinglePositivePathYieldsCat) {
    lm::SmoothingParams raw{1.0, 0.0, 0.0, 0.0};  // no biword context: pass through
    const auto stack = lm::build_models("CAT CAT CAT", {}, raw);
    const auto out = trellis_complete(stack, "", "CA", 3);
    ASSERT_FALSE(out.empty());
    EXPECT_EQ(out.front().word, "CAT");
    EXPECT_DOUBLE_EQ(out.front().score, 1.0);
    EXPECT_EQ(out.front().source, Source::trellis);
}

TEST(TrellisComplete, MatchesExhaustiveOracleOnRandomFirstOrderModels) {
    std::mt19937_64 rng(314159);
    std::uniform_int_distribution<int> k(2, 6), len(1, 5), nn(1, 6);
    std::uniform_real_distribution<double> floor(0.0, 0.4);
    for (int trial = 0; trial < 100; ++trial) {
        const auto stack = random_bigram_lm(rng, k(rng));
        const int max_len = len(rng);
        const int n = nn(rng);
        TrellisOptions opt{max_len, floor(rng)};
        // Prefix: zero or one letter drawn from the model's own alphabet.
        std::string prefix;
        if (trial % 2) {
            const auto& uni = stack.unigram();
            for (const auto& [key, cnt] : uni.sorted_entries())
                if (key != " ") {
                    prefix = key;
                    break;
                }
        }
        const std::string context = trial % 3 == 0 ? "" : "AB ";
        const auto got = trellis_complete(stack, context, prefix, n, opt);
        const auto want = oracle::exhaustive_completions(stack, context, prefix, max_len, n, opt.space_floor);
        ASSERT_EQ(got.size(), want.size()) << "trial " << trial;
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].word, want[i].word) << "trial " << trial << " rank " << i;
            EXPECT_DOUBLE_EQ(got[i].score, want[i].score);
        }
    }
}

TEST(TrellisComplete, EmptyPrefixGivesNextWordPredictions) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const auto stack = random_bigram_lm(rng, 4);
        const auto got = trellis_complete(stack, "AB CD ", "", 4, {4, 0.1});
        const auto want = oracle::exhaustive_completions(stack, "AB CD ", "", 4, 4, 0.1);
        ASSERT_EQ(words_of(got).size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].word, want[i].word);
    }
}

TEST(TrellisComplete, CompletesDeclarationVocabulary) {
    const auto out = trellis_complete(doi_models(), "", "INDEPENDE", 6);
    ASSERT_FALSE(out.empty());
    EXPECT_EQ(out.front().word, "INDEPENDENT");
    for (const auto& s : out) EXPECT_TRUE(s.word.starts_with("INDEPENDE"));
}

TEST(TrellisComplete, ScoresDescendAndWordsAreDistinct) {
    const auto out = trellis_complete(doi_models(), "THE", "", 6);
    std::set<std::string> seen;
    for (std::size_t i = 0; i < out.size(); ++i) {
        EXPECT_TRUE(is_word(out[i].word));
        EXPECT_TRUE(seen.insert(out[i].word).second);
        if (i) EXPECT_LE(out[i].score, out[i - 1].score);
    }
}

TEST(TrellisComplete, RejectsBadArguments) {
    EXPECT_THROW(trellis_complete(doi_models(), "", "ABC", 3, {2, 0.1}), ValidationError);
    EXPECT_THROW(trellis_complete(doi_models(), "", "A", 0), ValidationError);
    EXPECT_THROW(trellis_complete(doi_models(), "", "ab", 3), ValidationError);
}

TEST(TrellisComplete, NeverFabricatesWhenNoBoundaryIsReachable) {
    // "AAAA..." with no spaces: space has zero probability everywhere.
    lm::SmoothingParams raw{1.0, 0.0, 0.0, 0.0};  // no biword context: pass through
    const auto stack = lm::build_models("AAAAAAAAAA", {}, raw);
    EXPECT_TRUE(trellis_complete(stack, "", "A", 6, {5, 0.1}).empty());
}

// ---------------------------------------------------------------------------

class FixturePredictor : public ExternalPredictor {
public:
    explicit FixturePredictor(std::vector<ScoredWord> words) : words_(std::move(words)) {}
    std::vector<ScoredWord> complete(const CompletionRequest&) const override { return words_; }

private:
    std::vector<ScoredWord> words_;
};

class FailingPredictor : public ExternalPredictor {
public:
    std::vector<ScoredWord> complete(const CompletionRequest&) const override {
        throw ProtocolError("connection refused");
    }
};

// Merge written out longhand: valid external words in order, then trellis
// words not yet present, capped at n.
std::vector<std::string> merge_oracle(const std::vector<std::string>& ext, const std::vector<std::string>& tr,
                                      const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (const auto& w : ext) {
        if (out.size() == n) break;
        bool ok = !w.empty() && w.rfind(prefix, 0) == 0;
        for (char c : w) ok = ok && c >= 'A' && c <= 'Z';
        for (const auto& o : out) ok = ok && o != w;
        if (ok) out.push_back(w);
    }
    for (const auto& w : tr) {
        if (out.size() == n) break;
        if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
    return out;
}

TEST(LayeredPredict, SixExternalWordsPassThrough) {
    FixturePredictor six({{"HOLD", -1}, {"HAVE", -2}, {"HE", -3}, {"HIS", -4}, {"HAS", -5}, {"HATH", -6}});
    const auto out = layered_predict(&six, doi_models(), "WE", "H", 6);
    EXPECT_EQ(words_of(out), (std::vector<std::string>{"HOLD", "HAVE", "HE", "HIS", "HAS", "HATH"}));
    for (const auto& s : out) EXPECT_EQ(s.source, Source::external);
}

TEST(LayeredPredict, EmptyExternalFallsBackToTrellis) {
    FixturePredictor none({});
    const auto out = layered_predict(&none, doi_models(), "WE", "ZQX", 6);
    const auto tr = trellis_complete(doi_models(), "WE", "ZQX", 6);
    EXPECT_EQ(words_of(out), words_of(tr));
    const auto out2 = layered_predict(nullptr, doi_models(), "WE", "PRO", 4);
    EXPECT_EQ(words_of(out2), words_of(trellis_complete(doi_models(), "WE", "PRO", 4)));
}

TEST(LayeredPredict, TwoExternalPlusFourTrellisWithoutDuplicates) {
    const auto tr = words_of(trellis_complete(doi_models(), "THE", "PE", 12));
    ASSERT_GE(tr.size(), 5u);
    // One external word duplicates the best trellis word.
    std::vector<ScoredWord> fixture{{tr[0], -0.5}, {"PEACEFUL", -1.5}};
    FixturePredictor two(fixture);
    const auto out = layered_predict(&two, doi_models(), "THE", "PE", 6);
    EXPECT_EQ(words_of(out), merge_oracle({tr[0], "PEACEFUL"}, tr, "PE", 6));
    ASSERT_EQ(out.size(), 6u);
    EXPECT_EQ(out[0].source, Source::external);
    EXPECT_EQ(out[1].source, Source::external);
    for (int i = 2; i < 6; ++i) EXPECT_EQ(out[i].source, Source::trellis);
}

TEST(LayeredPredict, InvalidExternalWordsAreDropped) {
    FixturePredictor junk({{"pe", -1}, {"PE X", -1}, {"AXE", -1}, {"PEOPLE", -1}, {"people", -2}, {"", -1}});
    const auto out = layered_predict(&junk, doi_models(), "THE", "PE", 3);
    ASSERT_FALSE(out.empty());
    // lower-case "pe" and "people" normalize to valid words
    EXPECT_EQ(out[0].word, "PE");
    EXPECT_EQ(out[1].word, "PEOPLE");
    EXPECT_EQ(out[2].source, Source::trellis);
}

TEST(LayeredPredict, ServiceFailureIsLoggedAndTreatedAsEmpty) {
    FailingPredictor bad;
    std::vector<std::string> log;
    const auto out = layered_predict(&bad, doi_models(), "WE", "HO", 6, {},
                                     [&](std::string_view m) { log.emplace_back(m); });
    EXPECT_EQ(words_of(out), words_of(trellis_complete(doi_models(), "WE", "HO", 6)));
    ASSERT_EQ(log.size(), 1u);
    EXPECT_NE(log[0].find("refused"), std::string::npos);
}

TEST(LayeredPredict, NeverExceedsNNorDuplicatesAndScoresSumToOne) {
    std::mt19937_64 rng(7);
    const std::vector<std::string> vocab{"THE", "THEY", "THEM", "THAT", "THIS", "THOSE", "TO", "TRUTH", "TYRANNY"};
    std::uniform_int_distribution<int> count(0, 9), nn(1, 6);
    std::uniform_real_distribution<double> lp(-8.0, 0.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ScoredWord> fixture;
        for (int i = count(rng); i > 0; --i) fixture.push_back({vocab[rng() % vocab.size()], lp(rng)});
        FixturePredictor ext(fixture);
        const int n = nn(rng);
        const auto out = layered_predict(&ext, doi_models(), "OF", "T", n);
        EXPECT_LE(out.size(), static_cast<std::size_t>(n));
        std::set<std::string> seen;
        double sum = 0;
        for (const auto& s : out) {
            EXPECT_TRUE(seen.insert(s.word).second);
            EXPECT_TRUE(s.word.starts_with("T"));
            sum += s.score;
        }
        if (!out.empty()) EXPECT_NEAR(sum, 1.0, 1e-12);
    }
    EXPECT_THROW(layered_predict(nullptr, doi_models(), "", "", 7), ValidationError);
}

// ---------------------------------------------------------------------------

TEST(MockPredictor, BuiltTableRanksByBigramFrequency) {
    const auto mock = build_mock_table("We hold these truths. We hold them. We have rights.");
    const auto out = mock.complete({"AND SO WE ", "H", 6});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].word, "HOLD");
    EXPECT_NEAR(out[0].logprob, std::log(2.0 / 3.0), 1e-12);
    EXPECT_EQ(out[1].word, "HAVE");
    // Unknown tail falls back to the any-context row.
    const auto any = mock.complete({"ZEBRA", "T", 6});
    ASSERT_FALSE(any.empty());
    EXPECT_EQ(any[0].word, "THEM");  // THEM, THESE, TRUTHS tie at 1; alphabetical order wins
    EXPECT_TRUE(mock.complete({"WE", "ZQX", 6}).empty());
    EXPECT_EQ(mock.complete({"", "", 2}).size(), 2u);
}

TEST(MockPredictor, ResponsesDescendAndMatchPrefix) {
    const auto mock = build_mock_table(testing::read_file(testing::data_path("corpus.txt")));
    for (const std::string prefix : {"", "T", "PEO", "CONS", "ZQX"}) {
        const auto out = mock.complete({"OF THE", prefix, 3});
        EXPECT_LE(out.size(), 3u);
        for (std::size_t i = 0; i < out.size(); ++i) {
            EXPECT_TRUE(out[i].word.starts_with(prefix));
            if (i) EXPECT_LE(out[i].logprob, out[i - 1].logprob);
        }
    }
}

TEST(MockPredictor, SaveLoadRoundTrip) {
    const auto mock = build_mock_table("the people of the united states in order to form");
    const auto dir = testing::scratch_dir("mock");
    mock.save(dir / "mock.jsonl");
    const auto back = MockPredictor::load(dir / "mock.jsonl");
    EXPECT_EQ(back.size(), mock.size());
    const auto a = mock.complete({"OF", "T", 6});
    const auto b = back.complete({"OF", "T", 6});
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].word, b[i].word);
        EXPECT_DOUBLE_EQ(a[i].logprob, b[i].logprob);
    }
    std::ofstream(dir / "bad.jsonl") << "{\"context\": \"A\"}\n";
    EXPECT_THROW(MockPredictor::load(dir / "bad.jsonl"), ValidationError);
    EXPECT_THROW(MockPredictor::load(dir / "missing.jsonl"), ValidationError);
}

TEST(Protocol, JsonShapes) {
    const auto req = request_to_json({"WE HOLD", "TH", 3});
    EXPECT_EQ(req.dump(), R"({"context":"WE HOLD","n":3,"prefix":"TH"})");
    EXPECT_EQ(request_from_json(req).prefix, "TH");
    EXPECT_THROW(request_from_json(nlohmann::json{{"prefix", "A"}}), ProtocolError);
    const auto resp = response_from_json(nlohmann::json::parse(R"({"suggestions":[{"word":"THESE","logprob":-0.5}]})"));
    ASSERT_EQ(resp.size(), 1u);
    EXPECT_EQ(resp[0].word, "THESE");
    EXPECT_THROW(response_from_json(nlohmann::json::parse(R"({"words":[]})")), ProtocolError);
    EXPECT_THROW(response_from_json(nlohmann::json::parse(R"({"suggestions":[{"word":1}]})")), ProtocolError);
}

TEST(ContextTail, LastWord) {
    EXPECT_EQ(context_tail("we hold these "), "THESE");
    EXPECT_EQ(context_tail("WE"), "WE");
    EXPECT_EQ(context_tail(""), "");
    EXPECT_EQ(context_tail("   "), "");
}

// ---------------------------------------------------------------------------

struct LocalServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    LocalServer() = default;
    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

TEST(HttpPredictor, RoundTripThroughLocalServer) {
    const auto mock = build_mock_table("We hold these truths. We hold them. We have rights.");
    LocalServer srv;
    mount_predictor(srv.server, mock);
    srv.start();
    HttpPredictor http(srv.url(), std::chrono::milliseconds(2000));
    const auto out = http.complete({"WE", "H", 6});
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].word, "HOLD");
    EXPECT_EQ(words_of(layered_predict(&http, doi_models(), "WE", "H", 2)),
              (std::vector<std::string>{"HOLD", "HAVE"}));
}

TEST(HttpPredictor, ProtocolFailuresRaise) {
    LocalServer srv;
    srv.server.Post("/complete", [](const httplib::Request& req, httplib::Response& res) {
        if (req.body.find("\"E500\"") != std::string::npos) {
            res.status = 500;
            return;
        }
        if (req.body.find("\"SLOW\"") != std::string::npos)
            std::this_thread::sleep_for(std::chrono::milliseconds(400));
        res.set_content("not json", "text/plain");
    });
    srv.start();
    HttpPredictor http(srv.url(), std::chrono::milliseconds(150));
    EXPECT_THROW(http.complete({"", "E500", 1}), ProtocolError);
    EXPECT_THROW(http.complete({"", "A", 1}), ProtocolError);
    EXPECT_THROW(http.complete({"", "SLOW", 1}), ProtocolError);
    HttpPredictor nowhere("http://127.0.0.1:1", std::chrono::milliseconds(150));
    EXPECT_THROW(nowhere.complete({"", "A", 1}), ProtocolError);
    EXPECT_THROW(HttpPredictor("ftp://x"), ValidationError);
}

// ---------------------------------------------------------------------------

TEST(BoardPrior, ReservesBackspaceAndSumsToOne) {
    const auto chars = lm::char_prior(doi_models(), "WE HOLD TH");
    const auto b = board_prior(chars);
    double sum = 0;
    for (double x : b) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(b[kBackspaceIndex], 0.05);
    for (int i = kFirstSlotIndex; i < kNumSymbols; ++i) EXPECT_EQ(b[i], 0.0);
    for (int i = 0; i < kNumChars; ++i) EXPECT_GT(b[i], 0.0);
    EXPECT_GT(b[char_index('E')], b[char_index('Q')]);
}

TEST(AttachSuggestions, ZeroLambdaLeavesCharactersUnchanged) {
    const auto b = board_prior(lm::char_prior(doi_models(), "OF "));
    const auto out = attach_suggestions(b, {{"THE", 0.7, Source::trellis}}, 0.0);
    EXPECT_EQ(out, b);
}

TEST(AttachSuggestions, EqualScoresSplitLambdaEvenly) {
    const auto b = board_prior(lm::char_prior(doi_models(), "OF "));
    const auto out = attach_suggestions(b, {{"THE", 1.0, Source::trellis}, {"THIS", 1.0, Source::trellis}}, 0.5);
    EXPECT_DOUBLE_EQ(out[kFirstSlotIndex], 0.25);
    EXPECT_DOUBLE_EQ(out[kFirstSlotIndex + 1], 0.25);
    EXPECT_EQ(out[kFirstSlotIndex + 2], 0.0);
}

TEST(AttachSuggestions, NoSuggestionsMeansNoSlotMass) {
    const auto b = board_prior(lm::char_prior(doi_models(), "OF "));
    EXPECT_EQ(attach_suggestions(b, {}, 0.5), b);
    EXPECT_THROW(attach_suggestions(b, {}, 1.5), ValidationError);
}

TEST(AttachSuggestions, RandomCasesSumToOneAndKeepCharacterOrder) {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> k(0, 6);
    for (int trial = 0; trial < 1000; ++trial) {
        CharVector chars;
        for (double& x : chars) x = u(rng);
        const auto b = board_prior(chars);
        std::vector<Suggestion> s(k(rng));
        for (auto& x : s) x = {"W", u(rng), Source::trellis};
        const double lambda = u(rng);
        const auto out = attach_suggestions(b, s, lambda);
        double sum = 0;
        for (double x : out) sum += x;
        EXPECT_NEAR(sum, 1.0, 1e-12);
        for (int i = 0; i < kNumChars; ++i)
            for (int j = 0; j < kNumChars; ++j)
                if (b[i] < b[j]) ASSERT_LE(out[i], out[j]);
    }
}

TEST(AttachSuggestionsJoint, WordMassComesFromItsNextCharacter) {
    BoardVector b{};
    b[char_index('A')] = 0.5;
    b[char_index('B')] = 0.3;
    b[kSpaceIndex] = 0.15;
    b[kBackspaceIndex] = 0.05;
    const auto out = attach_suggestions_joint(b, {{"XAB", 0.6, Source::trellis, 0.2}, {"X", 0.4, Source::trellis, 0.1}},
                                              "X");
    EXPECT_DOUBLE_EQ(out[kFirstSlotIndex], 0.2);
    EXPECT_DOUBLE_EQ(out[kFirstSlotIndex + 1], 0.1);
    EXPECT_DOUBLE_EQ(out[char_index('A')], 0.3);
    EXPECT_DOUBLE_EQ(out[kSpaceIndex], 0.05);
    EXPECT_DOUBLE_EQ(out[char_index('B')], 0.3);
    EXPECT_DOUBLE_EQ(out[kBackspaceIndex], 0.05);
}

TEST(AttachSuggestionsJoint, OverconfidentWordKeepsFloorAndRenormalizes) {
    BoardVector b{};
    b[char_index('A')] = 0.1;
    b[char_index('B')] = 0.9;
    const auto out = attach_suggestions_joint(b, {{"AB", 1.0, Source::external, 0.5}}, "", 1.0, 0.02);
    const double sum = 0.5 + 0.02 + 0.9;
    EXPECT_NEAR(out[kFirstSlotIndex], 0.5 / sum, 1e-15);
    EXPECT_NEAR(out[char_index('A')], 0.02 / sum, 1e-15);
    EXPECT_NEAR(out[char_index('B')], 0.9 / sum, 1e-15);
}

TEST(AttachSuggestionsJoint, TrellisWordsOnModelPriorSumToOne) {
    const auto& stack = doi_models();
    for (const char* prefix : {"", "T", "GOV", "INDEPEND"}) {
        const std::string context = "WE HOLD THESE";
        const auto chars = lm::char_prior(stack, join_history(context, prefix));
        const auto b = board_prior(chars);
        const auto words = trellis_complete(stack, context, prefix, kMaxSuggestions);
        const auto out = attach_suggestions_joint(b, words, prefix, 0.95);
        double sum = 0;
        for (double x : out) sum += x;
        EXPECT_NEAR(sum, 1.0, 1e-12) << prefix;
        for (std::size_t k = 0; k < words.size(); ++k) EXPECT_GT(out[kFirstSlotIndex + k], 0.0) << words[k].word;
    }
    EXPECT_THROW(attach_suggestions_joint(board_prior(lm::char_prior(doi_models(), "")), {{"DOG", 1.0, Source::trellis, 0.1}}, "CA"),
                 ValidationError);
}

}  // namespace
}  // namespace p300::predict
