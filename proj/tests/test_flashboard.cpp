#include "p300/flashboard.hpp"

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "oracles/prefix_code_oracle.hpp"

namespace p300::board {
namespace {

// Letter ranking used for the diagonal fixture, most likely first.
BoardVector english_like_prior() {
    const std::string order = "ETAINOSHRDLUCMFWYPVBGKJQXZ";
    BoardVector p{};
    double w = 1.0;
    for (char c : order) {
        p[c - 'A'] = w;
        w *= 0.85;
    }
    p[kSpaceIndex] = 0.0;  // letters only
    p[kBackspaceIndex] = 0.0;
    return p;
}

BoardVector random_prior(std::mt19937_64& rng) {
    std::gamma_distribution<double> g(0.5, 1.0);
    BoardVector p{};
    double s = 0;
    for (double& x : p) s += (x = g(rng));
    for (double& x : p) x /= s;
    return p;
}

TEST(BuildLayout, DiagonalPutsSixMostLikelyLettersOnMainDiagonal) {
    const auto layout = build_layout(Scheme::diagonal, english_like_prior());
    const std::string expected = "ETAINO";
    for (int i = 0; i < 6; ++i) EXPECT_EQ(layout.at(i, i), symbol_for_char(expected[i])) << i;
    // Next six on the +1 wrap-around diagonal.
    const std::string next = "SHRDLU";
    for (int i = 0; i < 6; ++i) EXPECT_EQ(layout.at(i, (i + 1) % 6), symbol_for_char(next[i]));
}

TEST(BuildLayout, UniformPriorSequentialEqualsAlphabeticalBoard) {
    BoardVector uniform;
    uniform.fill(1.0 / kNumSymbols);
    const auto layout = build_layout(Scheme::frequency_sorted, uniform);
    for (int i = 0; i < kNumSymbols; ++i) EXPECT_EQ(layout.cell_of(SymbolId{i}), physical_cell(SymbolId{i}));
}

TEST(BuildLayout, PlacementIsBijectiveForEveryScheme) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const auto prior = random_prior(rng);
        for (Scheme s : {Scheme::random, Scheme::deterministic, Scheme::frequency_sorted, Scheme::diagonal,
                         Scheme::huffman}) {
            const auto layout = build_layout(s, prior);
            std::set<std::pair<int, int>> cells;
            for (int i = 0; i < kNumSymbols; ++i) {
                const Cell c = layout.cell_of(SymbolId{i});
                cells.insert({c.row, c.col});
                EXPECT_EQ(layout.at(c.row, c.col), SymbolId{i});
            }
            EXPECT_EQ(cells.size(), static_cast<std::size_t>(kNumSymbols));
        }
    }
}

TEST(BuildLayout, DiagonalRankIsNonincreasingAlongFillOrder) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const auto prior = random_prior(rng);
        const auto layout = build_layout(Scheme::diagonal, prior);
        double prev = 2.0;
        for (int r = 0; r < kNumSymbols; ++r) {
            const Cell c = diagonal_cell(r);
            const double p = prior[layout.at(c.row, c.col).index()];
            EXPECT_LE(p, prev);
            prev = p;
        }
    }
}

TEST(BuildLayout, PhysicalBoardIsConstantAcrossSchemes) {
    std::mt19937_64 rng(1);
    const auto prior = random_prior(rng);
    for (Scheme s : {Scheme::frequency_sorted, Scheme::diagonal, Scheme::random}) {
        (void)build_layout(s, prior);
        for (int i = 0; i < kNumSymbols; ++i)
            EXPECT_EQ(physical_cell(SymbolId{i}), (Cell{i / 6, i % 6}));
    }
}

TEST(BuildLayout, RejectsNegativePrior) {
    BoardVector p{};
    p[0] = -0.1;
    EXPECT_THROW(build_layout(Scheme::diagonal, p), ValidationError);
    EXPECT_THROW(parse_scheme("checkerboard"), ValidationError);
}

TEST(HighlightSchedule, WeightedModeFlashesHeaviestGroupFirst) {
    const auto prior = english_like_prior();
    const auto layout = build_layout(Scheme::diagonal, prior);
    std::mt19937_64 rng(0);
    const auto sched = highlight_schedule(layout, prior, FlashOrder::weighted, rng);
    ASSERT_EQ(sched.size(), 12u);
    double best = 0.0;
    for (const auto& g : row_column_groups(layout, prior)) best = std::max(best, g.weight);
    EXPECT_DOUBLE_EQ(sched.front().weight, best);
    for (std::size_t i = 1; i < sched.size(); ++i) EXPECT_LE(sched[i].weight, sched[i - 1].weight);
}

TEST(HighlightSchedule, RandomModeIsReproducibleUnderSeed) {
    const auto prior = english_like_prior();
    const auto layout = build_layout(Scheme::random, prior);
    std::mt19937_64 a(42), b(42), c(43);
    std::vector<int> ids_a, ids_b, ids_c;
    for (int seq = 0; seq < 5; ++seq) {
        for (const auto& g : highlight_schedule(layout, prior, FlashOrder::random, a)) ids_a.push_back(g.id);
        for (const auto& g : highlight_schedule(layout, prior, FlashOrder::random, b)) ids_b.push_back(g.id);
        for (const auto& g : highlight_schedule(layout, prior, FlashOrder::random, c)) ids_c.push_back(g.id);
    }
    EXPECT_EQ(ids_a, ids_b);
    EXPECT_NE(ids_a, ids_c);
}

TEST(HighlightSchedule, EveryCellCoveredOnceByRowAndOnceByColumn) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const auto prior = random_prior(rng);
        for (Scheme s : {Scheme::random, Scheme::frequency_sorted, Scheme::diagonal}) {
            const auto layout = build_layout(s, prior);
            for (FlashOrder o : {FlashOrder::random, FlashOrder::deterministic, FlashOrder::weighted}) {
                const auto sched = highlight_schedule(layout, prior, o, rng);
                std::array<int, kNumSymbols> rows{}, cols{};
                for (const auto& g : sched)
                    for (SymbolId sym : g.symbols()) (g.id < 6 ? rows : cols)[sym.index()]++;
                for (int i = 0; i < kNumSymbols; ++i) {
                    EXPECT_EQ(rows[i], 1);
                    EXPECT_EQ(cols[i], 1);
                }
            }
        }
    }
}

TEST(HighlightSchedule, DeterministicIsRowsThenColumns) {
    BoardVector prior{};
    prior.fill(1.0 / 36);
    std::mt19937_64 rng(0);
    const auto sched = highlight_schedule(build_layout(Scheme::deterministic, prior), prior,
                                          FlashOrder::deterministic, rng);
    for (int i = 0; i < 12; ++i) EXPECT_EQ(sched[i].id, i);
    EXPECT_TRUE(sched[0].contains(symbol_for_char('A')));
    EXPECT_TRUE(sched[6].contains(symbol_for_char('G')));
}

TEST(BuildHuffman, TextbookDistributionHasExpectedLength) {
    const std::vector<double> p{0.4, 0.2, 0.2, 0.1, 0.1};
    const auto tree = build_huffman(p);
    EXPECT_NEAR(tree.expected_length(), 2.2, 1e-12);
    EXPECT_NEAR(oracle::brute_force_optimal_code_length(p), 2.2, 1e-12);
}

TEST(BuildHuffman, UniformFourSymbolsAreBalanced) {
    const auto tree = build_huffman(std::vector<double>{0.25, 0.25, 0.25, 0.25});
    for (const auto& leaf : tree.leaves()) EXPECT_EQ(leaf.depth, 2);
}

TEST(BuildHuffman, DyadicDepths) {
    const auto tree = build_huffman(std::vector<double>{0.5, 0.25, 0.25});
    const auto leaves = tree.leaves();
    ASSERT_EQ(leaves.size(), 3u);
    EXPECT_EQ(leaves[0].depth, 1);
    EXPECT_EQ(leaves[1].depth, 2);
    EXPECT_EQ(leaves[2].depth, 2);
}

TEST(BuildHuffman, DegenerateAndInvalidInputs) {
    const auto single = build_huffman(std::vector<double>{0.0, 1.0, 0.0});
    EXPECT_TRUE(single.is_leaf(single.root()));
    EXPECT_EQ(single.node(single.root()).symbol, 1);
    EXPECT_FALSE(huffman_next_flash(single, single.root()).has_value());
    EXPECT_THROW(build_huffman(std::vector<double>{0.0, 0.0}), ValidationError);
    EXPECT_THROW(build_huffman(std::vector<double>{0.5, -0.5}), ValidationError);
}

TEST(BuildHuffman, LengthWithinEntropyBoundAndOptimal) {
    std::mt19937_64 rng(2718);
    std::uniform_int_distribution<int> size(2, 6);
    std::gamma_distribution<double> g(0.7, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(size(rng));
        for (double& x : p) x = g(rng) + 1e-9;
        const auto tree = build_huffman(p);
        const double h = entropy_bits(p);
        const double l = tree.expected_length();
        EXPECT_GE(l, h - 1e-12);
        EXPECT_LT(l, h + 1.0);
        EXPECT_NEAR(l, oracle::brute_force_optimal_code_length(p), 1e-9);
    }
}

TEST(HuffmanNextFlash, RootOfDyadicTreeFlashesTheHalfProbabilitySymbol) {
    const auto tree = build_huffman(std::vector<double>{0.5, 0.25, 0.25});
    const auto flash = huffman_next_flash(tree, tree.root());
    ASSERT_TRUE(flash.has_value());
    EXPECT_EQ(flash->symbols(), std::vector<SymbolId>{SymbolId{0}});
    EXPECT_DOUBLE_EQ(flash->weight, 0.5);
}

// Feedback from a perfect observer: in iff the target is in the flashed set.
SymbolId descend(const HuffmanTree& tree, HuffmanCursor& cur, SymbolId target, int flip_at = -1) {
    int step = 0;
    while (!cur.at_leaf()) {
        bool in = huffman_next_flash(tree, cur.node())->contains(target);
        if (step++ == flip_at) in = !in;
        cur.advance(in);
    }
    return cur.leaf_symbol();
}

TEST(HuffmanCursor, DepthDLeafNeedsExactlyDDecisions) {
    std::mt19937_64 rng(8);
    std::gamma_distribution<double> g(0.5, 1.0);
    std::vector<double> p(kNumSymbols);
    for (double& x : p) x = g(rng) + 1e-6;
    const auto tree = build_huffman(p);
    for (const auto& leaf : tree.leaves()) {
        HuffmanCursor cur(tree);
        EXPECT_EQ(descend(tree, cur, leaf.symbol), leaf.symbol);
        EXPECT_EQ(cur.decisions(), leaf.depth);
    }
}

TEST(HuffmanCursor, WrongBranchCostsWrongLeafDepthThenRestart) {
    // Forced error at decision k sends the walk to some other leaf; after the
    // failed confirmation the walk restarts at the root, so total decisions
    // equal depth(wrong leaf) + depth(target).
    std::vector<double> p{0.3, 0.2, 0.15, 0.1, 0.1, 0.08, 0.04, 0.03};
    const auto tree = build_huffman(p);
    std::map<int, int> histogram;  // total decisions -> occurrences
    for (const auto& leaf : tree.leaves()) {
        for (int k = 0; k < leaf.depth; ++k) {
            HuffmanCursor cur(tree);
            const SymbolId wrong = descend(tree, cur, leaf.symbol, k);
            ASSERT_NE(wrong, leaf.symbol);
            const int first_pass = cur.decisions();
            EXPECT_EQ(first_pass, tree.depth_of(wrong));
            cur.restart();
            EXPECT_EQ(descend(tree, cur, leaf.symbol), leaf.symbol);
            EXPECT_EQ(cur.decisions(), tree.depth_of(wrong) + leaf.depth);
            histogram[cur.decisions()]++;
        }
    }
    int total = 0;
    for (const auto& leaf : tree.leaves()) total += leaf.depth;
    int counted = 0;
    for (auto [k, n] : histogram) counted += n;
    EXPECT_EQ(counted, total);
}

TEST(LayoutJson, DumpsEverySymbolOnce) {
    const auto j = layout_to_json(build_layout(Scheme::diagonal, english_like_prior()));
    EXPECT_EQ(j["scheme"], "diagonal");
    EXPECT_EQ(j["placement"].size(), static_cast<std::size_t>(kNumSymbols));
    EXPECT_EQ(j["placement"]["E"], (nlohmann::json{0, 0}));
}

}  // namespace
}  // namespace p300::board
