#pragma once
// Virtual flashboards. The physical 6x6 grid stays fixed; a scheme only
// changes which symbols light up together. Row/column schemes place symbols
// on a virtual grid and flash its rows and columns; the Huffman scheme
// flashes subtrees of an optimal prefix-code tree instead.

#include <algorithm>
#include <array>
#include <bitset>
#include <cmath>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "p300/error.hpp"
#include "p300/symbols.hpp"

namespace p300::board {

enum class Scheme { random, deterministic, frequency_sorted, diagonal, huffman };

inline std::string_view scheme_name(Scheme s) {
    switch (s) {
        case Scheme::random: return "random";
        case Scheme::deterministic: return "deterministic";
        case Scheme::frequency_sorted: return "frequency_sorted";
        case Scheme::diagonal: return "diagonal";
        case Scheme::huffman: return "huffman";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name) {
    for (Scheme s : {Scheme::random, Scheme::deterministic, Scheme::frequency_sorted, Scheme::diagonal,
                     Scheme::huffman})
        if (scheme_name(s) == name) return s;
    if (name == "freqsorted" || name == "sequential") return Scheme::frequency_sorted;
    throw ValidationError("unknown flashboard scheme: " + std::string(name));
}

enum class FlashOrder { random, deterministic, weighted };

struct Cell {
    int row = 0;
    int col = 0;
    friend bool operator==(Cell, Cell) = default;
};

/// The physical board: symbol i sits at (i / 6, i % 6).
constexpr Cell physical_cell(SymbolId s) { return {s.index() / kBoardCols, s.index() % kBoardCols}; }

struct VirtualLayout {
    Scheme scheme = Scheme::random;
    std::array<Cell, kNumSymbols> placement{};                   // symbol -> virtual cell
    std::array<std::array<SymbolId, kBoardCols>, kBoardRows> grid{};  // virtual cell -> symbol

    Cell cell_of(SymbolId s) const { return placement[s.index()]; }
    SymbolId at(int row, int col) const { return grid[row][col]; }
};

/// Symbols sorted by descending probability, ties broken by symbol index
/// (alphabetical on the physical board).
inline std::array<SymbolId, kNumSymbols> rank_symbols(const BoardVector& prior) {
    std::array<SymbolId, kNumSymbols> order{};
    for (int i = 0; i < kNumSymbols; ++i) order[i] = SymbolId{i};
    std::stable_sort(order.begin(), order.end(),
                     [&](SymbolId a, SymbolId b) { return prior[a.index()] > prior[b.index()]; });
    return order;
}

/// Virtual cell for the k-th most likely symbol under the diagonal scheme:
/// main diagonal first, then wrap-around diagonals at offsets +1, -1, +2, -2, +3.
constexpr Cell diagonal_cell(int rank) {
    constexpr int offsets[kBoardRows] = {0, 1, -1, 2, -2, 3};
    const int diag = rank / kBoardCols;
    const int row = rank % kBoardCols;
    return {row, ((row + offsets[diag]) % kBoardCols + kBoardCols) % kBoardCols};
}

inline VirtualLayout build_layout(Scheme scheme, const BoardVector& prior) {
    for (double p : prior) require(p >= 0.0 && std::isfinite(p), "layout prior must be finite and >= 0");
    VirtualLayout layout;
    layout.scheme = scheme;
    auto place = [&](SymbolId s, Cell c) {
        layout.placement[s.index()] = c;
        layout.grid[c.row][c.col] = s;
    };
    switch (scheme) {
        case Scheme::random:
        case Scheme::deterministic:
        case Scheme::huffman:
            for (int i = 0; i < kNumSymbols; ++i) place(SymbolId{i}, physical_cell(SymbolId{i}));
            break;
        case Scheme::frequency_sorted: {
            const auto order = rank_symbols(prior);
            for (int r = 0; r < kNumSymbols; ++r) place(order[r], {r / kBoardCols, r % kBoardCols});
            break;
        }
        case Scheme::diagonal: {
            const auto order = rank_symbols(prior);
            for (int r = 0; r < kNumSymbols; ++r) place(order[r], diagonal_cell(r));
            break;
        }
    }
    return layout;
}

using SymbolSet = std::bitset<kNumSymbols>;

struct FlashGroup {
    SymbolSet members;
    double weight = 0.0;  // prior mass of the members
    int id = -1;          // 0..5 virtual rows, 6..11 virtual columns; -1 for tree groups

    bool contains(SymbolId s) const { return members.test(s.index()); }
    std::vector<SymbolId> symbols() const {
        std::vector<SymbolId> out;
        for (int i = 0; i < kNumSymbols; ++i)
            if (members.test(i)) out.push_back(SymbolId{i});
        return out;
    }
};

inline double set_mass(const SymbolSet& set, const BoardVector& prob) {
    double m = 0.0;
    for (int i = 0; i < kNumSymbols; ++i)
        if (set.test(i)) m += prob[i];
    return m;
}

/// The 6 virtual rows followed by the 6 virtual columns of a layout.
inline std::array<FlashGroup, kGroupsPerSequence> row_column_groups(const VirtualLayout& layout,
                                                                   const BoardVector& prior) {
    std::array<FlashGroup, kGroupsPerSequence> groups{};
    for (int r = 0; r < kBoardRows; ++r) {
        for (int c = 0; c < kBoardCols; ++c) {
            const SymbolId s = layout.at(r, c);
            groups[r].members.set(s.index());
            groups[kBoardRows + c].members.set(s.index());
        }
    }
    for (int g = 0; g < kGroupsPerSequence; ++g) {
        groups[g].id = g;
        groups[g].weight = set_mass(groups[g].members, prior);
    }
    return groups;
}

/// One full scan of the board: each virtual row and column exactly once.
///  - random: uniform permutation drawn from `rng`
///  - deterministic: rows 0..5 then columns 0..5
///  - weighted: descending group mass under `prior` (ties by group id)
inline std::vector<FlashGroup> highlight_schedule(const VirtualLayout& layout, const BoardVector& prior,
                                                  FlashOrder order, std::mt19937_64& rng) {
    auto groups = row_column_groups(layout, prior);
    std::vector<FlashGroup> out(groups.begin(), groups.end());
    switch (order) {
        case FlashOrder::deterministic:
            break;
        case FlashOrder::random:
            std::shuffle(out.begin(), out.end(), rng);
            break;
        case FlashOrder::weighted:
            std::stable_sort(out.begin(), out.end(),
                             [](const FlashGroup& a, const FlashGroup& b) { return a.weight > b.weight; });
            break;
    }
    return out;
}

inline FlashOrder default_order(Scheme scheme) {
    switch (scheme) {
        case Scheme::random: return FlashOrder::random;
        case Scheme::deterministic: return FlashOrder::deterministic;
        default: return FlashOrder::weighted;
    }
}

// ---------------------------------------------------------------------------
// Huffman scanning
// ---------------------------------------------------------------------------

class HuffmanTree {
public:
    struct Node {
        int one = -1;   // child whose members are flashed
        int zero = -1;  // the other child
        int symbol = -1;
        double prob = 0.0;
        int depth = 0;
        SymbolSet members;
        bool leaf() const { return one < 0; }
    };

    int root() const { return root_; }
    const Node& node(int i) const { return nodes_.at(i); }
    std::size_t size() const { return nodes_.size(); }
    bool is_leaf(int i) const { return node(i).leaf(); }

    /// Leaves in symbol order as (symbol, depth, probability).
    struct LeafInfo {
        SymbolId symbol;
        int depth;
        double prob;
    };
    std::vector<LeafInfo> leaves() const {
        std::vector<LeafInfo> out;
        for (const auto& n : nodes_)
            if (n.leaf()) out.push_back({SymbolId{n.symbol}, n.depth, n.prob});
        std::sort(out.begin(), out.end(),
                  [](const LeafInfo& a, const LeafInfo& b) { return a.symbol < b.symbol; });
        return out;
    }

    int depth_of(SymbolId s) const {
        for (const auto& n : nodes_)
            if (n.leaf() && n.symbol == s.index()) return n.depth;
        return -1;
    }

    /// Expected code length in bits, with leaf probabilities normalized.
    double expected_length() const {
        double total = 0.0, weighted = 0.0;
        for (const auto& n : nodes_) {
            if (!n.leaf()) continue;
            total += n.prob;
            weighted += n.prob * n.depth;
        }
        return total > 0.0 ? weighted / total : 0.0;
    }

private:
    friend HuffmanTree build_huffman(std::span<const double> prior);
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Optimal binary prefix-code tree over the symbols with positive probability.
/// Indices into `prior` become leaf symbols. Fewer than two positive entries
/// give a single-leaf tree. Merge ties are broken by creation order, and the
/// heavier child of each merge (ties: earlier-created) is the flashed "1" branch.
inline HuffmanTree build_huffman(std::span<const double> prior) {
    double sum = 0.0;
    for (double p : prior) {
        require(p >= 0.0 && std::isfinite(p), "Huffman probabilities must be finite and >= 0");
        sum += p;
    }
    require(sum > 0.0, "Huffman prior must have positive total mass");

    HuffmanTree tree;
    auto& nodes = tree.nodes_;
    using Entry = std::pair<double, int>;  // (prob, node index)
    auto cmp = [](const Entry& a, const Entry& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    for (std::size_t i = 0; i < prior.size(); ++i) {
        if (prior[i] <= 0.0) continue;
        HuffmanTree::Node leaf;
        leaf.symbol = static_cast<int>(i);
        leaf.prob = prior[i];
        if (i < kNumSymbols) leaf.members.set(i);
        nodes.push_back(leaf);
        heap.push({leaf.prob, static_cast<int>(nodes.size()) - 1});
    }
    while (heap.size() > 1) {
        const Entry a = heap.top();
        heap.pop();
        const Entry b = heap.top();
        heap.pop();
        HuffmanTree::Node parent;
        // a is lighter (or equal and earlier); the heavier one is flashed.
        const bool b_heavier = b.first > a.first;
        parent.one = b_heavier ? b.second : a.second;
        parent.zero = b_heavier ? a.second : b.second;
        parent.prob = a.first + b.first;
        parent.members = nodes[a.second].members | nodes[b.second].members;
        nodes.push_back(parent);
        heap.push({parent.prob, static_cast<int>(nodes.size()) - 1});
    }
    tree.root_ = heap.top().second;

    // Depths by walking down from the root.
    std::vector<int> stack{tree.root_};
    nodes[tree.root_].depth = 0;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        if (nodes[i].leaf()) continue;
        for (int c : {nodes[i].one, nodes[i].zero}) {
            nodes[c].depth = nodes[i].depth + 1;
            stack.push_back(c);
        }
    }
    return tree;
}

/// Highlight set for the node under the cursor: the "1" child's members.
/// A leaf yields no flash; its symbol is the selection.
inline std::optional<FlashGroup> huffman_next_flash(const HuffmanTree& tree, int cursor) {
    const auto& n = tree.node(cursor);
    if (n.leaf()) return std::nullopt;
    FlashGroup g;
    g.members = tree.node(n.one).members;
    g.weight = tree.node(n.one).prob;
    return g;
}

/// Walks a Huffman tree with in/out feedback; restarts at the root after a
/// failed leaf confirmation.
class HuffmanCursor {
public:
    explicit HuffmanCursor(const HuffmanTree& tree) : tree_(&tree), node_(tree.root()) {}

    int node() const { return node_; }
    bool at_leaf() const { return tree_->is_leaf(node_); }
    SymbolId leaf_symbol() const { return SymbolId{tree_->node(node_).symbol}; }
    int decisions() const { return decisions_; }

    /// `in` = the target was judged inside the flashed ("1") child.
    void advance(bool in) {
        const auto& n = tree_->node(node_);
        if (n.leaf()) throw std::logic_error("HuffmanCursor::advance at a leaf");
        node_ = in ? n.one : n.zero;
        ++decisions_;
    }
    void restart() { node_ = tree_->root(); }

private:
    const HuffmanTree* tree_;
    int node_;
    int decisions_ = 0;
};

/// Shannon entropy in bits of a (not necessarily normalized) distribution.
inline double entropy_bits(std::span<const double> p) {
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    double h = 0.0;
    for (double x : p)
        if (x > 0.0) h -= (x / sum) * std::log2(x / sum);
    return h;
}

// ---------------------------------------------------------------------------
// Fixture dumps
// ---------------------------------------------------------------------------

inline nlohmann::json layout_to_json(const VirtualLayout& layout) {
    nlohmann::json placement = nlohmann::json::object();
    for (int i = 0; i < kNumSymbols; ++i) {
        const Cell c = layout.placement[i];
        placement[symbol_label(SymbolId{i})] = {c.row, c.col};
    }
    return {{"scheme", std::string(scheme_name(layout.scheme))}, {"placement", placement}};
}

}  // namespace p300::board
