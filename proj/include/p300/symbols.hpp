#pragma once
// Cell alphabet of the 6x6 speller board.
//
// Physical row-major order: A..Z, word-space, backspace, 8 suggestion slots.
// The physical board never changes; schemes only regroup highlight sets.

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace p300 {

inline constexpr int kBoardRows = 6;
inline constexpr int kBoardCols = 6;
inline constexpr int kNumSymbols = kBoardRows * kBoardCols;
inline constexpr int kNumLetters = 26;
inline constexpr int kSpaceIndex = 26;
inline constexpr int kBackspaceIndex = 27;
inline constexpr int kFirstSlotIndex = 28;
inline constexpr int kNumSlots = 8;
/// Letters plus word-space: the symbols a character language model scores.
inline constexpr int kNumChars = 27;
/// Row and column groups per full scan of the board.
inline constexpr int kGroupsPerSequence = kBoardRows + kBoardCols;

struct SymbolId {
    std::uint8_t value = 0;

    constexpr SymbolId() = default;
    constexpr explicit SymbolId(int v) : value(static_cast<std::uint8_t>(v)) {}

    constexpr int index() const { return value; }
    constexpr bool is_letter() const { return value < kNumLetters; }
    constexpr bool is_space() const { return value == kSpaceIndex; }
    constexpr bool is_char() const { return value < kNumChars; }
    constexpr bool is_backspace() const { return value == kBackspaceIndex; }
    constexpr bool is_slot() const { return value >= kFirstSlotIndex && value < kNumSymbols; }
    constexpr int slot() const { return value - kFirstSlotIndex; }

    friend constexpr auto operator<=>(SymbolId, SymbolId) = default;
};

inline constexpr SymbolId kSpace{kSpaceIndex};
inline constexpr SymbolId kBackspace{kBackspaceIndex};

constexpr SymbolId slot_symbol(int slot) { return SymbolId{kFirstSlotIndex + slot}; }

/// Character-model index (0..26) of an uppercase letter or ' '; -1 otherwise.
constexpr int char_index(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c == ' ') return kSpaceIndex;
    return -1;
}

constexpr char index_char(int i) { return i == kSpaceIndex ? ' ' : static_cast<char>('A' + i); }

inline SymbolId symbol_for_char(char c) {
    int i = char_index(c);
    if (i < 0) throw std::invalid_argument(std::string("not a board character: '") + c + "'");
    return SymbolId{i};
}

/// Short display label: letter, "_" for space, "<" for backspace, "#k" for slot k.
inline std::string symbol_label(SymbolId s) {
    if (s.is_letter()) return std::string(1, static_cast<char>('A' + s.index()));
    if (s.is_space()) return "_";
    if (s.is_backspace()) return "<";
    return "#" + std::to_string(s.slot());
}

/// Probability (or weight) per board cell, indexed by SymbolId::index().
using BoardVector = std::array<double, kNumSymbols>;
/// Probability per character-model symbol (letters + space).
using CharVector = std::array<double, kNumChars>;

}  // namespace p300
