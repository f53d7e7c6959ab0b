#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace seqhmm {

// Fixed ordered alphabet with a symbol -> index map.
//
// Binary codes: symbol at index i is assigned the value (i + 1) mod 2^w,
// where w = ceil(log2(size)) is the minimal code width. For the residue
// alphabet this gives A -> 00001 ... Y -> 10100; for the structure alphabet
// H -> 001, G -> 010, ..., S -> 111 and the blank class U -> 000.
class Alphabet {
 public:
  Alphabet(std::string_view name, std::string_view symbols);

  std::string_view name() const { return name_; }
  std::string_view symbols() const { return symbols_; }
  std::size_t size() const { return symbols_.size(); }

  bool contains(char c) const { return index_of(c) >= 0; }
  // -1 when absent.
  int index_of(char c) const { return lookup_[static_cast<unsigned char>(c)]; }
  // Throws SymbolNotInAlphabet with the supplied position.
  int index(char c, std::size_t position = 0) const;
  char symbol(std::size_t index) const { return symbols_.at(index); }

  int min_code_width() const { return min_width_; }
  std::uint32_t code_value(std::size_t index) const;
  // -1 when no symbol carries this code.
  int index_of_code(std::uint32_t code) const;

 private:
  std::string name_;
  std::string symbols_;
  std::array<int, 256> lookup_{};
  int min_width_ = 0;
};

const Alphabet& residue_alphabet();
const Alphabet& structure_alphabet();

std::vector<int> sequence_to_index_vector(std::string_view s, const Alphabet& alphabet);
std::string index_vector_to_sequence(std::span<const int> indices, const Alphabet& alphabet);

// Fixed-width big-endian bit vector. Throws SymbolNotInAlphabet, or
// std::invalid_argument if width < alphabet.min_code_width().
std::vector<std::uint8_t> encode_symbol_binary(char symbol, const Alphabet& alphabet, int width);
// Inverse of encode_symbol_binary; throws SymbolNotInAlphabet for illegal codes.
char decode_symbol_binary(std::span<const std::uint8_t> bits, const Alphabet& alphabet);

// Three-class reduction of a structure symbol: H,G,I -> 'H'; E,B -> 'E'; T,S,U -> 'C'.
char reduce_to_three_class(char structure_symbol);

}  // namespace seqhmm
