#include "seqhmm/alphabet.hpp"

#include <stdexcept>

#include "seqhmm/error.hpp"

namespace seqhmm {

Alphabet::Alphabet(std::string_view name, std::string_view symbols)
    : name_(name), symbols_(symbols) {
  lookup_.fill(-1);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    auto& slot = lookup_[static_cast<unsigned char>(symbols_[i])];
    if (slot != -1) throw std::invalid_argument("duplicate alphabet symbol");
    slot = static_cast<int>(i);
  }
  while ((std::size_t{1} << min_width_) < symbols_.size()) ++min_width_;
}

int Alphabet::index(char c, std::size_t position) const {
  int i = index_of(c);
  if (i < 0) throw SymbolNotInAlphabet(c, position);
  return i;
}

std::uint32_t Alphabet::code_value(std::size_t index) const {
  return static_cast<std::uint32_t>((index + 1) % (std::size_t{1} << min_width_));
}

int Alphabet::index_of_code(std::uint32_t code) const {
  for (std::size_t i = 0; i < size(); ++i)
    if (code_value(i) == code) return static_cast<int>(i);
  return -1;
}

const Alphabet& residue_alphabet() {
  static const Alphabet a("residues", "ACDEFGHIKLMNPQRSTVWY");
  return a;
}

const Alphabet& structure_alphabet() {
  static const Alphabet a("structures", "HGIEBTSU");
  return a;
}

std::vector<int> sequence_to_index_vector(std::string_view s, const Alphabet& alphabet) {
  std::vector<int> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back(alphabet.index(s[i], i));
  return out;
}

std::string index_vector_to_sequence(std::span<const int> indices, const Alphabet& alphabet) {
  std::string out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(alphabet.symbol(static_cast<std::size_t>(i)));
  return out;
}

std::vector<std::uint8_t> encode_symbol_binary(char symbol, const Alphabet& alphabet, int width) {
  if (width < alphabet.min_code_width())
    throw std::invalid_argument("code width too small for alphabet " +
                                std::string(alphabet.name()));
  const auto code = alphabet.code_value(static_cast<std::size_t>(alphabet.index(symbol)));
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(width));
  for (int b = 0; b < width; ++b) bits[static_cast<std::size_t>(width - 1 - b)] = (code >> b) & 1U;
  return bits;
}

char decode_symbol_binary(std::span<const std::uint8_t> bits, const Alphabet& alphabet) {
  std::uint32_t code = 0;
  for (auto b : bits) code = (code << 1) | (b ? 1U : 0U);
  int i = alphabet.index_of_code(code);
  if (i < 0) throw SymbolNotInAlphabet('?', 0);
  return alphabet.symbol(static_cast<std::size_t>(i));
}

char reduce_to_three_class(char s) {
  switch (s) {
    case 'H':
    case 'G':
    case 'I':
      return 'H';
    case 'E':
    case 'B':
      return 'E';
    case 'T':
    case 'S':
    case 'U':
      return 'C';
    default:
      throw SymbolNotInAlphabet(s, 0);
  }
}

}  // namespace seqhmm
