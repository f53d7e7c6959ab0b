#include <doctest.h>

#include <set>

#include "seqhmm/alphabet.hpp"
#include "seqhmm/dataset.hpp"
#include "seqhmm/error.hpp"

using namespace seqhmm;

namespace {
std::string bits(const std::vector<std::uint8_t>& v) {
  std::string s;
  for (auto b : v) s.push_back(static_cast<char>('0' + b));
  return s;
}
}  // namespace

TEST_SUITE("alphabet") {
  TEST_CASE("anchor codes") {
    CHECK(bits(encode_symbol_binary('A', residue_alphabet(), 5)) == "00001");
    CHECK(bits(encode_symbol_binary('H', structure_alphabet(), 3)) == "001");
    CHECK(bits(encode_symbol_binary('Y', residue_alphabet(), 5)) == "10100");
    CHECK(bits(encode_symbol_binary('U', structure_alphabet(), 3)) == "000");
    CHECK(bits(encode_symbol_binary('S', structure_alphabet(), 3)) == "111");
  }

  TEST_CASE("wider codes are zero-extended on the left") {
    CHECK(bits(encode_symbol_binary('A', residue_alphabet(), 7)) == "0000001");
  }

  TEST_CASE("width below the minimum is rejected") {
    CHECK_THROWS_AS(encode_symbol_binary('A', residue_alphabet(), 4), std::invalid_argument);
    CHECK_THROWS_AS(encode_symbol_binary('H', structure_alphabet(), 2), std::invalid_argument);
  }

  TEST_CASE("unknown symbol") {
    CHECK_THROWS_AS(encode_symbol_binary('X', residue_alphabet(), 5), SymbolNotInAlphabet);
    CHECK_THROWS_AS(encode_symbol_binary('A', structure_alphabet(), 3), SymbolNotInAlphabet);
  }

  TEST_CASE("encoding round-trips and is injective") {
    for (const Alphabet* a : {&residue_alphabet(), &structure_alphabet()}) {
      std::set<std::string> seen;
      for (char c : a->symbols()) {
        auto code = encode_symbol_binary(c, *a, a->min_code_width());
        CHECK(decode_symbol_binary(code, *a) == c);
        seen.insert(bits(code));
      }
      CHECK(seen.size() == a->size());
    }
    CHECK(residue_alphabet().min_code_width() == 5);
    CHECK(structure_alphabet().min_code_width() == 3);
  }

  TEST_CASE("illegal code is not decoded") {
    std::vector<std::uint8_t> zero(5, 0);
    CHECK_THROWS_AS(decode_symbol_binary(zero, residue_alphabet()), SymbolNotInAlphabet);
    std::vector<std::uint8_t> big{1, 1, 1, 1, 1};
    CHECK_THROWS_AS(decode_symbol_binary(big, residue_alphabet()), SymbolNotInAlphabet);
  }

  TEST_CASE("index vectors") {
    CHECK(sequence_to_index_vector("AA", residue_alphabet()) == std::vector<int>{0, 0});
    CHECK(sequence_to_index_vector("HU", structure_alphabet()) == std::vector<int>{0, 7});
    CHECK(sequence_to_index_vector("", residue_alphabet()).empty());
    std::vector<int> idx{0, 7, 3};
    CHECK(index_vector_to_sequence(idx, structure_alphabet()) == "HUE");
    try {
      sequence_to_index_vector("ACZ", residue_alphabet());
      FAIL("expected throw");
    } catch (const SymbolNotInAlphabet& e) {
      CHECK(e.symbol() == 'Z');
      CHECK(e.position() == 2);
    }
  }

  TEST_CASE("three-class reduction") {
    CHECK(reduce_to_three_class('H') == 'H');
    CHECK(reduce_to_three_class('G') == 'H');
    CHECK(reduce_to_three_class('I') == 'H');
    CHECK(reduce_to_three_class('E') == 'E');
    CHECK(reduce_to_three_class('B') == 'E');
    CHECK(reduce_to_three_class('T') == 'C');
    CHECK(reduce_to_three_class('S') == 'C');
    CHECK(reduce_to_three_class('U') == 'C');
  }
}

TEST_SUITE("dataset") {
  TEST_CASE("minimal pair") {
    auto r = parse_corpus("seq{1}='AA'\nstr{1}='HH'\n");
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus.pairs[0] == LabeledPair{1, "AA", "HH"});
    CHECK(r.warnings.empty());
  }

  TEST_CASE("payloads may wrap and are upper-cased") {
    auto r = parse_corpus("seq{2} = 'ac\n  dE'\nstr{2}='hh\n\tee'\n");
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus.pairs[0].seq == "ACDE");
    CHECK(r.corpus.pairs[0].str == "HHEE");
  }

  TEST_CASE("illegal symbol in strict mode") {
    try {
      parse_corpus("seq{1}='AXA'\nstr{1}='HHH'");
      FAIL("expected throw");
    } catch (const IllegalSymbol& e) {
      CHECK(e.id() == 1);
      CHECK(e.symbol() == 'X');
      CHECK(e.position() == 2);
    }
  }

  TEST_CASE("missing partner and length mismatch") {
    CHECK_THROWS_AS(parse_corpus("seq{1}='AA'\n"), MissingPartner);
    CHECK_THROWS_AS(parse_corpus("str{4}='HH'\n"), MissingPartner);
    try {
      parse_corpus("seq{3}='AAA'\nstr{3}='HH'");
      FAIL("expected throw");
    } catch (const LengthMismatch& e) {
      CHECK(e.id() == 3);
    }
  }

  TEST_CASE("lenient mode skips bad pairs") {
    auto r = parse_corpus("seq{1}='AA'\nstr{1}='HH'\nseq{2}='AXA'\nstr{2}='HHH'\nseq{3}='A'\n",
                          ParseMode::Lenient);
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus.pairs[0].id == 1);
    CHECK(r.warnings.size() == 2);
  }

  TEST_CASE("repair mode drops illegal characters and truncates") {
    auto r = parse_corpus("seq{1}='AOAC'\nstr{1}='HHEEU'\n", ParseMode::Repair);
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus.pairs[0].seq == "AAC");
    CHECK(r.corpus.pairs[0].str == "HHE");
    CHECK(r.warnings.size() == 2);
  }

  TEST_CASE("plain record format") {
    auto r = parse_corpus(">7\nACD\nHEU\n\n>9\nW\nS\n");
    REQUIRE(r.corpus.size() == 2);
    CHECK(r.corpus.pairs[0] == LabeledPair{7, "ACD", "HEU"});
    CHECK(r.corpus.pairs[1] == LabeledPair{9, "W", "S"});
    CHECK(r.corpus.find(9) != nullptr);
    CHECK(r.corpus.find(8) == nullptr);
  }

  TEST_CASE("duplicates") {
    const char* text = "seq{1}='AA'\nstr{1}='HH'\nseq{1}='CC'\n";
    CHECK_THROWS_AS(parse_corpus(text), ParseError);
    auto r = parse_corpus(text, ParseMode::Lenient);
    CHECK(r.corpus.size() == 1);
    CHECK_FALSE(r.warnings.empty());
  }

  TEST_CASE("round trip through the assignment grammar") {
    auto a = parse_corpus(">1\nACDEFGHIKL\nHGIEBTSUHH\n>5\nMNPQRSTVWY\nUUUEEEHHHT\n").corpus;
    auto b = parse_corpus(format_corpus(a)).corpus;
    CHECK(a == b);
  }

  TEST_CASE("parse mode names") {
    CHECK(parse_mode_from_string("strict") == ParseMode::Strict);
    CHECK(parse_mode_from_string("lenient") == ParseMode::Lenient);
    CHECK(parse_mode_from_string("repair") == ParseMode::Repair);
    CHECK_THROWS(parse_mode_from_string("fix"));
  }

  TEST_CASE("sample corpus in repair mode") {
    auto r = load_corpus(SEQHMM_DATA_DIR "/sample20.txt", ParseMode::Repair);
    CHECK(r.corpus.size() == 20);
    for (const auto& p : r.corpus.pairs) {
      CHECK(p.seq.size() == p.str.size());
      for (char c : p.seq) CHECK(residue_alphabet().contains(c));
      for (char c : p.str) CHECK(structure_alphabet().contains(c));
    }
    CHECK_THROWS_AS(load_corpus(SEQHMM_DATA_DIR "/sample20.txt", ParseMode::Strict), ParseError);
  }

  TEST_CASE("folds follow the block-of-100 rule on large corpora") {
    auto folds = make_folds(507, 5);
    REQUIRE(folds.size() == 5);
    CHECK(folds[0].test_ids.front() == 1);
    CHECK(folds[0].test_ids.back() == 100);
    CHECK(folds[0].train_ids.front() == 101);
    CHECK(folds[0].train_ids.back() == 507);
    CHECK(folds[0].train_ids.size() == 407);
    CHECK(folds[4].test_ids.front() == 401);
    CHECK(folds[4].test_ids.back() == 500);
    CHECK(format_id_span(folds[0].train_ids) == "101-507");
    CHECK(format_id_span(folds[2].train_ids) == "1-200;301-507");
  }

  TEST_CASE("folds on small corpora") {
    auto folds = make_folds(20, 5);
    REQUIRE(folds.size() == 5);
    CHECK(folds[0].test_ids == std::vector<int>{1, 2, 3, 4});
    CHECK(folds[0].train_ids.front() == 5);
    CHECK(folds[0].train_ids.size() == 16);
    auto uneven = make_folds(22, 5);
    CHECK(uneven[4].test_ids.size() == 6);
    CHECK(uneven[4].test_ids.back() == 22);
  }

  TEST_CASE("invalid fold counts") {
    CHECK_THROWS_AS(make_folds(20, 1), InvalidFoldCount);
    CHECK_THROWS_AS(make_folds(20, 0), InvalidFoldCount);
    CHECK_THROWS_AS(make_folds(3, 4), InvalidFoldCount);
  }

  TEST_CASE("fold partition property") {
    for (std::size_t size = 2; size <= 60; ++size) {
      for (std::size_t n = 2; n <= size; ++n) {
        auto folds = make_folds(size, n);
        std::set<int> seen;
        for (const auto& f : folds) {
          CHECK_FALSE(f.test_ids.empty());
          CHECK_FALSE(f.train_ids.empty());
          CHECK(f.test_ids.size() + f.train_ids.size() == size);
          for (int id : f.test_ids) CHECK(seen.insert(id).second);
        }
        CHECK(seen.size() == size);
        CHECK(*seen.begin() == 1);
        CHECK(*seen.rbegin() == static_cast<int>(size));
      }
    }
  }

  TEST_CASE("corpus folds map positions to ids") {
    auto c = parse_corpus(">3\nA\nH\n>8\nC\nE\n>10\nD\nU\n>11\nE\nH\n").corpus;
    auto folds = make_corpus_folds(c, 2);
    CHECK(folds[0].test_ids == std::vector<int>{3, 8});
    CHECK(folds[1].test_ids == std::vector<int>{10, 11});
    CHECK(folds[1].train_ids == std::vector<int>{3, 8});
  }

  TEST_CASE("summary json") {
    auto c = parse_corpus(">1\nACD\nHHE\n").corpus;
    auto j = corpus_summary(c);
    CHECK(j["n_pairs"] == 1);
    CHECK(j["pairs"][0]["length"] == 3);
    CHECK(j["pairs"][0]["structure_counts"]["H"] == 2);
  }
}
