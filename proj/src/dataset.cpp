#include "seqhmm/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "seqhmm/alphabet.hpp"
#include "seqhmm/error.hpp"

namespace seqhmm {

namespace {

std::string clean_payload(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) continue;
    out.push_back(static_cast<char>(std::toupper(u)));
  }
  return out;
}

struct RawEntry {
  std::optional<std::string> seq;
  std::optional<std::string> str;
};

using RawEntries = std::map<int, RawEntry>;

void assign(RawEntries& entries, int id, bool is_seq, std::string payload, ParseMode mode,
            std::vector<ParseWarning>& warnings) {
  auto& slot = is_seq ? entries[id].seq : entries[id].str;
  if (slot) {
    std::string msg = std::string(is_seq ? "seq" : "str") + "{" + std::to_string(id) +
                      "} assigned more than once";
    if (mode == ParseMode::Strict) throw ParseError(msg);
    warnings.push_back({id, msg + "; keeping the first"});
    return;
  }
  slot = std::move(payload);
}

RawEntries scan_assignments(std::string_view text, ParseMode mode,
                            std::vector<ParseWarning>& warnings) {
  static const std::regex re(R"((seq|str)\s*\{\s*(\d+)\s*\}\s*=\s*'([^']*)')");
  RawEntries entries;
  std::string buf(text);
  for (auto it = std::sregex_iterator(buf.begin(), buf.end(), re); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    int id = std::stoi(m[2].str());
    assign(entries, id, m[1].str() == "seq", clean_payload(m[3].str()), mode, warnings);
  }
  return entries;
}

RawEntries scan_records(std::string_view text, ParseMode mode,
                        std::vector<ParseWarning>& warnings) {
  RawEntries entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<int> current;
  int filled = 0;
  while (std::getline(in, line)) {
    std::string trimmed = clean_payload(line);
    if (trimmed.empty()) continue;
    if (trimmed.front() == '>') {
      try {
        current = std::stoi(trimmed.substr(1));
      } catch (const std::exception&) {
        throw ParseError("bad record header '" + line + "'");
      }
      filled = 0;
      continue;
    }
    if (!current) throw ParseError("record payload before any '>id' header");
    if (filled >= 2) throw ParseError("record " + std::to_string(*current) + " has extra lines");
    assign(entries, *current, filled == 0, trimmed, mode, warnings);
    ++filled;
  }
  return entries;
}

// Index of the first character not in the alphabet, or npos.
std::size_t first_illegal(const std::string& s, const Alphabet& a) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!a.contains(s[i])) return i;
  return std::string::npos;
}

std::string drop_illegal(const std::string& s, const Alphabet& a) {
  std::string out;
  std::copy_if(s.begin(), s.end(), std::back_inserter(out), [&](char c) { return a.contains(c); });
  return out;
}

// Returns the validated pair, or nullopt when the pair is skipped.
std::optional<LabeledPair> validate(int id, RawEntry& raw, ParseMode mode,
                                    std::vector<ParseWarning>& warnings) {
  if (!raw.seq || !raw.str) {
    if (mode == ParseMode::Strict) throw MissingPartner(id);
    warnings.push_back({id, MissingPartner(id).what()});
    return std::nullopt;
  }
  LabeledPair p{id, std::move(*raw.seq), std::move(*raw.str)};
  const auto& res = residue_alphabet();
  const auto& ss = structure_alphabet();

  if (mode == ParseMode::Repair) {
    auto seq = drop_illegal(p.seq, res);
    auto str = drop_illegal(p.str, ss);
    if (seq.size() != p.seq.size())
      warnings.push_back({id, "dropped " + std::to_string(p.seq.size() - seq.size()) +
                                  " illegal residue character(s)"});
    if (str.size() != p.str.size())
      warnings.push_back({id, "dropped " + std::to_string(p.str.size() - str.size()) +
                                  " illegal structure character(s)"});
    if (seq.size() != str.size()) {
      auto n = std::min(seq.size(), str.size());
      warnings.push_back({id, "truncated to common length " + std::to_string(n) + " (seq " +
                                  std::to_string(seq.size()) + ", str " +
                                  std::to_string(str.size()) + ")"});
      seq.resize(n);
      str.resize(n);
    }
    if (seq.empty()) {
      warnings.push_back({id, "empty after repair; skipped"});
      return std::nullopt;
    }
    p.seq = std::move(seq);
    p.str = std::move(str);
    return p;
  }

  try {
    if (auto i = first_illegal(p.seq, res); i != std::string::npos)
      throw IllegalSymbol(id, p.seq[i], i + 1);
    if (auto i = first_illegal(p.str, ss); i != std::string::npos)
      throw IllegalSymbol(id, p.str[i], i + 1);
    if (p.seq.size() != p.str.size()) throw LengthMismatch(id, p.seq.size(), p.str.size());
    if (p.seq.empty()) throw ParseError("pair " + std::to_string(id) + " is empty");
  } catch (const ParseError& e) {
    if (mode == ParseMode::Strict) throw;
    warnings.push_back({id, std::string(e.what()) + "; skipped"});
    return std::nullopt;
  }
  return p;
}

}  // namespace

const LabeledPair* Corpus::find(int id) const {
  auto it = std::lower_bound(pairs.begin(), pairs.end(), id,
                             [](const LabeledPair& p, int v) { return p.id < v; });
  return (it != pairs.end() && it->id == id) ? &*it : nullptr;
}

ParseMode parse_mode_from_string(std::string_view s) {
  if (s == "strict") return ParseMode::Strict;
  if (s == "lenient") return ParseMode::Lenient;
  if (s == "repair") return ParseMode::Repair;
  throw ConfigError("unknown parse mode '" + std::string(s) + "'");
}

ParseResult parse_corpus(std::string_view text, ParseMode mode) {
  ParseResult result;
  auto first = text.find_first_not_of(" \t\r\n");
  bool records = first != std::string_view::npos && text[first] == '>';
  auto entries = records ? scan_records(text, mode, result.warnings)
                         : scan_assignments(text, mode, result.warnings);
  for (auto& [id, raw] : entries) {
    if (id < 1) throw ParseError("pair ids must be >= 1");
    if (auto p = validate(id, raw, mode, result.warnings)) result.corpus.pairs.push_back(*p);
  }
  return result;
}

ParseResult load_corpus(const std::string& path, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_corpus(ss.str(), mode);
}

std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.pairs) {
    out += "seq{" + std::to_string(p.id) + "}='" + p.seq + "'\n";
    out += "str{" + std::to_string(p.id) + "}='" + p.str + "'\n";
  }
  return out;
}

std::vector<FoldSpec> make_folds(std::size_t corpus_size, std::size_t n_folds) {
  if (n_folds < 2 || n_folds > corpus_size)
    throw InvalidFoldCount("fold count " + std::to_string(n_folds) + " invalid for " +
                           std::to_string(corpus_size) + " pairs (need 2 <= folds <= pairs)");
  const bool hundred_blocks = corpus_size >= 100 * n_folds;
  const std::size_t block = hundred_blocks ? 100 : corpus_size / n_folds;
  std::vector<FoldSpec> folds;
  for (std::size_t f = 0; f < n_folds; ++f) {
    std::size_t lo = f * block + 1;
    std::size_t hi = (f + 1 == n_folds && !hundred_blocks) ? corpus_size : (f + 1) * block;
    FoldSpec fold;
    for (std::size_t id = 1; id <= corpus_size; ++id)
      (id >= lo && id <= hi ? fold.test_ids : fold.train_ids).push_back(static_cast<int>(id));
    folds.push_back(std::move(fold));
  }
  return folds;
}

std::vector<FoldSpec> make_corpus_folds(const Corpus& corpus, std::size_t n_folds) {
  auto folds = make_folds(corpus.size(), n_folds);
  auto remap = [&](std::vector<int>& ids) {
    for (int& id : ids) id = corpus.pairs[static_cast<std::size_t>(id - 1)].id;
  };
  for (auto& f : folds) {
    remap(f.train_ids);
    remap(f.test_ids);
  }
  return folds;
}

std::string format_id_span(const std::vector<int>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size();) {
    std::size_t j = i;
    while (j + 1 < ids.size() && ids[j + 1] == ids[j] + 1) ++j;
    if (!out.empty()) out += ';';
    out += std::to_string(ids[i]);
    if (j > i) out += "-" + std::to_string(ids[j]);
    i = j + 1;
  }
  return out;
}

nlohmann::json corpus_summary(const Corpus& corpus) {
  const auto& ss = structure_alphabet();
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : corpus.pairs) {
    nlohmann::json counts = nlohmann::json::object();
    for (char c : ss.symbols()) counts[std::string(1, c)] = 0;
    for (char c : p.str) counts[std::string(1, c)] = counts[std::string(1, c)].get<int>() + 1;
    pairs.push_back({{"id", p.id}, {"length", p.seq.size()}, {"structure_counts", counts}});
  }
  return {{"n_pairs", corpus.size()}, {"pairs", pairs}};
}

}  // namespace seqhmm
