#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seqhmm {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SymbolNotInAlphabet : public Error {
 public:
  SymbolNotInAlphabet(char symbol, std::size_t position)
      : Error("symbol '" + std::string(1, symbol) + "' at position " + std::to_string(position) +
              " is not in the alphabet"),
        symbol_(symbol),
        position_(position) {}
  char symbol() const { return symbol_; }
  std::size_t position() const { return position_; }

 private:
  char symbol_;
  std::size_t position_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class MissingPartner : public ParseError {
 public:
  explicit MissingPartner(int id)
      : ParseError("pair " + std::to_string(id) + " has only one of seq/str"), id_(id) {}
  int id() const { return id_; }

 private:
  int id_;
};

class LengthMismatch : public ParseError {
 public:
  LengthMismatch(int id, std::size_t seq_len, std::size_t str_len)
      : ParseError("pair " + std::to_string(id) + ": seq length " + std::to_string(seq_len) +
                   " != str length " + std::to_string(str_len)),
        id_(id) {}
  int id() const { return id_; }

 private:
  int id_;
};

// Position is 1-based, matching how sequence positions are usually quoted.
class IllegalSymbol : public ParseError {
 public:
  IllegalSymbol(int id, char symbol, std::size_t position)
      : ParseError("pair " + std::to_string(id) + ": illegal symbol '" + std::string(1, symbol) +
                   "' at position " + std::to_string(position)),
        id_(id),
        symbol_(symbol),
        position_(position) {}
  int id() const { return id_; }
  char symbol() const { return symbol_; }
  std::size_t position() const { return position_; }

 private:
  int id_;
  char symbol_;
  std::size_t position_;
};

class InvalidFoldCount : public Error {
 public:
  using Error::Error;
};

class InvalidModel : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityObservation : public Error {
 public:
  explicit ZeroProbabilityObservation(std::size_t t)
      : Error("observation sequence has zero probability at t=" + std::to_string(t)), t_(t) {}
  std::size_t time() const { return t_; }

 private:
  std::size_t t_;
};

class AllPathsZero : public Error {
 public:
  AllPathsZero() : Error("every hidden path has zero probability") {}
};

class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

class EmptyTrainingSet : public Error {
 public:
  EmptyTrainingSet() : Error("training set is empty") {}
};

class ZeroSequenceProbability : public Error {
 public:
  ZeroSequenceProbability() : Error("sequence has zero probability under the profile") {}
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqhmm
