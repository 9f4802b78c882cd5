#pragma once

#include <stdexcept>
#include <string>

namespace proact {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivisionByZero : public Error {
 public:
  DivisionByZero() : Error("division by zero") {}
};

class GenerationExhausted : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Step requested on a finished episode.
class EpisodeDone : public Error {
 public:
  EpisodeDone() : Error("episode is done") {}
};

class NonFiniteRatio : public Error {
 public:
  using Error::Error;
};

class TooFewTexts : public Error {
 public:
  TooFewTexts() : Error("self-BLEU needs at least two texts") {}
};

class ZeroTrainScore : public Error {
 public:
  ZeroTrainScore() : Error("reward translation rate needs a positive training score") {}
};

class EmptySet : public Error {
 public:
  EmptySet() : Error("metric undefined on an empty trajectory set") {}
};

class InvalidGroup : public Error {
 public:
  using Error::Error;
};

}  // namespace proact
