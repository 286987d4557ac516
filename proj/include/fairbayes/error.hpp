#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairbayes {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedRow : public Error {
 public:
  MalformedRow(std::size_t line, const std::string& why)
      : Error("line " + std::to_string(line) + ": " + why), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnknownGroupLabel : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class NTooLarge : public Error {
 public:
  using Error::Error;
};

class InvalidPrior : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

class NonFiniteDensity : public Error {
 public:
  using Error::Error;
};

class DivergedChain : public Error {
 public:
  using Error::Error;
};

class TooFewChains : public Error {
 public:
  using Error::Error;
};

class EmptyGroup : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

}  // namespace fairbayes
