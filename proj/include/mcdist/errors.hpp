#pragma once

#include <stdexcept>
#include <string>

namespace mcdist {

// Base for all domain errors. error_class() is the stable machine-readable
// tag the CLI prints on its error stream.
class Error : public std::runtime_error {
public:
  Error(std::string cls, const std::string& msg)
      : std::runtime_error(msg), cls_(std::move(cls)) {}
  const std::string& error_class() const noexcept { return cls_; }

private:
  std::string cls_;
};

#define MCDIST_DEFINE_ERROR(Name)                          \
  class Name : public Error {                              \
  public:                                                  \
    explicit Name(const std::string& msg)                  \
        : Error(#Name, msg) {}                             \
  }

MCDIST_DEFINE_ERROR(DomainError);
MCDIST_DEFINE_ERROR(ConfigError);
MCDIST_DEFINE_ERROR(DimensionMismatch);

// feature extraction
MCDIST_DEFINE_ERROR(NoDetection);
MCDIST_DEFINE_ERROR(NoPeak);
MCDIST_DEFINE_ERROR(DegenerateEdge);

// least squares / estimators
MCDIST_DEFINE_ERROR(SingularNormalMatrix);
MCDIST_DEFINE_ERROR(NonFiniteResidual);
MCDIST_DEFINE_ERROR(NonFiniteLoss);
MCDIST_DEFINE_ERROR(RankDeficient);
MCDIST_DEFINE_ERROR(DegenerateRates);
MCDIST_DEFINE_ERROR(UnknownEmissionTime);

// dataset / evaluation
MCDIST_DEFINE_ERROR(MissingLabel);
MCDIST_DEFINE_ERROR(NonUniformSampling);
MCDIST_DEFINE_ERROR(InsufficientData);

#undef MCDIST_DEFINE_ERROR

// Parse failures carry the offending line number.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, long line)
      : Error("ParseError", msg + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  long line() const noexcept { return line_; }

private:
  long line_;
};

}  // namespace mcdist
