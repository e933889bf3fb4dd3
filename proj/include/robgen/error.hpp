#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace robgen {

enum class ErrorKind {
  // syntax-metrics
  EmptySource,
  NoMethodFound,
  EmptyCorpus,
  // pattern-analysis
  ScopeTableMissing,
  // decode-engine
  EmptyVocabulary,
  NoIfToken,
  ProviderError,
  CheckerError,
  EmptyObservations,
  InvalidRank,
  InvalidObservation,
  // checker
  MalformedPrefix,
  Timeout,
  MalformedResponse,
  InsufficientPositives,
  InsufficientNegatives,
  // judge
  TemplateMissing,
  UnparseableScore,
  TransportError,
  LengthMismatch,
  // stats
  DegenerateTable,
  InvalidDims,
  DegenerateAgreement,
  // shared
  EmptyInput,
  InvalidArgument,
  Io,
  Format,
  // bench-harness
  Untrimmable,
  MismatchedTaskSets,
  InconsistentInputs,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Domain error carrying a machine-checkable kind. Everything the library
/// throws on purpose is one of these; the CLI maps them to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace robgen
