#include "robgen/error.hpp"

namespace robgen {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptySource: return "EmptySource";
    case ErrorKind::NoMethodFound: return "NoMethodFound";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::ScopeTableMissing: return "ScopeTableMissing";
    case ErrorKind::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorKind::NoIfToken: return "NoIfToken";
    case ErrorKind::ProviderError: return "ProviderError";
    case ErrorKind::CheckerError: return "CheckerError";
    case ErrorKind::EmptyObservations: return "EmptyObservations";
    case ErrorKind::InvalidRank: return "InvalidRank";
    case ErrorKind::InvalidObservation: return "InvalidObservation";
    case ErrorKind::MalformedPrefix: return "MalformedPrefix";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::MalformedResponse: return "MalformedResponse";
    case ErrorKind::InsufficientPositives: return "InsufficientPositives";
    case ErrorKind::InsufficientNegatives: return "InsufficientNegatives";
    case ErrorKind::TemplateMissing: return "TemplateMissing";
    case ErrorKind::UnparseableScore: return "UnparseableScore";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::InvalidDims: return "InvalidDims";
    case ErrorKind::DegenerateAgreement: return "DegenerateAgreement";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Untrimmable: return "Untrimmable";
    case ErrorKind::MismatchedTaskSets: return "MismatchedTaskSets";
    case ErrorKind::InconsistentInputs: return "InconsistentInputs";
  }
  return "Unknown";
}

}  // namespace robgen
