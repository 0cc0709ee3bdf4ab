#include "medcot/error.hpp"

namespace medcot {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::InvalidAnswerLabel: return "InvalidAnswerLabel";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::ChunkCountExceedsRecords: return "ChunkCountExceedsRecords";
    case ErrorCode::MissingCaption: return "MissingCaption";
    case ErrorCode::AnnotationMismatch: return "AnnotationMismatch";
    case ErrorCode::EmptyQuestion: return "EmptyQuestion";
    case ErrorCode::Transport: return "Transport";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::CandidateCountMismatch: return "CandidateCountMismatch";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::NonFiniteLogit: return "NonFiniteLogit";
    case ErrorCode::CapabilityError: return "CapabilityError";
    case ErrorCode::ImageUnavailable: return "ImageUnavailable";
    case ErrorCode::TestSplitLeak: return "TestSplitLeak";
    case ErrorCode::AnswerMismatch: return "AnswerMismatch";
    case ErrorCode::NoAnnotations: return "NoAnnotations";
    case ErrorCode::MissingAnnotationsAboveThreshold: return "MissingAnnotationsAboveThreshold";
    case ErrorCode::EmptyResults: return "EmptyResults";
    case ErrorCode::MissingAssignment: return "MissingAssignment";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace medcot
