#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace medcot {

enum class ErrorCode {
  // dataset
  MissingField,
  InvalidAnswerLabel,
  DuplicateId,
  ParseError,
  EmptySplit,
  ChunkCountExceedsRecords,
  // prompting
  MissingCaption,
  AnnotationMismatch,
  // taxonomy
  EmptyQuestion,
  // scoring
  Transport,
  MalformedResponse,
  CandidateCountMismatch,
  Timeout,
  NonFiniteLogit,
  CapabilityError,
  ImageUnavailable,
  // teacher
  TestSplitLeak,
  AnswerMismatch,
  NoAnnotations,
  // sft
  MissingAnnotationsAboveThreshold,
  // analytics
  EmptyResults,
  MissingAssignment,
  // config / io
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a machine-readable code so
/// callers can route per-record errors into failure lists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Transport failures additionally carry the HTTP status (0 when the
/// connection itself failed).
class TransportError : public Error {
 public:
  TransportError(int status, const std::string& message)
      : Error(ErrorCode::Transport, message), status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace medcot
