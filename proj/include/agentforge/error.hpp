#pragma once

#include <stdexcept>
#include <string>

namespace agentforge {

// Root of the error taxonomy. Every failure surfaced to callers derives
// from this so batch drivers can catch one type at the seed boundary.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// backend
class InvalidRequest : public Error {
 public:
  using Error::Error;
};
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};
class FixtureMissing : public Error {
 public:
  using Error::Error;
};

// corpus
class UnreadablePath : public Error {
 public:
  using Error::Error;
};
class EmptyCorpus : public Error {
 public:
  using Error::Error;
};
class InsufficientCorpus : public Error {
 public:
  using Error::Error;
};

// flow
class EmptyTransformation : public Error {
 public:
  using Error::Error;
};
class NoInstructionsProduced : public Error {
 public:
  using Error::Error;
};
class EditorParseFailure : public Error {
 public:
  using Error::Error;
};
class IncompatibleRouting : public Error {
 public:
  using Error::Error;
};

// tool use
class ApiParseFailure : public Error {
 public:
  using Error::Error;
};
class LibraryTooSmall : public Error {
 public:
  using Error::Error;
};
class InfeasibleTaskType : public Error {
 public:
  using Error::Error;
};
class ActionParseFailure : public Error {
 public:
  using Error::Error;
};
class TurnCapExceeded : public Error {
 public:
  using Error::Error;
};
class TerminalMismatch : public Error {
 public:
  using Error::Error;
};

// dataset
class EmptyResponse : public Error {
 public:
  using Error::Error;
};
class InsufficientSource : public Error {
 public:
  using Error::Error;
};
class UnknownRecordId : public Error {
 public:
  using Error::Error;
};

// evaluation
class JudgeParseFailure : public Error {
 public:
  using Error::Error;
};
class MissingEmotion : public Error {
 public:
  using Error::Error;
};
class InconsistentVerdict : public Error {
 public:
  using Error::Error;
};
class OutOfRangeRating : public Error {
 public:
  using Error::Error;
};

}  // namespace agentforge
