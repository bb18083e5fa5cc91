#pragma once

#include <stdexcept>
#include <string>

namespace rbench {

/// Base class for every error the harness raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class UnparseableUrl : public Error {
 public:
  using Error::Error;
};

class EmptyTsls : public Error {
 public:
  using Error::Error;
};

// Verdict parsing. Both are retryable inside the judger.
class MalformedVerdict : public Error {
 public:
  using Error::Error;
};

class DisallowedScore : public Error {
 public:
  using Error::Error;
};

// Backend transport failure for a single attempt.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Retry budget exhausted on transport failures.
class JudgerUnavailable : public Error {
 public:
  using Error::Error;
};

// Retry budget exhausted on malformed or disallowed replies.
class VerdictUnparseable : public Error {
 public:
  using Error::Error;
};

class EntryMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class MixedModels : public Error {
 public:
  using Error::Error;
};

class UnresolvedEntry : public Error {
 public:
  using Error::Error;
};

class FileUnreadable : public Error {
 public:
  using Error::Error;
};

class SchemaViolation : public Error {
 public:
  using Error::Error;
};

class DuplicateResponse : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace rbench
