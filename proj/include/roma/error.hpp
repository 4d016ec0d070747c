#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace roma {

enum class ErrorKind {
  kValidation,
  kContract,
  kSequencing,
  kAuthorization,
  kForbidden,
  kConflict,
  kImmutable,
  kCompleteness,
  kIncomplete,
  kParse,
  kIntegrity,
  kScheduling,
  kPrecondition,
  kNotFound,
  kBackend,
  kCorrupt,
  kConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kContract: return "contract";
    case ErrorKind::kSequencing: return "sequencing";
    case ErrorKind::kAuthorization: return "authorization";
    case ErrorKind::kForbidden: return "forbidden";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kImmutable: return "immutable";
    case ErrorKind::kCompleteness: return "completeness";
    case ErrorKind::kIncomplete: return "incomplete";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kIntegrity: return "integrity";
    case ErrorKind::kScheduling: return "scheduling";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kNotFound: return "not_found";
    case ErrorKind::kBackend: return "backend";
    case ErrorKind::kCorrupt: return "corrupt";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and the
/// HTTP layer) can react without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed encoding; offset is the byte position where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset)
      : Error(ErrorKind::kParse,
              message + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// A chunked payload set is missing a part.
class IncompleteError : public Error {
 public:
  IncompleteError(int part, int of)
      : Error(ErrorKind::kIncomplete, "missing chunk " + std::to_string(part) +
                                          " of " + std::to_string(of)),
        part_(part),
        of_(of) {}

  int part() const noexcept { return part_; }
  int of() const noexcept { return of_; }

 private:
  int part_;
  int of_;
};

/// Ledger verification failed; index is the first entry that does not check out.
class CorruptLedgerError : public Error {
 public:
  explicit CorruptLedgerError(std::size_t first_bad_index)
      : Error(ErrorKind::kCorrupt, "ledger verification failed at entry " +
                                       std::to_string(first_bad_index)),
        first_bad_index_(first_bad_index) {}

  std::size_t first_bad_index() const noexcept { return first_bad_index_; }

 private:
  std::size_t first_bad_index_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace roma
