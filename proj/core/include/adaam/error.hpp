#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adaam {

enum class ErrorCode {
  NonSymmetric,
  NonFinite,
  ShapeMismatch,
  NotPsd,
  RankRequestTooLarge,
  RankDeficient,
  KTooLarge,
  DegenerateData,
  ClusterCountTooLarge,
  LengthMismatch,
  RaggedRows,
  NonNumericCell,
  EmptyFile,
  BadMagic,
  TruncatedFile,
  InvalidParams,
  BadModel,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// All library failures are reported through this exception type; `code()`
/// identifies the failure class so callers can map it to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adaam
