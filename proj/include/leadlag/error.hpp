#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace leadlag {

enum class ErrorCode {
  kInvalidParameter,
  kInvalidWindow,
  kDimension,
  kDomain,
  kUnsupportedModel,
  kUndefinedStatistic,
  kUndefinedCorrelation,
  kDegenerateGraph,
  kInvalidInput,
  kInvalidMatrix,
  kDegeneratePnl,
  kUndefinedMetric,
  kNumericDomain,
  kParse,
  kDuplicateKey,
  kNonMonotone,
  kMissingSeries,
  kEmptyPanel,
  kUnfillable,
  kIo,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported as Error; code() identifies the violated contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace leadlag
