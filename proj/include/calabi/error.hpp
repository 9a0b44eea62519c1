#ifndef CALABI_ERROR_HPP
#define CALABI_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace calabi {

enum class ErrorCode {
  invalid_params,
  experimental_dimension,
  invalid_handoff,
  incomplete_profile,
  internal_consistency,
  out_of_range,
  use_series_residual,
  insufficient_tail,
  invalid_scale,
  outside_computed_domain,
  stencil_out_of_domain,
  degenerate_plane,
  image_beyond_profile,
  numerical_failure,
  invalid_step,
  parse_error,
  format_error,
  io_error,
};

/// Process-level failure classes; the CLI maps them onto its exit codes.
enum class ErrorClass { validation = 1, numerical = 2, io = 3 };

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_params: return "invalid_params";
    case ErrorCode::experimental_dimension: return "experimental_dimension";
    case ErrorCode::invalid_handoff: return "invalid_handoff";
    case ErrorCode::incomplete_profile: return "incomplete_profile";
    case ErrorCode::internal_consistency: return "internal_consistency";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::use_series_residual: return "use_series_residual";
    case ErrorCode::insufficient_tail: return "insufficient_tail";
    case ErrorCode::invalid_scale: return "invalid_scale";
    case ErrorCode::outside_computed_domain: return "outside_computed_domain";
    case ErrorCode::stencil_out_of_domain: return "stencil_out_of_domain";
    case ErrorCode::degenerate_plane: return "degenerate_plane";
    case ErrorCode::image_beyond_profile: return "image_beyond_profile";
    case ErrorCode::numerical_failure: return "numerical_failure";
    case ErrorCode::invalid_step: return "invalid_step";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::format_error: return "format_error";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

constexpr ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::incomplete_profile:
    case ErrorCode::internal_consistency:
    case ErrorCode::insufficient_tail:
    case ErrorCode::degenerate_plane:
    case ErrorCode::numerical_failure:
      return ErrorClass::numerical;
    case ErrorCode::io_error:
      return ErrorClass::io;
    default:
      return ErrorClass::validation;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorClass error_class() const noexcept { return classify(code_); }

 private:
  ErrorCode code_;
};

}  // namespace calabi

#endif  // CALABI_ERROR_HPP
