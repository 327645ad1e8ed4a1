#pragma once

#include <stdexcept>
#include <string>

namespace fracperim {

enum class ErrorKind {
  invalid_argument,
  unsupported_shape,
  misaligned_domain,
  padding_too_small,
  overlap,
  zero_offset,
  non_convergence,
  budget_exceeded,
  straddling_set,
  asymmetric_grid,
  not_grid_aligned,
  out_of_range,
  config,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fracperim
