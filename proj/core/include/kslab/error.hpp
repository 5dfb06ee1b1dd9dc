#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kslab {

enum class Errc {
  invalid_argument,
  grid_mismatch,
  grid_incompatible,
  unsupported_spec,
  unsupported_order,
  negative_density,
  negative_input,
  blowup_detected,
  out_of_domain,
  marginal_mismatch,
  mass_mismatch,
  history_gap,
  non_convergence,
  problem_too_large,
  insufficient_sweep,
  degenerate_sweep,
  coupling_degenerate,
  empty_series,
  unknown_key,
  type_error,
  compatibility_error,
  io_error,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace kslab
