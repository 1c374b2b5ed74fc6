#pragma once

#include <stdexcept>
#include <string>

namespace ohmgrad {

// Every failure surfaced by the library carries one of these codes so callers
// (tests, the CLI exit-code map) can tell failure modes apart without parsing
// messages.
enum class Errc {
  invalid_graph,
  disconnected_graph,
  index_out_of_range,
  duplicate_index,
  selector_overlap,
  selector_mismatch,
  nonpositive_resistance,
  resistance_out_of_bounds,
  numerical,
  invariant_violation,
  dimension_mismatch,
  non_finite,
  zero_nudge,
  wrong_output_count,
  not_psd,
  non_convergence,
  instability,
  degenerate_fit,
  sparse_deposition,
  insufficient_chords,
  parse_error,
  schema_error,
  invalid_argument,
  divergence,
  degenerate_directions,
  config_error,
  io_error,
};

const char* to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace ohmgrad
