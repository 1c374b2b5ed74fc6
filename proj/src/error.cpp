#include "ohmgrad/error.hpp"

namespace ohmgrad {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_graph: return "invalid-graph";
    case Errc::disconnected_graph: return "disconnected-graph";
    case Errc::index_out_of_range: return "index-out-of-range";
    case Errc::duplicate_index: return "duplicate-index";
    case Errc::selector_overlap: return "selector-overlap";
    case Errc::selector_mismatch: return "selector-mismatch";
    case Errc::nonpositive_resistance: return "nonpositive-resistance";
    case Errc::resistance_out_of_bounds: return "resistance-out-of-bounds";
    case Errc::numerical: return "numerical";
    case Errc::invariant_violation: return "invariant-violation";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::non_finite: return "non-finite";
    case Errc::zero_nudge: return "zero-nudge";
    case Errc::wrong_output_count: return "wrong-output-count";
    case Errc::not_psd: return "not-psd";
    case Errc::non_convergence: return "non-convergence";
    case Errc::instability: return "instability";
    case Errc::degenerate_fit: return "degenerate-fit";
    case Errc::sparse_deposition: return "sparse-deposition";
    case Errc::insufficient_chords: return "insufficient-chords";
    case Errc::parse_error: return "parse-error";
    case Errc::schema_error: return "schema-error";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::divergence: return "divergence";
    case Errc::degenerate_directions: return "degenerate-directions";
    case Errc::config_error: return "config-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace ohmgrad
