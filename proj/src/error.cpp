#include "phgm/error.hpp"

namespace phgm {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::parse: return "parse";
    case Errc::io: return "io";
    case Errc::non_finite: return "non_finite";
    case Errc::not_symmetric: return "not_symmetric";
    case Errc::isolated_vertex: return "isolated_vertex";
    case Errc::no_solution: return "no_solution";
    case Errc::mismatched_infinite_bars: return "mismatched_infinite_bars";
    case Errc::inconsistent_bar: return "inconsistent_bar";
    case Errc::non_positive_rate: return "non_positive_rate";
    case Errc::degenerate_bar: return "degenerate_bar";
    case Errc::zero_consensus: return "zero_consensus";
    case Errc::shape_mismatch: return "shape_mismatch";
    case Errc::infeasible_start: return "infeasible_start";
    case Errc::all_divergent: return "all_divergent";
    case Errc::zero_variance: return "zero_variance";
    case Errc::not_hierarchical: return "not_hierarchical";
    case Errc::bad_k: return "bad_k";
  }
  return "unknown";
}

}  // namespace phgm
