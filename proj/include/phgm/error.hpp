#pragma once

#include <stdexcept>
#include <string>

namespace phgm {

// Every failure the library can report. The C API maps these 1:1 onto
// phgm_status values, so keep the order in sync with phgm.h.
enum class Errc {
  invalid_argument = 1,
  parse,
  io,
  non_finite,
  not_symmetric,
  isolated_vertex,
  no_solution,
  mismatched_infinite_bars,
  inconsistent_bar,
  non_positive_rate,
  degenerate_bar,
  zero_consensus,
  shape_mismatch,
  infeasible_start,
  all_divergent,
  zero_variance,
  not_hierarchical,
  bad_k,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace phgm
