#pragma once

#include <stdexcept>
#include <string>

namespace hact {

/// Failure categories surfaced by the library. Callers that need to react
/// to a specific condition switch on code(); everything else just reads what().
enum class Errc {
  invalid_argument,
  shape_mismatch,
  no_tissue,          // image has no foreground pixels
  degenerate_stain,   // optical-density cloud does not span two stains
  no_nuclei,
  out_of_bounds,
  parse_error,
  degenerate_delta,   // every training node is isolated
  non_finite,
  io_error,
  split_overlap,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace hact
