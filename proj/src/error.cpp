#include "bel/error.hpp"

namespace bel {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_range: return "invalid-range";
    case ErrorKind::insufficient_nodes: return "insufficient-nodes";
    case ErrorKind::singular_radius: return "singular-radius";
    case ErrorKind::invalid_n: return "invalid-n";
    case ErrorKind::out_of_grid: return "out-of-grid";
    case ErrorKind::out_of_range: return "out-of-range";
    case ErrorKind::invalid_manifold: return "invalid-manifold";
    case ErrorKind::warping_not_concave: return "warping-not-concave";
    case ErrorKind::nonpositive_ell: return "nonpositive-ell";
    case ErrorKind::invalid_exponent: return "invalid-exponent";
    case ErrorKind::blowup_detected: return "blowup-detected";
    case ErrorKind::wrong_dimension: return "wrong-dimension";
    case ErrorKind::monotonicity_violated: return "monotonicity-violated";
    case ErrorKind::invalid_alpha: return "invalid-alpha";
    case ErrorKind::invalid_dimension: return "invalid-dimension";
    case ErrorKind::nonpositive_u: return "nonpositive-u";
    case ErrorKind::invalid_branch: return "invalid-branch";
    case ErrorKind::q_out_of_range: return "q-out-of-range";
    case ErrorKind::superharmonicity_violated: return "superharmonicity-violated";
    case ErrorKind::config_parse_error: return "config-parse-error";
    case ErrorKind::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace bel
