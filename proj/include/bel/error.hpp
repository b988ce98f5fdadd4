#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bel {

enum class ErrorKind {
  invalid_range,
  insufficient_nodes,
  singular_radius,
  invalid_n,
  out_of_grid,
  out_of_range,
  invalid_manifold,
  warping_not_concave,
  nonpositive_ell,
  invalid_exponent,
  blowup_detected,
  wrong_dimension,
  monotonicity_violated,
  invalid_alpha,
  invalid_dimension,
  nonpositive_u,
  invalid_branch,
  q_out_of_range,
  superharmonicity_violated,
  config_parse_error,
  io_error,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bel
