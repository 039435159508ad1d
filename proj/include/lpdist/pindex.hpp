#pragma once

#include <stdexcept>
#include <string>

namespace lpdist {

// Exponent index for the l_p family. Values are either a finite real >= 1
// or the sup-norm limit. Finite arithmetic on the infinite index is a bug,
// so the raw value is only reachable through finite() after an is_inf check.
class PIndex {
 public:
  static PIndex finite_value(double p);
  static PIndex infinity();

  bool is_inf() const { return inf_; }

  // Finite exponent; throws std::logic_error when called on the sup-norm index.
  double finite() const;

  // "inf" or a shortest-roundtrip decimal, for messages and manifests.
  std::string to_string() const;

  bool operator==(const PIndex& o) const {
    return inf_ == o.inf_ && (inf_ || p_ == o.p_);
  }

 private:
  PIndex(double p, bool inf) : p_(p), inf_(inf) {}
  double p_ = 2.0;
  bool inf_ = false;
};

// Parses "inf"/"Inf"/"INF" or a decimal >= 1. Throws std::invalid_argument
// (with the offending text) otherwise.
PIndex parse_pindex(const std::string& text);

}  // namespace lpdist
