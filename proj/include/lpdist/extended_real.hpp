#pragma once

#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace lpdist {

// A rate-function value: a finite real or +infinity, as an explicit sum
// type so +inf never enters float arithmetic as a sentinel.
class ExtendedReal {
 public:
  static ExtendedReal finite_value(double v) { return ExtendedReal(v, false); }
  static ExtendedReal infinity() { return ExtendedReal(0.0, true); }

  bool is_inf() const { return inf_; }

  double finite() const {
    if (inf_) throw std::logic_error("ExtendedReal: finite() called on +inf");
    return v_;
  }

  // "inf" or the value with full round-trip precision.
  std::string to_string() const {
    if (inf_) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v_);
    return buf;
  }

  bool operator==(const ExtendedReal& o) const {
    return inf_ == o.inf_ && (inf_ || v_ == o.v_);
  }

 private:
  ExtendedReal(double v, bool inf) : v_(v), inf_(inf) {}
  double v_;
  bool inf_;
};

}  // namespace lpdist
