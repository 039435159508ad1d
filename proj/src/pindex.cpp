#include "lpdist/pindex.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace lpdist {

PIndex PIndex::finite_value(double p) {
  if (!std::isfinite(p) || p < 1.0) {
    throw std::invalid_argument("PIndex: finite exponent must satisfy 1 <= p < inf, got " +
                                std::to_string(p));
  }
  return PIndex(p, false);
}

PIndex PIndex::infinity() { return PIndex(0.0, true); }

double PIndex::finite() const {
  if (inf_) throw std::logic_error("PIndex: finite() called on the sup-norm index");
  return p_;
}

std::string PIndex::to_string() const {
  if (inf_) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", p_);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, p_);
    if (std::strtod(shorter, nullptr) == p_) return shorter;
  }
  return buf;
}

PIndex parse_pindex(const std::string& text) {
  std::string lower;
  for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "inf" || lower == "infinity") return PIndex::infinity();
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw std::invalid_argument("PIndex: cannot parse '" + text + "' (expected a real >= 1 or 'inf')");
  }
  if (std::isinf(v) && v > 0) return PIndex::infinity();
  return PIndex::finite_value(v);
}

}  // namespace lpdist
