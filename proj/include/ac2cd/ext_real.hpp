#pragma once

#include <cassert>
#include <cmath>
#include <limits>

namespace ac2cd {

// Extended real with explicit infinity tags. Bound gaps and stepsize caps mix
// finite and infinite quantities; keeping the tag out of float arithmetic
// avoids inf-inf and 0*inf pitfalls.
class ExtReal {
 public:
  constexpr ExtReal() : v_(0.0), tag_(Tag::Finite) {}
  constexpr ExtReal(double v) : v_(v), tag_(Tag::Finite) {}  // NOLINT: implicit by design

  static constexpr ExtReal pos_inf() { return ExtReal(Tag::PosInf); }
  static constexpr ExtReal neg_inf() { return ExtReal(Tag::NegInf); }

  constexpr bool finite() const { return tag_ == Tag::Finite; }
  constexpr bool is_pos_inf() const { return tag_ == Tag::PosInf; }
  constexpr bool is_neg_inf() const { return tag_ == Tag::NegInf; }

  // Finite payload; must not be called on an infinite value.
  constexpr double value() const {
    assert(finite());
    return v_;
  }

  // Lossy view for printing and interop.
  constexpr double as_double() const {
    if (is_pos_inf()) return std::numeric_limits<double>::infinity();
    if (is_neg_inf()) return -std::numeric_limits<double>::infinity();
    return v_;
  }

  static constexpr ExtReal from_double(double v) {
    if (std::isinf(v)) return v > 0 ? pos_inf() : neg_inf();
    return ExtReal(v);
  }

  // Scale by a finite positive factor.
  constexpr ExtReal scaled(double positive) const {
    assert(positive > 0.0 && std::isfinite(positive));
    return finite() ? ExtReal(v_ * positive) : *this;
  }

  // min{*this, cap} for a finite cap; collapses to a plain double.
  constexpr double min_with(double cap) const {
    if (is_pos_inf()) return cap;
    if (is_neg_inf()) return -std::numeric_limits<double>::infinity();
    return v_ < cap ? v_ : cap;
  }

  friend constexpr bool operator==(ExtReal a, ExtReal b) {
    if (a.tag_ != b.tag_) return false;
    return a.tag_ != Tag::Finite || a.v_ == b.v_;
  }
  friend constexpr bool operator<(ExtReal a, ExtReal b) {
    if (a.is_neg_inf()) return !b.is_neg_inf();
    if (a.is_pos_inf()) return false;
    if (b.is_pos_inf()) return true;
    if (b.is_neg_inf()) return false;
    return a.v_ < b.v_;
  }
  friend constexpr bool operator<=(ExtReal a, ExtReal b) { return a < b || a == b; }
  friend constexpr bool operator>(ExtReal a, ExtReal b) { return b < a; }
  friend constexpr bool operator>=(ExtReal a, ExtReal b) { return b <= a; }

  friend constexpr ExtReal min(ExtReal a, ExtReal b) { return a < b ? a : b; }
  friend constexpr ExtReal max(ExtReal a, ExtReal b) { return a < b ? b : a; }

  // upper - z and z - lower, the two bound-gap shapes.
  friend constexpr ExtReal gap_above(ExtReal upper, double z) {
    return upper.finite() ? ExtReal(upper.v_ - z) : upper;
  }
  friend constexpr ExtReal gap_below(double z, ExtReal lower) {
    if (lower.finite()) return ExtReal(z - lower.v_);
    return lower.is_neg_inf() ? pos_inf() : neg_inf();
  }

 private:
  enum class Tag { Finite, NegInf, PosInf };
  constexpr explicit ExtReal(Tag t) : v_(0.0), tag_(t) {}

  double v_;
  Tag tag_;
};

}  // namespace ac2cd
