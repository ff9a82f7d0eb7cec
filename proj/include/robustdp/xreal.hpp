#ifndef ROBUSTDP_XREAL_HPP
#define ROBUSTDP_XREAL_HPP

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <string>

namespace robustdp {

/// Extended real in R u {-inf}. +inf and NaN are not representable.
///
/// NEG_INF absorbs under addition and under multiplication by a positive
/// scalar; ordering is the usual one with NEG_INF below every finite value.
class XReal {
 public:
  constexpr XReal() noexcept = default;

  XReal(double v) : v_(v) {  // NOLINT(google-explicit-constructor)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw std::domain_error("XReal: +inf and NaN are not representable");
  }

  static constexpr XReal neg_inf() noexcept { return XReal(Raw{}, -std::numeric_limits<double>::infinity()); }

  bool is_neg_inf() const noexcept { return std::isinf(v_); }
  bool is_finite() const noexcept { return !std::isinf(v_); }

  // -inf for NEG_INF
  constexpr double value() const noexcept { return v_; }

  friend constexpr bool operator==(XReal a, XReal b) noexcept { return a.v_ == b.v_; }
  friend constexpr std::partial_ordering operator<=>(XReal a, XReal b) noexcept { return a.v_ <=> b.v_; }

  friend XReal operator+(XReal a, XReal b) noexcept { return XReal(Raw{}, a.v_ + b.v_); }
  XReal& operator+=(XReal o) noexcept {
    v_ += o.v_;
    return *this;
  }

  // positive scaling; 0 * NEG_INF is taken to be 0 (null weight)
  friend XReal operator*(double lambda, XReal a) {
    if (!(lambda >= 0.0) || std::isinf(lambda)) throw std::domain_error("XReal: scale must be finite and >= 0");
    if (lambda == 0.0) return XReal();
    return XReal(Raw{}, lambda * a.v_);
  }

 private:
  struct Raw {};
  constexpr XReal(Raw, double v) noexcept : v_(v) {}

  double v_ = 0.0;
};

inline constexpr XReal NEG_INF = XReal::neg_inf();

inline XReal xmax(XReal a, XReal b) noexcept { return a < b ? b : a; }
inline XReal xmin(XReal a, XReal b) noexcept { return b < a ? b : a; }

// |a - b| <= tol, with NEG_INF equal only to itself
inline bool near(XReal a, XReal b, double tol) noexcept {
  if (a.is_neg_inf() || b.is_neg_inf()) return a.is_neg_inf() && b.is_neg_inf();
  return std::fabs(a.value() - b.value()) <= tol;
}

std::string to_string(XReal x);

}  // namespace robustdp

#endif
