#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace shiftsum {

/// Exact rational with 64-bit parts, always normalized (gcd 1, den > 0).
/// Used for DMT line coefficients and threshold exponents, which are small
/// fractions. Overflow throws NumericalFailure.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);  // NOLINT(google-explicit-constructor)

  /// "8", "-5/2", "0.25", "1e-3".
  static Rational parse(std::string_view text);
  /// Best approximation with denominator <= max_den (continued fractions).
  static Rational from_double(double x, std::int64_t max_den = 1'000'000);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  friend Rational operator+(Rational a, Rational b);
  friend Rational operator-(Rational a, Rational b);
  friend Rational operator*(Rational a, Rational b);
  friend Rational operator/(Rational a, Rational b);
  Rational operator-() const { return Rational(-num_, den_); }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline Rational max(Rational a, Rational b) { return a < b ? b : a; }

}  // namespace shiftsum
