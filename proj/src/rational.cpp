#include "shiftsum/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "shiftsum/errors.hpp"

namespace shiftsum {

namespace {

using wide = __int128;

std::int64_t narrow(wide v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::NumericalFailure, "rational overflow");
  }
  return static_cast<std::int64_t>(v);
}

Rational make(wide num, wide den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  wide a = num < 0 ? -num : num, b = den;
  while (b != 0) {
    const wide r = a % b;
    a = b;
    b = r;
  }
  if (a > 1) {
    num /= a;
    den /= a;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "rational with zero denominator");
  const std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
}

Rational Rational::parse(std::string_view text) {
  const std::string s(text);
  if (s.empty()) throw Error(ErrorCode::InvalidArgument, "empty rational");
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    const Rational a = parse(s.substr(0, slash));
    const Rational b = parse(s.substr(slash + 1));
    return a / b;
  }
  // Decimal with optional exponent, converted exactly.
  std::size_t pos = 0;
  bool neg = false;
  if (s[pos] == '+' || s[pos] == '-') neg = s[pos++] == '-';
  wide num = 0;
  wide den = 1;
  bool digits = false;
  bool frac = false;
  for (; pos < s.size(); ++pos) {
    const char ch = s[pos];
    if (ch >= '0' && ch <= '9') {
      num = num * 10 + (ch - '0');
      if (frac) den *= 10;
      digits = true;
      narrow(num);
      narrow(den);
    } else if (ch == '.' && !frac) {
      frac = true;
    } else {
      break;
    }
  }
  if (!digits) throw Error(ErrorCode::InvalidArgument, "not a number: '" + s + "'");
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') throw Error(ErrorCode::InvalidArgument, "not a number: '" + s + "'");
    int e = 0;
    try {
      std::size_t used = 0;
      e = std::stoi(s.substr(pos + 1), &used);
      if (pos + 1 + used != s.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad exponent in '" + s + "'");
    }
    for (; e > 0; --e) num = narrow(num * 10);
    for (; e < 0; ++e) den = narrow(den * 10);
  }
  return make(neg ? -num : num, den);
}

Rational Rational::from_double(double x, std::int64_t max_den) {
  if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite value has no rational form");
  // Continued-fraction convergents h/k.
  std::int64_t h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(v);
    if (std::abs(a) > 9e15) break;
    const auto ai = static_cast<std::int64_t>(a);
    const wide h2 = static_cast<wide>(ai) * h1 + h0;
    const wide k2 = static_cast<wide>(ai) * k1 + k0;
    if (k2 > max_den || h2 > std::numeric_limits<std::int64_t>::max() ||
        h2 < std::numeric_limits<std::int64_t>::min()) {
      break;
    }
    h0 = h1;
    h1 = static_cast<std::int64_t>(h2);
    k0 = k1;
    k1 = static_cast<std::int64_t>(k2);
    const double rem = v - a;
    if (rem < 1e-15) break;
    v = 1.0 / rem;
  }
  if (k1 == 0) throw Error(ErrorCode::NumericalFailure, "cannot approximate value as a rational");
  return Rational(h1, k1);
}

std::string Rational::to_string() const {
  return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(Rational a, Rational b) {
  return make(static_cast<wide>(a.num_) * b.den_ + static_cast<wide>(b.num_) * a.den_,
              static_cast<wide>(a.den_) * b.den_);
}

Rational operator-(Rational a, Rational b) { return a + (-b); }

Rational operator*(Rational a, Rational b) {
  return make(static_cast<wide>(a.num_) * b.num_, static_cast<wide>(a.den_) * b.den_);
}

Rational operator/(Rational a, Rational b) {
  if (b.num_ == 0) throw Error(ErrorCode::InvalidArgument, "rational division by zero");
  return make(static_cast<wide>(a.num_) * b.den_, static_cast<wide>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  const wide l = static_cast<wide>(a.num_) * b.den_;
  const wide r = static_cast<wide>(b.num_) * a.den_;
  return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
}

}  // namespace shiftsum
