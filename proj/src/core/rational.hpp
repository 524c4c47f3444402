#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace treebandit {

/// Exact rational number with 128-bit numerator and denominator.
///
/// Every operation is overflow-checked and throws std::overflow_error rather
/// than silently wrapping. The representation is canonical (den > 0,
/// gcd(|num|, den) = 1), so equal values compare equal bit-for-bit and hash
/// identically.
class Rational {
 public:
  using Int = __int128;

  constexpr Rational() = default;
  constexpr Rational(long long v) : num_(v), den_(1) {}  // NOLINT(implicit)
  Rational(Int num, Int den);

  /// Exact conversion of a finite double (every double is a dyadic rational).
  static Rational from_double(double x);
  /// Parses "num" or "num/den".
  static Rational parse(const std::string& text);

  Int num() const { return num_; }
  Int den() const { return den_; }
  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ > 0 ? 1 : (num_ < 0 ? -1 : 0); }

  double to_double() const;
  std::string to_string() const;

  Rational operator-() const;
  Rational& operator+=(const Rational& o);
  Rational& operator-=(const Rational& o);
  Rational& operator*=(const Rational& o);
  Rational& operator/=(const Rational& o);

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  Int num_ = 0;
  Int den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

std::string int128_to_string(Rational::Int v);

}  // namespace treebandit
