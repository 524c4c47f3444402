#include "core/rational.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace treebandit {

namespace {

using Int = Rational::Int;

Int abs128(Int v) { return v < 0 ? -v : v; }

int ctz128(unsigned __int128 v) {
  auto lo = static_cast<std::uint64_t>(v);
  if (lo != 0) return __builtin_ctzll(lo);
  return 64 + __builtin_ctzll(static_cast<std::uint64_t>(v >> 64));
}

Int gcd128(Int a, Int b) {
  auto x = static_cast<unsigned __int128>(abs128(a));
  auto y = static_cast<unsigned __int128>(abs128(b));
  if (x == 0) return static_cast<Int>(y);
  if (y == 0) return static_cast<Int>(x);
  const int shift = ctz128(x | y);
  x >>= ctz128(x);
  do {
    y >>= ctz128(y);
    if (x > y) std::swap(x, y);
    y -= x;
  } while (y != 0);
  return static_cast<Int>(x << shift);
}

Int mul_checked(Int a, Int b) {
  Int out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("Rational: multiplication overflow");
  return out;
}

Int add_checked(Int a, Int b) {
  Int out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("Rational: addition overflow");
  return out;
}

}  // namespace

Rational::Rational(Int num, Int den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const Int g = gcd128(num, den);
  num_ = num / g;
  den_ = den / g;
}

Rational Rational::from_double(double x) {
  if (!std::isfinite(x)) throw std::domain_error("Rational: non-finite double");
  if (x == 0.0) return Rational();
  int exp = 0;
  const double frac = std::frexp(x, &exp);  // x = frac * 2^exp, 0.5 <= |frac| < 1
  const auto mant = static_cast<long long>(std::ldexp(frac, 53));
  const int shift = exp - 53;
  if (shift >= 0) {
    if (shift > 60) throw std::overflow_error("Rational: double too large");
    return Rational(mul_checked(mant, Int(1) << shift), 1);
  }
  if (-shift > 125) throw std::overflow_error("Rational: double too small for exact conversion");
  return Rational(mant, Int(1) << (-shift));
}

Rational Rational::parse(const std::string& text) {
  auto parse_int = [&](const std::string& s) {
    if (s.empty()) throw std::invalid_argument("Rational: empty integer in '" + text + "'");
    Int v = 0;
    std::size_t i = 0;
    bool neg = false;
    if (s[0] == '-') {
      neg = true;
      i = 1;
    }
    if (i == s.size()) throw std::invalid_argument("Rational: bad integer in '" + text + "'");
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("Rational: bad digit in '" + text + "'");
      v = add_checked(mul_checked(v, 10), s[i] - '0');
    }
    return neg ? -v : v;
  };
  const auto slash = text.find('/');
  if (slash == std::string::npos) return Rational(parse_int(text), 1);
  return Rational(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
}

double Rational::to_double() const {
  if (den_ == 1) return static_cast<double>(num_);
  return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
}

std::string int128_to_string(Int v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  auto u = static_cast<unsigned __int128>(neg ? -v : v);
  std::string out;
  while (u != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) out.push_back('-');
  return {out.rbegin(), out.rend()};
}

std::string Rational::to_string() const {
  if (den_ == 1) return int128_to_string(num_);
  return int128_to_string(num_) + "/" + int128_to_string(den_);
}

Rational Rational::operator-() const {
  Rational r;
  r.num_ = -num_;
  r.den_ = den_;
  return r;
}

Rational& Rational::operator+=(const Rational& o) {
  if (o.num_ == 0) return *this;
  if (num_ == 0) return *this = o;
  if (den_ == 1 && o.den_ == 1) {
    num_ = add_checked(num_, o.num_);
    return *this;
  }
  const Int g = gcd128(den_, o.den_);
  const Int lhs = mul_checked(num_, o.den_ / g);
  const Int rhs = mul_checked(o.num_, den_ / g);
  *this = Rational(add_checked(lhs, rhs), mul_checked(den_, o.den_ / g));
  return *this;
}

Rational& Rational::operator-=(const Rational& o) { return *this += -o; }

Rational& Rational::operator*=(const Rational& o) {
  if (num_ == 0 || o.num_ == 0) return *this = Rational();
  if (den_ == 1 && o.den_ == 1) {
    num_ = mul_checked(num_, o.num_);
    return *this;
  }
  const Int g1 = gcd128(num_, o.den_);
  const Int g2 = gcd128(o.num_, den_);
  Rational r;
  r.num_ = mul_checked(num_ / g1, o.num_ / g2);
  r.den_ = mul_checked(den_ / g2, o.den_ / g1);
  return *this = r;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.num_ == 0) throw std::domain_error("Rational: division by zero");
  Rational inv;
  inv.num_ = o.den_;
  inv.den_ = o.num_;
  if (inv.den_ < 0) {
    inv.num_ = -inv.num_;
    inv.den_ = -inv.den_;
  }
  return *this *= inv;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  if (a.den_ == b.den_) return a.num_ <=> b.num_;
  if (a.sign() != b.sign()) return a.sign() <=> b.sign();
  const Int g = gcd128(a.den_, b.den_);
  const Int lhs = mul_checked(a.num_, b.den_ / g);
  const Int rhs = mul_checked(b.num_, a.den_ / g);
  return lhs <=> rhs;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

}  // namespace treebandit
