#include "rbench/rational.hpp"

#include <charconv>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace rbench {
namespace {

using Wide = __int128;

std::int64_t narrow(Wide v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw std::overflow_error("rational overflow");
  }
  return static_cast<std::int64_t>(v);
}

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make_reduced(Wide num, Wide den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num), narrow(den));
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::int64_t parse_int(std::string_view s, std::string_view whole) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument(fmt::format("not a rational: '{}'", whole));
  }
  return v;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  Wide n = num;
  Wide d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Wide g = wide_gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow(n);
  den_ = narrow(d);
}

Rational Rational::parse(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) throw std::invalid_argument("empty rational");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    return Rational(parse_int(trim(s.substr(0, slash)), text), parse_int(trim(s.substr(slash + 1)), text));
  }

  auto dot = s.find('.');
  if (dot == std::string_view::npos) return Rational(parse_int(s, text));

  bool negative = !s.empty() && s.front() == '-';
  std::string_view int_part = s.substr(0, dot);
  std::string_view frac_part = s.substr(dot + 1);
  if (frac_part.empty() || frac_part.size() > 18 || frac_part.front() == '-' || frac_part.front() == '+') {
    throw std::invalid_argument(fmt::format("not a rational: '{}'", text));
  }
  std::int64_t whole = 0;
  if (!(int_part.empty() || int_part == "-" || int_part == "+")) whole = parse_int(int_part, text);
  std::int64_t frac = parse_int(frac_part, text);
  Wide scale = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
  Wide magnitude = static_cast<Wide>(whole < 0 ? -whole : whole) * scale + frac;
  return make_reduced(negative ? -magnitude : magnitude, scale);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return fmt::format("{}/{}", num_, den_);
}

Rational& Rational::operator+=(const Rational& rhs) {
  *this = make_reduced(static_cast<Wide>(num_) * rhs.den_ + static_cast<Wide>(rhs.num_) * den_,
                       static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide lhs = static_cast<Wide>(a.num_) * b.den_;
  Wide rhs = static_cast<Wide>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace rbench
