#include "octerm/rational.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace octerm {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational::Rational(std::int64_t value) {
  mpz_class z;
  mpz_set_si(z.get_mpz_t(), static_cast<long>(value));
  value_ = mpq_class(z);
}

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  mpz_class n, d;
  mpz_set_si(n.get_mpz_t(), static_cast<long>(num));
  mpz_set_si(d.get_mpz_t(), static_cast<long>(den));
  value_ = mpq_class(n, d);
  value_.canonicalize();
}

Rational::Rational(mpq_class value) : value_(std::move(value)) { value_.canonicalize(); }

Rational Rational::parse(std::string_view text) {
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    throw std::invalid_argument("expected num/den, got '" + std::string(text) + "'");
  }
  std::string_view num = text.substr(0, slash);
  std::string_view den = text.substr(slash + 1);
  bool negative = false;
  if (!num.empty() && (num.front() == '-' || num.front() == '+')) {
    negative = num.front() == '-';
    num.remove_prefix(1);
  }
  if (!all_digits(num) || !all_digits(den)) {
    throw std::invalid_argument("expected num/den, got '" + std::string(text) + "'");
  }
  mpz_class n(std::string(num), 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  if (negative) n = -n;
  return Rational(mpq_class(n, d));
}

Rational Rational::from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value");
  mpq_class q;
  mpq_set_d(q.get_mpq_t(), value);
  return Rational(q);
}

Rational Rational::from_long_double(long double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value");
  // Split into two doubles; the sum is exact for the 64-bit mantissa.
  double hi = static_cast<double>(value);
  double lo = static_cast<double>(value - static_cast<long double>(hi));
  return from_double(hi) + from_double(lo);
}

std::string Rational::str() const {
  return value_.get_num().get_str() + "/" + value_.get_den().get_str();
}

long double Rational::to_long_double() const {
  // Two-term split keeps ~106 bits before the final rounding.
  double hi = value_.get_d();
  mpq_class rest = value_ - mpq_class(hi);
  return static_cast<long double>(hi) + static_cast<long double>(rest.get_d());
}

mpz_class Rational::floor() const {
  mpz_class r;
  mpz_fdiv_q(r.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
  return r;
}

mpz_class Rational::ceil() const {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), value_.get_num_mpz_t(), value_.get_den_mpz_t());
  return r;
}

Rational& Rational::operator/=(const Rational& o) {
  if (o.is_zero()) throw std::domain_error("division by zero");
  value_ /= o.value_;
  return *this;
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

Rational simplest_between(const Rational& lo, const Rational& hi) {
  if (hi < lo) throw std::invalid_argument("simplest_between: empty interval");
  if (lo.sign() <= 0 && hi.sign() >= 0) return Rational(0);
  if (hi.sign() < 0) return -simplest_between(-hi, -lo);
  const Rational fl(mpq_class(lo.floor()));
  if (fl == lo) return lo;
  if (Rational(mpq_class(hi.floor())) > fl) return fl + Rational(1);
  return fl + Rational(1) / simplest_between(Rational(1) / (hi - fl), Rational(1) / (lo - fl));
}

}  // namespace octerm
