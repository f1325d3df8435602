#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace golab {

using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational, boost::multiprecision::et_off>;

enum class ErrorKind {
  InvalidDimension,
  DimensionMismatch,
  NotSubalgebra,
  NonReductive,
  NotInSubspace,
  NotPositiveDefinite,
  Ambiguous,
  Parse,
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

namespace detail {
inline double& float_tolerance_storage() {
  static double tol = 1e-9;
  return tol;
}
}  // namespace detail

/// Absolute zero-test tolerance used by the floating backend.
inline double float_tolerance() { return detail::float_tolerance_storage(); }

/// Not synchronized: set once before any computation starts.
inline void set_float_tolerance(double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::Parse, "tolerance must be positive");
  detail::float_tolerance_storage() = tol;
}

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr const char* name = "exact";

  static bool is_zero(const Rational& x) { return x.is_zero(); }
  static bool is_exact_zero(const Rational& x) { return x.is_zero(); }
  static bool is_positive(const Rational& x) { return x.sign() > 0; }
  static Rational from_int(long long v) { return Rational(v); }
  static Rational from_ratio(long long p, long long q) {
    if (q == 0) throw Error(ErrorKind::Parse, "zero denominator");
    return Rational(p, q);
  }
  static double to_double(const Rational& x) { return x.convert_to<double>(); }
  static std::string to_string(const Rational& x) { return x.str(); }
  static Rational abs(const Rational& x) { return boost::multiprecision::abs(x); }

  /// Accepts "p", "-p" or "p/q".
  static Rational parse(std::string_view s) {
    std::string str(s);
    auto slash = str.find('/');
    auto valid_int = [](std::string_view t) {
      if (t.empty()) return false;
      std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
      if (i == t.size()) return false;
      for (; i < t.size(); ++i)
        if (t[i] < '0' || t[i] > '9') return false;
      return true;
    };
    if (slash == std::string::npos) {
      if (!valid_int(str)) throw Error(ErrorKind::Parse, "not a rational: '" + str + "'");
      if (str[0] == '+') str.erase(0, 1);
      return Rational(str);
    }
    std::string num = str.substr(0, slash), den = str.substr(slash + 1);
    if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+')
      throw Error(ErrorKind::Parse, "not a rational: '" + str + "'");
    if (num[0] == '+') num.erase(0, 1);
    bool zero_den = den.find_first_not_of('0') == std::string::npos;
    if (zero_den) throw Error(ErrorKind::Parse, "zero denominator in '" + str + "'");
    return Rational(num + "/" + den);
  }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr const char* name = "float";

  static bool is_zero(double x) { return std::abs(x) <= float_tolerance(); }
  static bool is_exact_zero(double x) { return x == 0.0; }
  static bool is_positive(double x) { return x > float_tolerance(); }
  static double from_int(long long v) { return static_cast<double>(v); }
  static double from_ratio(long long p, long long q) {
    if (q == 0) throw Error(ErrorKind::Parse, "zero denominator");
    return static_cast<double>(p) / static_cast<double>(q);
  }
  static double to_double(double x) { return x; }
  static std::string to_string(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
  static double abs(double x) { return std::abs(x); }
  static double parse(std::string_view s) {
    return ScalarTraits<Rational>::parse(s).convert_to<double>();
  }
};

template <class T>
inline bool is_zero(const T& x) {
  return ScalarTraits<T>::is_zero(x);
}

template <class T>
inline T from_ratio(long long p, long long q = 1) {
  return ScalarTraits<T>::from_ratio(p, q);
}

template <class T>
inline double to_double(const T& x) {
  return ScalarTraits<T>::to_double(x);
}

template <class T>
inline std::string to_string(const T& x) {
  return ScalarTraits<T>::to_string(x);
}

/// Best rational approximation with denominator <= max_den (continued fractions).
inline Rational rationalize(double x, long long max_den = 1000000) {
  if (!std::isfinite(x)) throw Error(ErrorKind::Internal, "cannot rationalize non-finite value");
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  double v = x;
  for (int iter = 0; iter < 64; ++iter) {
    double a = std::floor(v);
    if (std::abs(a) > 1e15) break;
    auto ai = static_cast<long long>(a);
    long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    double frac = v - a;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  if (q1 == 0) return Rational(0);
  return Rational(p1, q1);
}

/// Small random rational with numerator in [-num_range, num_range] and
/// denominator in [1, max_den].
template <class T, class Rng>
T random_small_rational(Rng& rng, int num_range = 6, int max_den = 4) {
  std::uniform_int_distribution<int> num(-num_range, num_range);
  std::uniform_int_distribution<int> den(1, max_den);
  int p = num(rng);
  int q = den(rng);
  return from_ratio<T>(p, q);
}

}  // namespace golab
