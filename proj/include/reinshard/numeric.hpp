#pragma once

#include "reinshard/crypto.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace reinshard {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// 2^256 - 1, the largest admissible target.
const BigInt& max_target();
/// 2^256.
const BigInt& two_pow_256();

BigInt to_bigint(const Digest& d);
Digest to_digest(const BigInt& v);

struct ClampedTarget {
    BigInt value;
    bool clamped = false;
};

/// Clamp a target into [1, 2^256 - 1].
ClampedTarget clamp_target(const BigInt& t);

/// floor(r * t) for non-negative r.
BigInt floor_mul(const Rational& r, const BigInt& t);

Rational make_rational(std::int64_t num, std::int64_t den = 1);
/// Accepts "p/q", integer, or decimal notation ("2.5").
Rational parse_rational(std::string_view s);
/// Exact conversion of a finite double.
Rational rational_from_double(double v);
double to_double(const Rational& r);
std::string to_string(const Rational& r);

/// 16-byte encoding of a small non-negative rational: be64(num) || be64(den),
/// normalised. Throws if either part does not fit 64 bits.
Bytes encode_rational(const Rational& r);

} // namespace reinshard
