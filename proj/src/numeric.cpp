#include "reinshard/numeric.hpp"

#include "reinshard/error.hpp"

#include <cmath>
#include <limits>

namespace reinshard {

const BigInt& two_pow_256() {
    static const BigInt v = BigInt(1) << 256;
    return v;
}

const BigInt& max_target() {
    static const BigInt v = two_pow_256() - 1;
    return v;
}

BigInt to_bigint(const Digest& d) {
    BigInt v;
    boost::multiprecision::import_bits(v, d.bytes.begin(), d.bytes.end(), 8, true);
    return v;
}

Digest to_digest(const BigInt& v) {
    if (v < 0 || v > max_target()) throw Error(ErrorCode::BadParameter, "value does not fit 256 bits");
    Digest d;
    Bytes raw;
    boost::multiprecision::export_bits(v, std::back_inserter(raw), 8, true);
    std::copy(raw.begin(), raw.end(), d.bytes.begin() + static_cast<std::ptrdiff_t>(32 - raw.size()));
    return d;
}

ClampedTarget clamp_target(const BigInt& t) {
    if (t < 1) return {BigInt(1), true};
    if (t > max_target()) return {max_target(), true};
    return {t, false};
}

BigInt floor_mul(const Rational& r, const BigInt& t) {
    const BigInt num = boost::multiprecision::numerator(r) * t;
    const BigInt den = boost::multiprecision::denominator(r);
    return num / den;
}

Rational make_rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw Error(ErrorCode::BadParameter, "zero denominator");
    return Rational(BigInt(num), BigInt(den));
}

Rational parse_rational(std::string_view s) {
    if (s.empty()) throw Error(ErrorCode::ParseError, "empty rational");
    const auto slash = s.find('/');
    try {
        if (slash != std::string_view::npos) {
            const BigInt num(std::string(s.substr(0, slash)));
            const BigInt den(std::string(s.substr(slash + 1)));
            if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator");
            return Rational(num, den);
        }
        const auto dot = s.find('.');
        if (dot == std::string_view::npos) return Rational(BigInt(std::string(s)));
        std::string digits(s.substr(0, dot));
        const std::string frac(s.substr(dot + 1));
        digits += frac;
        if (digits.empty() || digits == "-") throw Error(ErrorCode::ParseError, "bad decimal");
        BigInt den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
        return Rational(BigInt(digits), den);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorCode::ParseError, "bad rational '" + std::string(s) + "': " + e.what());
    }
}

Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw Error(ErrorCode::BadParameter, "non-finite value");
    int exp = 0;
    const double mant = std::frexp(v, &exp);
    // mant in [0.5, 1): scale to a 53-bit integer.
    const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
    exp -= 53;
    Rational r{BigInt(scaled)};
    if (exp > 0) r *= Rational(BigInt(1) << exp);
    if (exp < 0) r /= Rational(BigInt(1) << -exp);
    return r;
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

std::string to_string(const Rational& r) {
    const BigInt& den = boost::multiprecision::denominator(r);
    if (den == 1) return boost::multiprecision::numerator(r).str();
    return boost::multiprecision::numerator(r).str() + "/" + den.str();
}

Bytes encode_rational(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    const BigInt limit = std::numeric_limits<std::uint64_t>::max();
    if (num < 0 || num > limit || den > limit) {
        throw Error(ErrorCode::BadParameter, "rational " + to_string(r) + " does not fit the 64/64 encoding");
    }
    Bytes out = be64(num.convert_to<std::uint64_t>());
    const Bytes d = be64(den.convert_to<std::uint64_t>());
    out.insert(out.end(), d.begin(), d.end());
    return out;
}

} // namespace reinshard
