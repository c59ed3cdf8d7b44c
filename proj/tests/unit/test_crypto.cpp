#include "helpers.hpp"

#include "reinshard/crypto.hpp"
#include "reinshard/numeric.hpp"

#include <catch_amalgamated.hpp>

#include <openssl/sha.h>

using namespace reinshard;

TEST_CASE("field encoding is tag then length-prefixed fields", "[crypto]") {
    // independent preimage built by hand and hashed with the raw OpenSSL call
    const std::uint8_t pre[] = {0x20, 0, 0, 0, 5, 'a', 'l', 'i', 'c', 'e'};
    Digest expect;
    SHA256(pre, sizeof pre, expect.bytes.data());
    CHECK(node_id("alice") == expect);
    CHECK(FieldHasher(tag::node_label).text("alice").finish() == expect);

    FieldEncoder e;
    e.u64(1).boolean(true);
    const Bytes want = {0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1};
    CHECK(e.data() == want);
}

TEST_CASE("node ids match the golden file", "[crypto]") {
    for (const auto& n : testutil::golden().at("node_ids")) {
        CHECK(node_id(n.at("label").get<std::string>()).hex() == n.at("id").get<std::string>());
    }
}

TEST_CASE("digest hex round trip and ordering", "[crypto]") {
    const Digest a = node_id("a");
    CHECK(Digest::from_hex(a.hex()) == a);
    CHECK(testutil::error_of([] { (void)Digest::from_hex("abcd"); }) == ErrorCode::MalformedBlock);
    CHECK(testutil::error_of([] { (void)Digest::from_hex("abc"); }) == ErrorCode::ParseError);
    Digest lo, hi;
    hi.bytes[0] = 0x01;
    lo.bytes[31] = 0xff;
    CHECK(lo < hi); // big-endian integer order
    CHECK(to_bigint(hi) > to_bigint(lo));
    CHECK(to_digest(to_bigint(a)) == a);
}

TEST_CASE("vdf step hash is SHA-256 of 0x04 and the state", "[crypto]") {
    const Digest x = node_id("x");
    std::uint8_t pre[33];
    pre[0] = 0x04;
    std::copy(x.bytes.begin(), x.bytes.end(), pre + 1);
    Digest expect;
    SHA256(pre, sizeof pre, expect.bytes.data());
    CHECK(vdf_step_hash(x) == expect);
}

TEST_CASE("rational encoding is reduced be64 pairs", "[crypto]") {
    const Bytes enc = encode_rational(Rational(2, 20));
    const Bytes want = {0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 10};
    CHECK(enc == want);
    CHECK(parse_rational("3/4") == Rational(3, 4));
    CHECK(parse_rational("2.5") == Rational(5, 2));
    CHECK(parse_rational("7") == Rational(7));
    CHECK(to_string(Rational(6, 4)) == "3/2");
}

TEST_CASE("target clamping and floor multiplication", "[crypto]") {
    CHECK(clamp_target(0).value == 1);
    CHECK(clamp_target(0).clamped);
    CHECK(clamp_target(two_pow_256()).value == max_target());
    CHECK_FALSE(clamp_target(BigInt(5)).clamped);
    CHECK(floor_mul(Rational(1, 3), BigInt(10)) == 3);
    CHECK(floor_mul(Rational(7, 2), BigInt(3)) == 10);
}
