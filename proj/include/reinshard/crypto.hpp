#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reinshard {

using Bytes = std::vector<std::uint8_t>;

/// 256-bit digest. Ordering is that of a big-endian unsigned integer, which
/// for a fixed-width byte array is plain lexicographic order.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    static Digest zero() noexcept { return {}; }
    static Digest from_hex(std::string_view hex);

    std::string hex() const;
    bool is_zero() const noexcept;

    friend auto operator<=>(const Digest&, const Digest&) = default;
};

using NodeId = Digest;
using PairId = Digest;

/// Domain tags prefixed to every preimage. The puzzle hashes H, Z and H~ use
/// 0x01..0x03; the remaining tags keep object ids and VDF steps apart.
namespace tag {
inline constexpr std::uint8_t puzzle_h = 0x01;
inline constexpr std::uint8_t puzzle_z = 0x02;
inline constexpr std::uint8_t leader_h = 0x03;
inline constexpr std::uint8_t vdf_step = 0x04;
inline constexpr std::uint8_t vdf_commit = 0x05;
inline constexpr std::uint8_t vdf_keys = 0x06;
inline constexpr std::uint8_t vdf_sample = 0x07;
inline constexpr std::uint8_t pow_block = 0x10;
inline constexpr std::uint8_t pos_block = 0x11;
inline constexpr std::uint8_t node_label = 0x20;
inline constexpr std::uint8_t shard_id = 0x21;
inline constexpr std::uint8_t session_id = 0x22;
inline constexpr std::uint8_t rng_stream = 0x23;
} // namespace tag

/// Streaming SHA-256 (OpenSSL EVP underneath).
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(Sha256&&) noexcept;
    Sha256& operator=(Sha256&&) noexcept;
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(std::span<const std::uint8_t> data);
    Sha256& update(std::string_view data);
    Digest finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Digest sha256(std::span<const std::uint8_t> data);
std::array<std::uint8_t, 64> sha512(std::span<const std::uint8_t> data);

/// One step of the iterated VDF chain: SHA-256(0x04 || x). Kept allocation-free
/// because the evaluator calls it millions of times.
Digest vdf_step_hash(const Digest& x) noexcept;

/// Canonical field encoder: a one-byte domain tag followed by fields, each
/// written as a 4-byte big-endian length and the raw bytes.
class FieldHasher {
public:
    explicit FieldHasher(std::uint8_t domain_tag);

    FieldHasher& bytes(std::span<const std::uint8_t> data);
    FieldHasher& text(std::string_view s);
    FieldHasher& digest(const Digest& d);
    FieldHasher& u64(std::uint64_t v);
    FieldHasher& boolean(bool b);

    Digest finish();

private:
    Sha256 sha_;
};

/// Same encoding as FieldHasher but collected into a buffer; used where the
/// encoded bytes themselves are needed (e.g. as a hash input field).
class FieldEncoder {
public:
    FieldEncoder& bytes(std::span<const std::uint8_t> data);
    FieldEncoder& text(std::string_view s);
    FieldEncoder& digest(const Digest& d);
    FieldEncoder& u64(std::uint64_t v);
    FieldEncoder& boolean(bool b);

    const Bytes& data() const noexcept { return out_; }
    Bytes take() noexcept { return std::move(out_); }

private:
    Bytes out_;
};

Bytes be64(std::uint64_t v);

std::string to_hex(std::span<const std::uint8_t> data);
Bytes from_hex(std::string_view hex);

/// Deterministic node id from a human-readable label.
NodeId node_id(std::string_view label);

} // namespace reinshard
