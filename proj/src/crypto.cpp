#include "reinshard/crypto.hpp"

#include "reinshard/error.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cstring>

namespace reinshard {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

void put_length(Sha256& sha, std::size_t n) {
    const std::uint8_t len[4] = {static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16),
                                 static_cast<std::uint8_t>(n >> 8), static_cast<std::uint8_t>(n)};
    sha.update(std::span<const std::uint8_t>(len, 4));
}

void put_length(Bytes& out, std::size_t n) {
    out.push_back(static_cast<std::uint8_t>(n >> 24));
    out.push_back(static_cast<std::uint8_t>(n >> 16));
    out.push_back(static_cast<std::uint8_t>(n >> 8));
    out.push_back(static_cast<std::uint8_t>(n));
}

} // namespace

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedBlock: return "MalformedBlock";
    case ErrorCode::InvariantBroken: return "InvariantBroken";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::LinkMismatch: return "LinkMismatch";
    case ErrorCode::NoValidPair: return "NoValidPair";
    case ErrorCode::UnknownPair: return "UnknownPair";
    case ErrorCode::NotApplicable: return "NotApplicable";
    case ErrorCode::BadSecurityLevel: return "BadSecurityLevel";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::ContractViolation: return "ContractViolation";
    case ErrorCode::BadProfile: return "BadProfile";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::DegenerateProfile: return "DegenerateProfile";
    case ErrorCode::EmptyValidatorSet: return "EmptyValidatorSet";
    case ErrorCode::ZeroLearningRate: return "ZeroLearningRate";
    case ErrorCode::NoDelegate: return "NoDelegate";
    case ErrorCode::EmptyChain: return "EmptyChain";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::ScenarioViolation: return "ScenarioViolation";
    case ErrorCode::InvalidParty: return "InvalidParty";
    case ErrorCode::IllegalState: return "IllegalState";
    case ErrorCode::PastEvent: return "PastEvent";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

Digest Digest::from_hex(std::string_view hex) {
    const Bytes raw = reinshard::from_hex(hex);
    if (raw.size() != 32) {
        throw Error(ErrorCode::MalformedBlock, "digest must be 256 bits, got " + std::to_string(raw.size() * 8));
    }
    Digest d;
    std::copy(raw.begin(), raw.end(), d.bytes.begin());
    return d;
}

std::string Digest::hex() const { return to_hex(bytes); }

bool Digest::is_zero() const noexcept {
    return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

struct Sha256::Impl {
    EVP_MD_CTX* ctx = nullptr;
    ~Impl() { EVP_MD_CTX_free(ctx); }
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
    impl_->ctx = EVP_MD_CTX_new();
    if (impl_->ctx == nullptr || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("EVP sha256 init failed");
    }
}

Sha256::~Sha256() = default;
Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

Sha256& Sha256::update(std::span<const std::uint8_t> data) {
    EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
    return *this;
}

Sha256& Sha256::update(std::string_view data) {
    EVP_DigestUpdate(impl_->ctx, data.data(), data.size());
    return *this;
}

Digest Sha256::finish() {
    Digest d;
    unsigned int len = 0;
    EVP_DigestFinal_ex(impl_->ctx, d.bytes.data(), &len);
    EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr);
    return d;
}

Digest sha256(std::span<const std::uint8_t> data) {
    Digest d;
    SHA256(data.data(), data.size(), d.bytes.data());
    return d;
}

std::array<std::uint8_t, 64> sha512(std::span<const std::uint8_t> data) {
    std::array<std::uint8_t, 64> out{};
    SHA512(data.data(), data.size(), out.data());
    return out;
}

Digest vdf_step_hash(const Digest& x) noexcept {
    std::uint8_t buf[33];
    buf[0] = tag::vdf_step;
    std::memcpy(buf + 1, x.bytes.data(), 32);
    Digest d;
    SHA256(buf, sizeof(buf), d.bytes.data());
    return d;
}

FieldHasher::FieldHasher(std::uint8_t domain_tag) {
    sha_.update(std::span<const std::uint8_t>(&domain_tag, 1));
}

FieldHasher& FieldHasher::bytes(std::span<const std::uint8_t> data) {
    put_length(sha_, data.size());
    sha_.update(data);
    return *this;
}

FieldHasher& FieldHasher::text(std::string_view s) {
    put_length(sha_, s.size());
    sha_.update(s);
    return *this;
}

FieldHasher& FieldHasher::digest(const Digest& d) { return bytes(d.bytes); }

FieldHasher& FieldHasher::u64(std::uint64_t v) { return bytes(be64(v)); }

FieldHasher& FieldHasher::boolean(bool b) {
    const std::uint8_t v = b ? 1 : 0;
    return bytes(std::span<const std::uint8_t>(&v, 1));
}

Digest FieldHasher::finish() { return sha_.finish(); }

FieldEncoder& FieldEncoder::bytes(std::span<const std::uint8_t> data) {
    put_length(out_, data.size());
    out_.insert(out_.end(), data.begin(), data.end());
    return *this;
}

FieldEncoder& FieldEncoder::text(std::string_view s) {
    put_length(out_, s.size());
    out_.insert(out_.end(), s.begin(), s.end());
    return *this;
}

FieldEncoder& FieldEncoder::digest(const Digest& d) { return bytes(d.bytes); }

FieldEncoder& FieldEncoder::u64(std::uint64_t v) { return bytes(be64(v)); }

FieldEncoder& FieldEncoder::boolean(bool b) {
    const std::uint8_t v = b ? 1 : 0;
    return bytes(std::span<const std::uint8_t>(&v, 1));
}

Bytes be64(std::uint64_t v) {
    Bytes out(8);
    for (int i = 7; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 0xff);
        v >>= 8;
    }
    return out;
}

std::string to_hex(std::span<const std::uint8_t> data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) throw Error(ErrorCode::ParseError, "odd-length hex string");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_value(hex[i]);
        const int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::ParseError, "invalid hex digit");
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

NodeId node_id(std::string_view label) { return FieldHasher(tag::node_label).text(label).finish(); }

} // namespace reinshard
