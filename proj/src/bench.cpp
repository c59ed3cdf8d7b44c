#include "reinshard/bench.hpp"

#include "reinshard/crypto.hpp"
#include "reinshard/error.hpp"
#include "reinshard/vdf.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>

namespace reinshard::bench {

std::string_view to_string(HashKind h) noexcept { return h == HashKind::sha256 ? "sha256" : "sha512"; }

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Bytes seal(const Bytes& payload, HashKind hash) {
    if (hash == HashKind::sha256) {
        const Digest d = sha256(payload);
        return Bytes(d.bytes.begin(), d.bytes.end());
    }
    const auto d = sha512(payload);
    return Bytes(d.begin(), d.end());
}

} // namespace

BlockGenRow block_gen_benchmark(std::uint64_t block_size, std::uint64_t validators, HashKind hash,
                                unsigned repetitions) {
    if (block_size == 0) throw Error(ErrorCode::BadParameter, "block size must be positive");
    if (validators == 0 || validators > 1000) throw Error(ErrorCode::BadParameter, "validators must lie in [1, 1000]");
    if (repetitions == 0) throw Error(ErrorCode::BadParameter, "zero repetitions");

    BlockGenRow best;
    best.block_size = block_size;
    best.validators = validators;
    best.hash = hash;
    best.total_ms = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(block_size);
    for (unsigned rep = 0; rep < repetitions; ++rep) {
        const auto t0 = Clock::now();
        Bytes payload(block_size);
        for (std::uint8_t& b : payload) b = static_cast<std::uint8_t>(rng());
        const Bytes header = seal(payload, hash);
        const double gen = ms_since(t0);

        const auto t1 = Clock::now();
        std::uint64_t accepted = 0;
        for (std::uint64_t v = 0; v < validators; ++v) accepted += seal(payload, hash) == header ? 1 : 0;
        const double val = ms_since(t1);
        if (accepted != validators) throw Error(ErrorCode::InvariantBroken, "validator rejected an honest block");

        if (gen + val < best.total_ms) {
            best.generate_ms = gen;
            best.validate_ms = val;
            best.total_ms = gen + val;
        }
    }
    return best;
}

VdfBenchRow vdf_benchmark(std::uint64_t iterations, unsigned repetitions) {
    if (iterations == 0) throw Error(ErrorCode::BadParameter, "zero iterations");
    if (repetitions == 0) throw Error(ErrorCode::BadParameter, "zero repetitions");
    vdf::VdfParams p;
    p.iterations = iterations;
    const Digest vk = FieldHasher(tag::vdf_keys).text("bench").finish();
    p.verify_key.assign(vk.bytes.begin(), vk.bytes.end());
    const Digest input = FieldHasher(tag::vdf_keys).text("bench-input").u64(iterations).finish();

    VdfBenchRow row;
    row.iterations = iterations;
    const auto t0 = Clock::now();
    const vdf::VdfArtifact a = vdf::eval(p, input);
    row.eval_ms = ms_since(t0);

    row.verify_ms = std::numeric_limits<double>::infinity();
    row.verified = true;
    for (unsigned rep = 0; rep < repetitions; ++rep) {
        const auto t1 = Clock::now();
        const bool ok = vdf::verify(p.verify_key, a, rep);
        row.verify_ms = std::min(row.verify_ms, ms_since(t1));
        row.verified = row.verified && ok;
    }
    return row;
}

} // namespace reinshard::bench
