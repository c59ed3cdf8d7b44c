#pragma once

#include <cstdint>
#include <string_view>

// Host wall-clock measurements. Absolute figures depend on the machine; only
// ratios between rows are meaningful.

namespace reinshard::bench {

enum class HashKind { sha256, sha512 };

std::string_view to_string(HashKind h) noexcept;

struct BlockGenRow {
    std::uint64_t block_size = 0; // bytes
    std::uint64_t validators = 0;
    HashKind hash = HashKind::sha256;
    double generate_ms = 0.0;
    double validate_ms = 0.0;
    double total_ms = 0.0;
};

/// Generates a payload stub of `block_size` bytes, seals it with one hash and
/// has every validator re-hash and compare it. Fastest of `repetitions` runs.
/// Throws BadParameter for a zero size or validators outside [1, 1000].
BlockGenRow block_gen_benchmark(std::uint64_t block_size, std::uint64_t validators,
                                HashKind hash = HashKind::sha256, unsigned repetitions = 3);

struct VdfBenchRow {
    std::uint64_t iterations = 0; // zeta
    double eval_ms = 0.0;
    double verify_ms = 0.0;
    bool verified = false;

    double ratio() const noexcept { return eval_ms > 0 ? verify_ms / eval_ms : 0.0; }
};

/// One Eval and the fastest of `repetitions` Verify calls at `iterations`.
VdfBenchRow vdf_benchmark(std::uint64_t iterations, unsigned repetitions = 3);

} // namespace reinshard::bench
