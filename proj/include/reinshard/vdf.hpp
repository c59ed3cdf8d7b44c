#pragma once

#include "reinshard/crypto.hpp"
#include "reinshard/numeric.hpp"

#include <cstdint>
#include <vector>

// Simulated verifiable delay function: an iterated, domain-separated SHA-256
// chain with sqrt-spaced checkpoints. Eval walks the whole chain; Verify
// checks the checkpoint transcript and re-walks one sampled segment, so the
// verifier does O(sqrt(iterations)) work against the evaluator's O(iterations).

namespace reinshard::vdf {

/// Simulated time is kept in integer microseconds throughout the project.
using Micros = std::int64_t;

struct CostModel {
    Micros per_iteration = 1000; // 1 ms of simulated time per chain step
};

struct VdfParams {
    Bytes eval_key;
    Bytes verify_key;
    unsigned security_bits = 128;
    std::uint64_t iterations = 1; // zeta
    Micros tau = 0;               // target Eval time
};

struct VdfProof {
    std::vector<Digest> checkpoints;
    std::uint64_t iterations = 0;
    Digest commitment;
};

struct VdfArtifact {
    Digest input;
    Digest output;
    VdfProof proof;
};

/// ceil(sqrt(n)) for n >= 1.
std::uint64_t ceil_sqrt(std::uint64_t n) noexcept;

/// End positions (1-based step counts) of every checkpoint segment.
std::vector<std::uint64_t> checkpoint_positions(std::uint64_t iterations);

/// zeta = f(tau, target) = ceil(tau / cost) * max(1, bits(2^256 / target) / 8).
std::uint64_t delay_iterations(Micros tau, const BigInt& pos_target, const CostModel& cost = {});

VdfParams setup(unsigned security_bits, Micros tau, const BigInt& pos_target, std::uint64_t seed,
                const CostModel& cost = {});

/// I = H(h_q, h_g) with the puzzle-H domain tag.
Digest derive_input(const Digest& parent_pos_hash, const Digest& prev_pos_hash);

VdfArtifact eval(const VdfParams& params, const Digest& input);

/// Transcript commitment binding v_k, I, the iteration count and every checkpoint.
Digest commit(const Bytes& verify_key, const Digest& input, std::uint64_t iterations,
              const std::vector<Digest>& checkpoints);

/// Which segment a verifier with the given sampling seed re-walks.
std::uint64_t sampled_segment(std::uint64_t sample_seed, const Digest& input, std::uint64_t segments);

bool verify(const Bytes& verify_key, const Digest& input, const Digest& output, const VdfProof& proof,
            std::uint64_t sample_seed = 0);

inline bool verify(const Bytes& verify_key, const VdfArtifact& a, std::uint64_t sample_seed = 0) {
    return verify(verify_key, a.input, a.output, a.proof, sample_seed);
}

/// Refuses verification timings that do not satisfy t_V < t_E.
void check_timing(Micros verify_time, Micros eval_time);

} // namespace reinshard::vdf
