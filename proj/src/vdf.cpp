#include "reinshard/vdf.hpp"

#include "reinshard/error.hpp"

#include <boost/multiprecision/integer.hpp>

#include <cmath>

namespace reinshard::vdf {

std::uint64_t ceil_sqrt(std::uint64_t n) noexcept {
    if (n <= 1) return n;
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r * r == n ? r : r + 1;
}

std::vector<std::uint64_t> checkpoint_positions(std::uint64_t iterations) {
    const std::uint64_t m = ceil_sqrt(iterations);
    std::vector<std::uint64_t> out;
    out.reserve(m);
    for (std::uint64_t k = 1; k <= m; ++k) {
        // ceil(k * zeta / m), computed without overflow for zeta < 2^63.
        const unsigned __int128 num = static_cast<unsigned __int128>(k) * iterations;
        out.push_back(static_cast<std::uint64_t>((num + m - 1) / m));
    }
    return out;
}

std::uint64_t delay_iterations(Micros tau, const BigInt& pos_target, const CostModel& cost) {
    if (tau <= 0) throw Error(ErrorCode::BadParameter, "tau must be positive");
    if (cost.per_iteration <= 0) throw Error(ErrorCode::BadParameter, "iteration cost must be positive");
    if (pos_target < 1) throw Error(ErrorCode::BadParameter, "PoS target must be positive");
    const auto base = static_cast<std::uint64_t>((tau + cost.per_iteration - 1) / cost.per_iteration);
    const BigInt width = two_pow_256() / pos_target;
    const std::uint64_t bits = width == 0 ? 0 : boost::multiprecision::msb(width) + 1;
    const std::uint64_t factor = std::max<std::uint64_t>(1, bits / 8);
    return base * factor;
}

VdfParams setup(unsigned security_bits, Micros tau, const BigInt& pos_target, std::uint64_t seed,
                const CostModel& cost) {
    if (security_bits != 128 && security_bits != 256) {
        throw Error(ErrorCode::BadSecurityLevel, "security level must be 128 or 256 bits");
    }
    VdfParams p;
    p.security_bits = security_bits;
    p.tau = tau;
    p.iterations = delay_iterations(tau, pos_target, cost);
    const Digest ek = FieldHasher(tag::vdf_keys).text("eval").u64(seed).u64(security_bits).finish();
    const Digest vk = FieldHasher(tag::vdf_keys).text("verify").digest(ek).finish();
    p.eval_key.assign(ek.bytes.begin(), ek.bytes.end());
    p.verify_key.assign(vk.bytes.begin(), vk.bytes.end());
    return p;
}

Digest derive_input(const Digest& parent_pos_hash, const Digest& prev_pos_hash) {
    return FieldHasher(tag::puzzle_h).digest(parent_pos_hash).digest(prev_pos_hash).finish();
}

Digest commit(const Bytes& verify_key, const Digest& input, std::uint64_t iterations,
              const std::vector<Digest>& checkpoints) {
    FieldHasher h(tag::vdf_commit);
    h.bytes(verify_key).digest(input).u64(iterations).u64(checkpoints.size());
    for (const Digest& c : checkpoints) h.digest(c);
    return h.finish();
}

VdfArtifact eval(const VdfParams& params, const Digest& input) {
    if (params.iterations == 0) throw Error(ErrorCode::BadParameter, "zero iterations");
    const auto positions = checkpoint_positions(params.iterations);
    VdfArtifact a;
    a.input = input;
    a.proof.iterations = params.iterations;
    a.proof.checkpoints.reserve(positions.size());
    Digest x = input;
    std::uint64_t step = 0;
    for (std::uint64_t end : positions) {
        for (; step < end; ++step) x = vdf_step_hash(x);
        a.proof.checkpoints.push_back(x);
    }
    a.output = x;
    a.proof.commitment = commit(params.verify_key, input, params.iterations, a.proof.checkpoints);
    return a;
}

std::uint64_t sampled_segment(std::uint64_t sample_seed, const Digest& input, std::uint64_t segments) {
    const Digest d = FieldHasher(tag::vdf_sample).u64(sample_seed).digest(input).finish();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[static_cast<std::size_t>(i)];
    return v % segments;
}

bool verify(const Bytes& verify_key, const Digest& input, const Digest& output, const VdfProof& proof,
            std::uint64_t sample_seed) {
    if (proof.iterations == 0) return false;
    const auto positions = checkpoint_positions(proof.iterations);
    if (proof.checkpoints.size() != positions.size()) return false;
    if (proof.checkpoints.back() != output) return false;
    if (commit(verify_key, input, proof.iterations, proof.checkpoints) != proof.commitment) return false;

    const std::uint64_t k = sampled_segment(sample_seed, input, positions.size());
    Digest x = k == 0 ? input : proof.checkpoints[k - 1];
    const std::uint64_t begin = k == 0 ? 0 : positions[k - 1];
    for (std::uint64_t step = begin; step < positions[k]; ++step) x = vdf_step_hash(x);
    return x == proof.checkpoints[k];
}

void check_timing(Micros verify_time, Micros eval_time) {
    if (verify_time >= eval_time) {
        throw Error(ErrorCode::ContractViolation,
                    "verification time must be strictly below evaluation time (t_V < t_E)");
    }
}

} // namespace reinshard::vdf
