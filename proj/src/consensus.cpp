#include "reinshard/consensus.hpp"

#include "reinshard/error.hpp"

namespace reinshard::consensus {

Digest puzzle_z(const Digest& prev_pow_hash, const Digest& pos_head_hash) {
    return FieldHasher(tag::puzzle_z).digest(prev_pow_hash).digest(pos_head_hash).finish();
}

Digest pow_hash(const Rational& alpha_m, const Digest& prev_pow_hash, const Digest& pos_head_hash,
                std::uint64_t nonce) {
    return FieldHasher(tag::puzzle_h)
        .bytes(encode_rational(alpha_m))
        .digest(puzzle_z(prev_pow_hash, pos_head_hash))
        .bytes(be64(nonce))
        .finish();
}

bool check_pow_solution(const Rational& alpha_m, const Digest& prev_pow_hash, const Digest& pos_head_hash,
                        std::uint64_t nonce, const BigInt& target) {
    if (target <= 0) return false;
    return to_bigint(pow_hash(alpha_m, prev_pow_hash, pos_head_hash, nonce)) < target;
}

std::optional<std::uint64_t> mine(const Rational& alpha_m, const Digest& prev_pow_hash, const Digest& pos_head_hash,
                                  const BigInt& target, std::uint64_t first_nonce, std::uint64_t max_attempts) {
    if (target <= 0) return std::nullopt;
    const Bytes alpha = encode_rational(alpha_m);
    const Digest z = puzzle_z(prev_pow_hash, pos_head_hash);
    for (std::uint64_t i = 0; i < max_attempts; ++i) {
        const std::uint64_t nonce = first_nonce + i;
        const Digest h = FieldHasher(tag::puzzle_h).bytes(alpha).digest(z).bytes(be64(nonce)).finish();
        if (to_bigint(h) < target) return nonce;
    }
    return std::nullopt;
}

Digest leader_hash(const chain::PowBlock& pow_block, const Bytes& verify_key) {
    return FieldHasher(tag::leader_h).bytes(pow_block.encode()).bytes(verify_key).finish();
}

BigInt leader_threshold(const Rational& reward, const BigInt& pos_target) {
    if (reward < 0) throw Error(ErrorCode::BadParameter, "negative reward");
    const BigInt t = floor_mul(reward, pos_target);
    return t > max_target() ? max_target() : t;
}

bool check_leader_ticket(const chain::PowBlock& pow_block, const Bytes& verify_key, const Rational& reward,
                         const BigInt& pos_target) {
    if (reward < 0) throw Error(ErrorCode::BadParameter, "negative reward");
    if (pos_target <= 0) return false;
    const BigInt h = to_bigint(leader_hash(pow_block, verify_key));
    const BigInt p = boost::multiprecision::numerator(reward) * pos_target;
    const BigInt& q = boost::multiprecision::denominator(reward);
    if (p >= two_pow_256() * q) return h < max_target(); // saturated product
    return h * q < p;
}

std::string_view to_string(Fallback f) noexcept {
    switch (f) {
    case Fallback::none: return "none";
    case Fallback::lone_validator: return "lone_validator";
    case Fallback::zero_denominator: return "zero_denominator";
    }
    return "?";
}

namespace {

DifficultyResult fallback_result(const BigInt& target, Fallback why) {
    DifficultyResult r;
    r.target = target;
    r.fallback = why;
    return r;
}

DifficultyResult apply_factor(const Rational& factor, const BigInt& target) {
    const ClampedTarget c = clamp_target(floor_mul(factor, target));
    DifficultyResult r;
    r.target = c.value;
    r.clamped = c.clamped;
    r.factor = factor;
    return r;
}

} // namespace

DifficultyResult adjust_pow_difficulty(std::span<const PowPairInput> pairs, std::size_t winner,
                                       const BigInt& pow_target) {
    if (winner >= pairs.size()) throw Error(ErrorCode::BadParameter, "winner index out of range");
    if (pairs.size() < 2) return fallback_result(pow_target, Fallback::lone_validator);
    BigInt eta_others = 0;
    Rational reward_others{0};
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (j == winner) continue;
        eta_others += pairs[j].eta_x;
        reward_others += pairs[j].reward;
    }
    if (eta_others == 0 || reward_others == 0) return fallback_result(pow_target, Fallback::zero_denominator);
    const Rational factor = Rational(BigInt(pairs[winner].eta_x), eta_others) * (pairs[winner].reward / reward_others);
    return apply_factor(factor, pow_target);
}

DifficultyResult adjust_pos_difficulty(std::span<const PosPairInput> pairs, std::size_t winner,
                                       std::uint64_t incoming, const BigInt& pos_target) {
    if (winner >= pairs.size()) throw Error(ErrorCode::BadParameter, "winner index out of range");
    if (pairs.size() < 2) return fallback_result(pos_target, Fallback::lone_validator);
    BigInt cap_others = 0;
    BigInt stake_others = 0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (j == winner) continue;
        cap_others += pairs[j].extra_capacity;
        stake_others += pairs[j].stakes;
    }
    const BigInt cap_i = pairs[winner].extra_capacity;
    const BigInt stake_i = pairs[winner].stakes;
    if (stake_others == 0) return fallback_result(pos_target, Fallback::zero_denominator);
    Rational capacity_ratio;
    if (cap_others >= incoming) {
        if (cap_others == 0) return fallback_result(pos_target, Fallback::zero_denominator);
        capacity_ratio = Rational(cap_i, cap_others);
    } else {
        if (cap_i == 0) return fallback_result(pos_target, Fallback::zero_denominator);
        capacity_ratio = Rational(cap_others, cap_i);
    }
    return apply_factor(capacity_ratio * Rational(stake_i, stake_others), pos_target);
}

DifficultyState baseline_adjust(const BaselineParams& params, const DifficultyState& state) {
    if (params.model == BaselineModel::two_hop) {
        throw Error(ErrorCode::NotApplicable, "the 2-hop model has no difficulty rule");
    }
    if (params.t <= 0 || params.mu <= 0) throw Error(ErrorCode::BadParameter, "t and mu must be positive");
    if (params.t_r < 0 || params.mu_r < 0) throw Error(ErrorCode::BadParameter, "t_r and mu_r must be non-negative");
    if (params.e <= 0 || params.e > 1) throw Error(ErrorCode::BadParameter, "E must lie in (0, 1]");

    DifficultyState next = state;
    next.epoch = state.epoch + 1;
    next.clamped = false;
    if (params.model == BaselineModel::nakamoto) {
        const ClampedTarget c = clamp_target(floor_mul(params.t_r / params.t, state.pow_target));
        next.pow_target = c.value;
        next.clamped = c.clamped;
        return next;
    }
    if (params.mu_r == 0) throw Error(ErrorCode::BadParameter, "mu_r must be positive for TwinsCoin");
    const Rational pow_factor = (params.mu * params.t_r) / (params.mu_r * params.t * params.e);
    const Rational pos_factor = (params.mu_r * params.e) / params.mu;
    const ClampedTarget pw = clamp_target(floor_mul(pow_factor, state.pow_target));
    const ClampedTarget ps = clamp_target(floor_mul(pos_factor, state.pos_target));
    next.pow_target = pw.value;
    next.pos_target = ps.value;
    next.clamped = pw.clamped || ps.clamped;
    return next;
}

} // namespace reinshard::consensus
