#pragma once

#include "reinshard/chain.hpp"
#include "reinshard/crypto.hpp"
#include "reinshard/numeric.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace reinshard::consensus {

/// Z(h_rho, h_s): second, domain-separated SHA-256 instance.
Digest puzzle_z(const Digest& prev_pow_hash, const Digest& pos_head_hash);

/// H(encode(alpha_m), Z(h_rho, h_s), rho).
Digest pow_hash(const Rational& alpha_m, const Digest& prev_pow_hash, const Digest& pos_head_hash,
                std::uint64_t nonce);

bool check_pow_solution(const Rational& alpha_m, const Digest& prev_pow_hash, const Digest& pos_head_hash,
                        std::uint64_t nonce, const BigInt& target);

/// Bounded nonce scan starting at `first_nonce`.
std::optional<std::uint64_t> mine(const Rational& alpha_m, const Digest& prev_pow_hash, const Digest& pos_head_hash,
                                  const BigInt& target, std::uint64_t first_nonce, std::uint64_t max_attempts);

/// H~(encode(pow_block), v_k).
Digest leader_hash(const chain::PowBlock& pow_block, const Bytes& verify_key);

/// min(floor(R' * T~), 2^256 - 1) for reporting; the predicate itself compares exactly.
BigInt leader_threshold(const Rational& reward, const BigInt& pos_target);

bool check_leader_ticket(const chain::PowBlock& pow_block, const Bytes& verify_key, const Rational& reward,
                         const BigInt& pos_target);

enum class Fallback { none, lone_validator, zero_denominator };
std::string_view to_string(Fallback f) noexcept;

struct DifficultyResult {
    BigInt target;
    bool clamped = false;
    Fallback fallback = Fallback::none;
    Rational factor{1};
};

struct PowPairInput {
    std::uint64_t eta_x = 0;
    Rational reward{0}; // R'
};

struct PosPairInput {
    std::uint64_t extra_capacity = 0; // K^(A)
    std::uint64_t stakes = 0;         // S
};

/// T_{r+1} = (eta_x,i / sum_{j!=i} eta_x,j) * (R'_i / sum_{j!=i} R'_j) * T_r.
DifficultyResult adjust_pow_difficulty(std::span<const PowPairInput> pairs, std::size_t winner,
                                       const BigInt& pow_target);

/// Sub-chain rule. When sum_{j!=i} K^(A)_j >= K^(R) the capacity ratio is
/// K^(A)_i / sum; otherwise it is inverted.
DifficultyResult adjust_pos_difficulty(std::span<const PosPairInput> pairs, std::size_t winner,
                                       std::uint64_t incoming, const BigInt& pos_target);

enum class BaselineModel { nakamoto, two_hop, twinscoin };

struct BaselineParams {
    BaselineModel model = BaselineModel::nakamoto;
    Rational t{1};   // expected epoch time
    Rational t_r{1}; // actual epoch time
    Rational mu{1};
    Rational mu_r{1};
    std::uint64_t coins = 0;
    Rational e{1};
    Digest h_a;
};

struct DifficultyState {
    BigInt pow_target;
    BigInt pos_target;
    std::uint64_t epoch = 0;
    bool clamped = false;
};

DifficultyState baseline_adjust(const BaselineParams& params, const DifficultyState& state);

} // namespace reinshard::consensus
