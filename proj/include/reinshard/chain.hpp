#pragma once

#include "reinshard/crypto.hpp"
#include "reinshard/numeric.hpp"
#include "reinshard/vdf.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace reinshard::chain {

struct PowBlock {
    Digest id;
    Digest prev_pow_hash; // h_rho
    Digest pos_head_hash; // h_s
    std::uint64_t nonce = 0;
    Rational pseudo_rate{0}; // alpha_m, pseudo pairs per round
    bool is_pseudo = false;
    NodeId miner;

    /// Canonical encoding of every field except the id.
    Bytes encode() const;
    Digest compute_id() const;
    void seal() { id = compute_id(); }
};

struct PosBlock {
    Digest id;
    PairId parent_pair;
    Digest parent_pos_hash; // h_q
    Digest prev_pos_hash;   // h_g
    Bytes verification_key; // v_k
    vdf::VdfArtifact vdf;
    NodeId owner;
    std::uint64_t stake_delta = 0;

    Bytes encode() const;
    Digest compute_id() const;
    void seal() { id = compute_id(); }
};

struct StakeBounds {
    std::uint64_t s_min = 1;
    std::uint64_t s_max = std::uint64_t{1} << 32;
};

inline constexpr std::uint64_t default_k_max = 8;

/// One PoW block and the PoS sub-chain hanging off it.
struct ChainPair {
    PowBlock pow;
    std::vector<PosBlock> sub_chain;
    std::uint64_t pseudo_ids = 0; // eta_x
    std::uint64_t k_max = default_k_max;
    std::uint64_t stakes = 0; // S_i

    const PairId& id() const noexcept { return pow.id; }
    std::uint64_t k_i() const noexcept { return sub_chain.size(); }
    /// Hash the next PoS block must link to via h_g.
    const Digest& tail_hash() const noexcept { return sub_chain.empty() ? pow.id : sub_chain.back().id; }
};

/// Structural validity of a pair: non-empty sub-chain within K_max, stakes in
/// bounds, recomputed ids, h_q/h_g links, VDF input binding and VDF proof.
bool validate_chain_pair(const ChainPair& pair, const StakeBounds& bounds);

/// Builds a sealed PoS block that links onto `pair`'s current tail, running a
/// VDF evaluation over the linked input.
PosBlock make_pos_block(const ChainPair& pair, const vdf::VdfParams& params, const NodeId& owner,
                        std::uint64_t stake_delta = 1);

/// The dual structure B_G = <C_W, C_S>.
class GlobalChain {
public:
    GlobalChain() = default;
    /// Raw construction (snapshots, fixtures). Does not validate.
    explicit GlobalChain(std::vector<ChainPair> pairs, StakeBounds bounds = {}, std::uint64_t pending_incoming = 0);

    const std::vector<ChainPair>& pairs() const noexcept { return pairs_; }
    const StakeBounds& bounds() const noexcept { return bounds_; }
    std::uint64_t pending_incoming() const noexcept { return pending_incoming_; } // K_R
    void set_pending_incoming(std::uint64_t k) noexcept { pending_incoming_ = k; }

    std::uint64_t pow_count() const noexcept { return pairs_.size(); } // M
    std::uint64_t pseudo_count() const noexcept;                       // M'
    std::uint64_t pos_sum() const noexcept;                            // sum K_i, unchecked
    std::vector<PairId> pseudo_pairs() const;

    std::optional<std::size_t> find(const PairId& id) const noexcept;
    const ChainPair& pair(const PairId& id) const;

    /// Adds a pair. Non-pseudo pairs must arrive with their first PoS block.
    void add_pair(ChainPair pair);
    /// Appends at `position`, which must equal the current sub-chain length.
    void append_pos_block(const PairId& pair_id, PosBlock block, std::uint64_t position);
    /// Changes the pseudo flag of a pair whose sub-chain is still empty. The
    /// flag is part of the hashed PoW payload, so the pair id changes.
    PairId set_pseudo(const PairId& pair_id, bool pseudo);

    /// Throws InvariantBroken if N != sum K_i, N < M - M', a PoS id repeats, or
    /// the pseudo set is not a proper subset.
    void check_invariants() const;

private:
    std::vector<ChainPair> pairs_;
    StakeBounds bounds_;
    std::uint64_t pending_incoming_ = 0;
};

/// N = sum K_i, checked against N_min = M - M'.
std::uint64_t total_pos_count(const GlobalChain& chain);

/// Value-semantics variant of GlobalChain::append_pos_block.
GlobalChain append_pos_block(const GlobalChain& chain, const PairId& pair_id, PosBlock block, std::uint64_t position);

/// Valid pair with the longest sub-chain; ties go to the lowest PoW digest.
PairId best_valid_pair(const GlobalChain& chain);

} // namespace reinshard::chain
