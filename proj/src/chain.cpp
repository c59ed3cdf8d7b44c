#include "reinshard/chain.hpp"

#include "reinshard/error.hpp"

#include <algorithm>
#include <set>

namespace reinshard::chain {

Bytes PowBlock::encode() const {
    FieldEncoder e;
    e.digest(prev_pow_hash).digest(pos_head_hash).u64(nonce).bytes(encode_rational(pseudo_rate)).boolean(is_pseudo)
        .digest(miner);
    return e.take();
}

Digest PowBlock::compute_id() const { return FieldHasher(tag::pow_block).bytes(encode()).finish(); }

Bytes PosBlock::encode() const {
    FieldEncoder e;
    e.digest(parent_pair).digest(parent_pos_hash).digest(prev_pos_hash).bytes(verification_key);
    e.digest(vdf.input).digest(vdf.output).u64(vdf.proof.iterations).u64(vdf.proof.checkpoints.size());
    for (const Digest& c : vdf.proof.checkpoints) e.digest(c);
    e.digest(vdf.proof.commitment).digest(owner).u64(stake_delta);
    return e.take();
}

Digest PosBlock::compute_id() const { return FieldHasher(tag::pos_block).bytes(encode()).finish(); }

bool validate_chain_pair(const ChainPair& pair, const StakeBounds& bounds) {
    if (pair.sub_chain.empty()) return false;
    if (pair.k_i() > pair.k_max) return false;
    if (pair.stakes < bounds.s_min || pair.stakes > bounds.s_max) return false;
    if (pair.pow.compute_id() != pair.pow.id) return false;

    Digest prev = pair.pow.id;
    for (const PosBlock& b : pair.sub_chain) {
        if (b.parent_pair != pair.pow.id) return false;
        if (b.parent_pos_hash != pair.pow.pos_head_hash) return false;
        if (b.prev_pos_hash != prev) return false;
        if (b.vdf.input != vdf::derive_input(b.parent_pos_hash, b.prev_pos_hash)) return false;
        if (b.compute_id() != b.id) return false;
        if (!vdf::verify(b.verification_key, b.vdf)) return false;
        prev = b.id;
    }
    return true;
}

PosBlock make_pos_block(const ChainPair& pair, const vdf::VdfParams& params, const NodeId& owner,
                        std::uint64_t stake_delta) {
    PosBlock b;
    b.parent_pair = pair.pow.id;
    b.parent_pos_hash = pair.pow.pos_head_hash;
    b.prev_pos_hash = pair.tail_hash();
    b.verification_key = params.verify_key;
    b.vdf = vdf::eval(params, vdf::derive_input(b.parent_pos_hash, b.prev_pos_hash));
    b.owner = owner;
    b.stake_delta = stake_delta;
    b.seal();
    return b;
}

GlobalChain::GlobalChain(std::vector<ChainPair> pairs, StakeBounds bounds, std::uint64_t pending_incoming)
    : pairs_(std::move(pairs)), bounds_(bounds), pending_incoming_(pending_incoming) {}

std::uint64_t GlobalChain::pseudo_count() const noexcept {
    return static_cast<std::uint64_t>(
        std::count_if(pairs_.begin(), pairs_.end(), [](const ChainPair& p) { return p.pow.is_pseudo; }));
}

std::uint64_t GlobalChain::pos_sum() const noexcept {
    std::uint64_t n = 0;
    for (const ChainPair& p : pairs_) n += p.k_i();
    return n;
}

std::vector<PairId> GlobalChain::pseudo_pairs() const {
    std::vector<PairId> out;
    for (const ChainPair& p : pairs_) {
        if (p.pow.is_pseudo) out.push_back(p.id());
    }
    return out;
}

std::optional<std::size_t> GlobalChain::find(const PairId& id) const noexcept {
    for (std::size_t i = 0; i < pairs_.size(); ++i) {
        if (pairs_[i].id() == id) return i;
    }
    return std::nullopt;
}

const ChainPair& GlobalChain::pair(const PairId& id) const {
    const auto idx = find(id);
    if (!idx) throw Error(ErrorCode::UnknownPair, "no pair " + id.hex());
    return pairs_[*idx];
}

void GlobalChain::add_pair(ChainPair pair) {
    if (find(pair.id())) throw Error(ErrorCode::InvariantBroken, "duplicate PoW block " + pair.id().hex());
    if (pair.sub_chain.empty() && !pair.pow.is_pseudo) {
        throw Error(ErrorCode::InvariantBroken, "a non-pseudo pair needs at least one PoS block");
    }
    pairs_.push_back(std::move(pair));
    try {
        check_invariants();
    } catch (...) {
        pairs_.pop_back();
        throw;
    }
}

void GlobalChain::append_pos_block(const PairId& pair_id, PosBlock block, std::uint64_t position) {
    const auto idx = find(pair_id);
    if (!idx) throw Error(ErrorCode::UnknownPair, "no pair " + pair_id.hex());
    ChainPair& p = pairs_[*idx];
    if (p.k_i() >= p.k_max) {
        throw Error(ErrorCode::CapacityExceeded, "sub-chain already holds K_max=" + std::to_string(p.k_max));
    }
    if (position != p.k_i()) {
        throw Error(ErrorCode::LinkMismatch, "position " + std::to_string(position) + " is not the tail");
    }
    if (block.prev_pos_hash != p.tail_hash()) throw Error(ErrorCode::LinkMismatch, "h_g does not match the tail");
    if (block.parent_pair != p.id()) throw Error(ErrorCode::LinkMismatch, "parent pair mismatch");
    for (const ChainPair& other : pairs_) {
        for (const PosBlock& b : other.sub_chain) {
            if (b.id == block.id) throw Error(ErrorCode::InvariantBroken, "PoS block already placed");
        }
    }
    p.sub_chain.push_back(std::move(block));
    check_invariants();
}

PairId GlobalChain::set_pseudo(const PairId& pair_id, bool pseudo) {
    const auto idx = find(pair_id);
    if (!idx) throw Error(ErrorCode::UnknownPair, "no pair " + pair_id.hex());
    ChainPair& p = pairs_[*idx];
    if (!p.sub_chain.empty()) {
        throw Error(ErrorCode::IllegalState, "pseudo status is fixed once the sub-chain is populated");
    }
    const PowBlock before = p.pow;
    p.pow.is_pseudo = pseudo;
    p.pow.seal();
    try {
        check_invariants();
    } catch (...) {
        p.pow = before;
        throw;
    }
    return p.id();
}

void GlobalChain::check_invariants() const {
    const std::uint64_t m = pow_count();
    const std::uint64_t m_prime = pseudo_count();
    if (m > 0 && m_prime >= m) throw Error(ErrorCode::InvariantBroken, "pseudo pairs must be a proper subset");
    const std::uint64_t n = pos_sum();
    if (n < m - m_prime) {
        throw Error(ErrorCode::InvariantBroken,
                    "N=" + std::to_string(n) + " below N_min=" + std::to_string(m - m_prime));
    }
    std::set<Digest> seen;
    for (const ChainPair& p : pairs_) {
        for (const PosBlock& b : p.sub_chain) {
            if (!seen.insert(b.id).second) throw Error(ErrorCode::InvariantBroken, "PoS block in two positions");
        }
    }
}

std::uint64_t total_pos_count(const GlobalChain& chain) {
    const std::uint64_t n = chain.pos_sum();
    const std::uint64_t n_min = chain.pow_count() - chain.pseudo_count();
    if (n < n_min) {
        throw Error(ErrorCode::InvariantBroken, "N=" + std::to_string(n) + " below N_min=" + std::to_string(n_min));
    }
    return n;
}

GlobalChain append_pos_block(const GlobalChain& chain, const PairId& pair_id, PosBlock block, std::uint64_t position) {
    GlobalChain next = chain;
    next.append_pos_block(pair_id, std::move(block), position);
    return next;
}

PairId best_valid_pair(const GlobalChain& chain) {
    const ChainPair* best = nullptr;
    for (const ChainPair& p : chain.pairs()) {
        if (!validate_chain_pair(p, chain.bounds())) continue;
        if (best == nullptr || p.k_i() > best->k_i() || (p.k_i() == best->k_i() && p.id() < best->id())) {
            best = &p;
        }
    }
    if (best == nullptr) throw Error(ErrorCode::NoValidPair, "no valid chain-pair");
    return best->id();
}

} // namespace reinshard::chain
