#pragma once

#include "reinshard/chain.hpp"
#include "reinshard/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <string>

namespace testutil {

using namespace reinshard;

inline vdf::VdfParams small_vdf(std::uint64_t iterations = 9) {
    vdf::VdfParams p;
    p.iterations = iterations;
    p.verify_key = {0x42};
    return p;
}

inline chain::PowBlock pow_block(const std::string& miner, const Digest& prev = {}, bool pseudo = false) {
    chain::PowBlock b;
    b.prev_pow_hash = prev;
    b.pos_head_hash = node_id("head-" + miner);
    b.miner = node_id(miner);
    b.pseudo_rate = Rational(1, 10);
    b.is_pseudo = pseudo;
    b.seal();
    return b;
}

/// Valid pair mined by `miner` with `blocks` PoS blocks owned by `owner`.
inline chain::ChainPair make_pair(const std::string& miner, std::uint64_t blocks, const std::string& owner = "",
                                  std::uint64_t k_max = 8, const Digest& prev = {}) {
    chain::ChainPair p;
    p.pow = pow_block(miner, prev);
    p.k_max = k_max;
    p.stakes = 1;
    for (std::uint64_t i = 0; i < blocks; ++i) {
        p.sub_chain.push_back(chain::make_pos_block(p, small_vdf(), node_id(owner.empty() ? miner : owner)));
    }
    return p;
}

inline nlohmann::json golden() {
    std::ifstream in(REINSHARD_GOLDEN_VECTORS);
    return nlohmann::json::parse(in);
}

template <class F>
ErrorCode error_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    throw std::runtime_error("expected an Error");
}

} // namespace testutil
