#include "reinshard/sharding.hpp"

#include "reinshard/error.hpp"

#include <algorithm>

namespace reinshard::sharding {

std::string_view to_string(Mode m) noexcept { return m == Mode::single_block ? "single" : "multi"; }

Mode parse_mode(std::string_view s) {
    if (s == "single" || s == "single_block") return Mode::single_block;
    if (s == "multi" || s == "multi_block") return Mode::multi_block;
    throw Error(ErrorCode::ParseError, "unknown sharding mode '" + std::string(s) + "'");
}

Digest shard_id(const Digest& anchor, const std::set<NodeId>& members) {
    FieldHasher h(tag::shard_id);
    h.digest(anchor).u64(members.size());
    for (const NodeId& m : members) h.digest(m); // std::set iterates in digest order
    return h.finish();
}

namespace {

Shard make_shard(const Digest& anchor, std::set<NodeId> members, std::vector<Placement> blocks) {
    std::sort(blocks.begin(), blocks.end());
    Shard s;
    s.anchor = anchor;
    s.members = std::move(members);
    s.blocks = std::move(blocks);
    s.id = shard_id(s.anchor, s.members);
    return s;
}

} // namespace

std::vector<Shard> build_shards(const chain::GlobalChain& chain, Mode mode) {
    std::vector<Placement> all;
    for (const chain::ChainPair& p : chain.pairs()) {
        for (const chain::PosBlock& b : p.sub_chain) all.push_back({b.id, b.owner, p.id()});
    }
    if (all.empty()) throw Error(ErrorCode::EmptyChain, "no external node has placed a PoS block");

    std::vector<Shard> out;
    if (mode == Mode::single_block) {
        std::map<NodeId, PairId> home;
        for (const Placement& pl : all) {
            const auto [it, fresh] = home.emplace(pl.owner, pl.pair);
            if (!fresh && it->second != pl.pair) {
                throw Error(ErrorCode::ScenarioViolation,
                            "node " + pl.owner.hex() + " placed blocks under two pairs in single-block mode");
            }
        }
        for (const chain::ChainPair& p : chain.pairs()) {
            std::set<NodeId> members;
            std::vector<Placement> blocks;
            for (const Placement& pl : all) {
                if (pl.pair != p.id()) continue;
                members.insert(pl.owner);
                blocks.push_back(pl);
            }
            if (!blocks.empty()) out.push_back(make_shard(p.id(), std::move(members), std::move(blocks)));
        }
        return out;
    }

    std::map<NodeId, std::set<PairId>> locations;
    std::map<PairId, std::set<NodeId>> owners;
    for (const Placement& pl : all) {
        locations[pl.owner].insert(pl.pair);
        owners[pl.pair].insert(pl.owner);
    }
    for (const auto& [node, pairs] : locations) {
        std::set<NodeId> members{node};
        for (const PairId& p : pairs) members.insert(owners[p].begin(), owners[p].end());
        std::vector<Placement> blocks;
        for (const Placement& pl : all) {
            if (pl.owner == node) blocks.push_back(pl);
        }
        out.push_back(make_shard(node, std::move(members), std::move(blocks)));
    }
    return out;
}

std::vector<Digest> shard_lookup(const std::vector<Shard>& shards, const NodeId& node) {
    std::vector<Digest> out;
    for (const Shard& s : shards) {
        if (s.members.count(node) > 0) out.push_back(s.id);
    }
    if (out.empty()) throw Error(ErrorCode::UnknownNode, "node " + node.hex() + " is in no shard");
    return out;
}

std::map<NodeId, std::uint64_t> credit_shard_rewards(const std::vector<Shard>& shards, Mode mode,
                                                     const std::map<PairId, std::uint64_t>& leader_rewards) {
    std::map<NodeId, std::uint64_t> delta;
    std::map<PairId, std::set<NodeId>> owners;
    std::set<Digest> seen;
    for (const Shard& s : shards) {
        for (const NodeId& m : s.members) delta.emplace(m, 0);
        for (const Placement& pl : s.blocks) {
            if (!seen.insert(pl.block).second) continue;
            delta[pl.owner] += 1;
            owners[pl.pair].insert(pl.owner);
        }
    }
    if (mode == Mode::multi_block) {
        for (const auto& [pair, reward] : leader_rewards) {
            const auto it = owners.find(pair);
            if (it == owners.end() || reward == 0) continue;
            const std::uint64_t n = it->second.size();
            const std::uint64_t share = reward / n;
            std::uint64_t remainder = reward % n;
            for (const NodeId& o : it->second) {
                delta[o] += share;
                if (remainder > 0) {
                    delta[o] += 1;
                    --remainder;
                }
            }
        }
    }
    return delta;
}

} // namespace reinshard::sharding
