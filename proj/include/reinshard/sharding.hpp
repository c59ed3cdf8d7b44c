#pragma once

#include "reinshard/chain.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string_view>
#include <vector>

namespace reinshard::sharding {

enum class Mode { single_block, multi_block };

std::string_view to_string(Mode m) noexcept;
Mode parse_mode(std::string_view s);

struct Placement {
    Digest block;
    NodeId owner;
    PairId pair;

    friend auto operator<=>(const Placement&, const Placement&) = default;
};

struct Shard {
    Digest id;
    Digest anchor; // pair id (single_block) or external node id (multi_block)
    std::set<NodeId> members;
    std::vector<Placement> blocks; // sorted by block id
};

/// Shard id = H(anchor, sorted member ids).
Digest shard_id(const Digest& anchor, const std::set<NodeId>& members);

/// single_block: one shard per pair holding its PoS blocks; an external node
/// placing blocks in two pairs violates the scenario. multi_block: one shard
/// per external node q holding q's blocks, whose members are q and every other
/// owner with a block in a pair where q placed one. Throws EmptyChain.
std::vector<Shard> build_shards(const chain::GlobalChain& chain, Mode mode);

/// Ids of every shard that lists `node` as a member. Throws UnknownNode.
std::vector<Digest> shard_lookup(const std::vector<Shard>& shards, const NodeId& node);

/// Stake deltas: +1 per appended block. In multi_block, each pair's leader
/// reward is split evenly across that pair's block owners; the remainder goes
/// one unit at a time to the lowest digests.
std::map<NodeId, std::uint64_t> credit_shard_rewards(const std::vector<Shard>& shards, Mode mode,
                                                     const std::map<PairId, std::uint64_t>& leader_rewards = {});

} // namespace reinshard::sharding
