#pragma once

#include "reinshard/allocation.hpp"
#include "reinshard/chain.hpp"
#include "reinshard/sharding.hpp"
#include "reinshard/vdf.hpp"

#include <nlohmann/json.hpp>

#include <vector>

// JSON forms of chain snapshots, VDF artifacts, shard maps and Q-tables.
// Digests are lowercase hex; rationals are "p/q" strings. Readers throw
// MalformedBlock for a digest of the wrong width and ParseError otherwise.

namespace reinshard::io {

using nlohmann::json;

inline constexpr int schema_version = 1;

json to_json(const vdf::VdfArtifact& a);
vdf::VdfArtifact artifact_from_json(const json& j);

json to_json(const chain::PowBlock& b);
chain::PowBlock pow_block_from_json(const json& j);

json to_json(const chain::PosBlock& b);
chain::PosBlock pos_block_from_json(const json& j);

/// {"schema_version", "bounds", "pending_incoming", "pairs": [{"pow", "k_i", "eta_x", "k_max", "stakes", "sub_chain"}]}
json to_json(const chain::GlobalChain& g);
/// Rebuilds the snapshot and checks every recorded id and k_i against the content.
chain::GlobalChain chain_from_json(const json& j);

json shard_map_json(const std::vector<sharding::Shard>& shards);

json to_json(const allocation::QTable& q);

} // namespace reinshard::io
