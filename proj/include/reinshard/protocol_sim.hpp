#pragma once

#include "reinshard/chain.hpp"
#include "reinshard/consensus.hpp"
#include "reinshard/crypto.hpp"
#include "reinshard/numeric.hpp"
#include "reinshard/sharding.hpp"
#include "reinshard/sim.hpp"
#include "reinshard/train_hotel.hpp"
#include "reinshard/vdf.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Round-based run of the dual-chain protocol: leader tickets, Algorithm 1
// placement, VDF-sealed PoS blocks, broadcast and per-node adoption. The
// resulting trace feeds the security property checkers.

namespace reinshard::protocol {

using sim::SimTime;

enum class Feedback { logged_only, applied };

std::string_view to_string(Feedback f) noexcept;
Feedback parse_feedback(std::string_view s);

struct ProtocolConfig {
    std::uint64_t honest_nodes = 5;
    std::uint64_t adversarial_nodes = 0;
    std::uint64_t rounds = 100;
    SimTime round_time = sim::seconds(5); // must exceed t_E + Gamma + t_V
    SimTime t_eval = sim::seconds(3);
    SimTime t_verify = sim::seconds(1);
    SimTime tau_prime = sim::seconds(2.5);
    sim::LatencyModel latency = sim::LatencyModel::constant(sim::seconds(0.1));
    std::uint64_t k_max = 8;
    std::uint64_t ka_cap = 8; // K^(A) of every owner: storage sized for this many blocks
    std::uint64_t stakes = 10;
    Rational reward{2};                                   // R', equal for all nodes
    BigInt pos_target = BigInt(1) << 254;                 // T~
    BigInt pow_target = BigInt(1) << 252;                 // T
    std::uint64_t epoch_blocks = 16;
    Feedback feedback = Feedback::logged_only;
    vdf::CostModel cost{10'000}; // keeps zeta small enough for many seeds
    std::uint64_t mine_attempts = 1 << 20;
    std::uint64_t sessions = 8; // inter-shard sessions run over the final shards
    sharding::Mode shard_mode = sharding::Mode::multi_block;
    bool keep_trace = true;
};

/// Validates ranges; throws BadParameter.
void validate(const ProtocolConfig& cfg);

struct NodeInfo {
    NodeId id;
    bool honest = true;
};

struct BlockMeta {
    Digest id;
    PairId pair;
    NodeId owner;
    std::uint64_t round = 0;
    bool adversarial = false;
    bool opened_pair = false; // first block of a freshly mined pair
};

/// View of one node at a round start.
struct Sample {
    std::uint64_t round = 0;
    SimTime at = 0;
    std::size_t node = 0;
    std::uint64_t length = 0;       // N of the adopted global chain
    std::uint64_t reported_n = 0;   // position carried by the last appended block + 1
    std::vector<Digest> chain;      // adoption order
};

struct RoundInfo {
    std::uint64_t round = 0;
    std::optional<std::size_t> leader;
    std::uint64_t eligible = 0;
    std::uint64_t honest_blocks = 0;
    std::uint64_t adversarial_blocks = 0;
    std::uint64_t pending = 0; // K_R after the round
    std::string branch;
};

struct DifficultyLog {
    std::uint64_t epoch = 0;
    std::uint64_t blocks = 0;
    std::string pow_factor;
    std::string pos_factor;
    std::string pow_fallback;
    std::string pos_fallback;
    bool applied = false;
    std::string pow_target; // hex after the epoch
    std::string pos_target;
};

struct ProtocolTrace {
    std::uint64_t seed = 0;
    std::uint64_t k_max = 0;
    std::uint64_t ka_cap = 0;
    std::vector<NodeInfo> nodes;
    std::vector<Sample> samples;
    std::map<Digest, BlockMeta> blocks;
    std::vector<RoundInfo> rounds;
    std::vector<scenarios::WaitRecord> waits;
    std::vector<DifficultyLog> difficulty;
    chain::GlobalChain final_chain;     // node 0's view after the last round
    std::vector<sharding::Shard> shards; // built from final_chain
    std::uint64_t mined_pairs = 0;
    std::uint64_t rejected_deliveries = 0;
    Digest digest;
    std::uint64_t trace_lines = 0;
    std::vector<std::string> trace;

    /// Blocks produced in `round`, capped at k_max.
    std::uint64_t produced(std::uint64_t round) const;
    double adversarial_share() const; // Upsilon under equal rewards
};

ProtocolTrace run_protocol(const ProtocolConfig& cfg, std::uint64_t seed);

/// Per-round, per-node v_k: verification key of a fresh VDF setup.
Bytes round_verify_key(std::uint64_t seed, std::uint64_t round, const NodeId& node, SimTime tau,
                       const BigInt& pos_target, const vdf::CostModel& cost);

/// Eligible nodes are those whose leader ticket beats R'_k * T~. Among them the
/// winner is the minimum of -ln(u_k) / R'_k with u_k = hash_k / threshold_k,
/// an exponential race, so win chances are proportional to R'.
struct Election {
    std::optional<std::size_t> winner;
    std::vector<std::size_t> eligible;
};

Election elect_leader(std::span<const chain::PowBlock> pows, std::span<const Bytes> verify_keys,
                      std::span<const Rational> rewards, const BigInt& pos_target);

} // namespace reinshard::protocol
