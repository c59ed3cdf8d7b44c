#include "reinshard/shard_bias.hpp"

#include "reinshard/allocation.hpp"
#include "reinshard/chain.hpp"
#include "reinshard/error.hpp"
#include "reinshard/protocol_sim.hpp"
#include "reinshard/sharding.hpp"

#include <boost/math/distributions/chi_squared.hpp>

namespace reinshard::scenarios {

namespace {

const BigInt& bias_pos_target() {
    static const BigInt t = BigInt(1) << 254;
    return t;
}

constexpr sim::SimTime bias_tau = sim::seconds(3);
const vdf::CostModel bias_cost{10'000};

} // namespace

std::int64_t adversary_shard_index(const ShardBiasConfig& cfg, std::uint64_t seed) {
    if (cfg.pairs < 2) throw Error(ErrorCode::BadParameter, "need at least two pairs");
    const vdf::VdfParams genesis = vdf::setup(128, bias_tau, bias_pos_target(), seed, bias_cost);
    std::vector<chain::ChainPair> pairs;
    std::vector<NodeId> owners;
    for (std::uint64_t i = 0; i < cfg.pairs; ++i) {
        const NodeId owner = node_id("owner-" + std::to_string(i));
        chain::ChainPair p;
        p.pow.prev_pow_hash = pairs.empty() ? Digest{} : pairs.back().id();
        p.pow.pseudo_rate = Rational(1, 10);
        p.pow.miner = owner;
        p.pow.seal();
        p.stakes = 10;
        p.sub_chain.push_back(chain::make_pos_block(p, genesis, owner));
        owners.push_back(owner);
        pairs.push_back(std::move(p));
    }
    chain::GlobalChain g(pairs);
    const NodeId adversary = node_id("adversary");

    std::vector<chain::PowBlock> pows;
    std::vector<Rational> rewards(cfg.pairs, Rational(2));
    for (const chain::ChainPair& p : g.pairs()) pows.push_back(p.pow);

    for (std::uint64_t r = 0; r < cfg.max_rounds; ++r) {
        std::vector<Bytes> vks;
        for (const NodeId& o : owners) {
            vks.push_back(protocol::round_verify_key(seed, r, o, bias_tau, bias_pos_target(), bias_cost));
        }
        const protocol::Election e = protocol::elect_leader(pows, vks, rewards, bias_pos_target());
        if (!e.winner) continue;

        std::vector<allocation::ValidatorState> vs;
        for (std::uint64_t i = 0; i < cfg.pairs; ++i) {
            allocation::ValidatorState v;
            v.pair = g.pairs()[i].id();
            v.reward = rewards[i];
            allocation::PseudoChainState c;
            c.id = v.pair;
            c.strength = g.pairs()[i].k_i();
            c.owner.storage_avail = 8;
            c.owner.pseudo_used = 1;
            c.owner.stakes = 10;
            v.chains.push_back(c);
            vs.push_back(std::move(v));
        }
        const allocation::AllocationDecision d = allocation::allocate_pos_block(vs, *e.winner, allocation::QTable{});
        if (d.outcome == allocation::Outcome::waited) continue;

        const PairId target = *d.target_pair;
        const vdf::VdfParams params = vdf::setup(128, bias_tau, bias_pos_target(), seed + r + 1, bias_cost);
        g.append_pos_block(target, chain::make_pos_block(g.pair(target), params, adversary),
                           g.pair(target).k_i());
        const std::vector<sharding::Shard> shards = sharding::build_shards(g, sharding::Mode::single_block);
        const std::vector<Digest> mine = sharding::shard_lookup(shards, adversary);
        for (const sharding::Shard& s : shards) {
            if (s.id != mine.front()) continue;
            for (std::uint64_t i = 0; i < cfg.pairs; ++i) {
                if (g.pairs()[i].id() == s.anchor) return static_cast<std::int64_t>(i);
            }
        }
        throw Error(ErrorCode::InvariantBroken, "adversary shard has no anchor pair");
    }
    return -1;
}

double chi_square_statistic(const std::vector<std::uint64_t>& counts) {
    if (counts.size() < 2) throw Error(ErrorCode::BadParameter, "need at least two categories");
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    if (total == 0) throw Error(ErrorCode::BadParameter, "no observations");
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double x = 0.0;
    for (std::uint64_t c : counts) {
        const double d = static_cast<double>(c) - expected;
        x += d * d / expected;
    }
    return x;
}

double chi_square_p_value(double statistic, std::uint64_t df) {
    if (df == 0) throw Error(ErrorCode::BadParameter, "zero degrees of freedom");
    const boost::math::chi_squared dist(static_cast<double>(df));
    return boost::math::cdf(boost::math::complement(dist, statistic));
}

ShardBiasReport run_shard_bias(const ShardBiasConfig& cfg) {
    ShardBiasReport r;
    r.counts.assign(cfg.pairs, 0);
    for (std::uint64_t s = cfg.first_seed; s < cfg.first_seed + cfg.seeds; ++s) {
        const std::int64_t idx = adversary_shard_index(cfg, s);
        if (idx < 0) {
            ++r.unplaced;
            continue;
        }
        ++r.counts[static_cast<std::size_t>(idx)];
        ++r.placed;
    }
    r.df = cfg.pairs - 1;
    if (r.placed > 0) {
        r.chi2 = chi_square_statistic(r.counts);
        r.p_value = chi_square_p_value(r.chi2, r.df);
    }
    r.pass = r.placed > 0 && r.p_value > 0.01;
    return r;
}

} // namespace reinshard::scenarios
