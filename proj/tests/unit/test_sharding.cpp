#include "helpers.hpp"

#include "reinshard/shard_bias.hpp"
#include "reinshard/sharding.hpp"

#include <catch_amalgamated.hpp>

#include <openssl/sha.h>

#include <random>

using namespace reinshard;
using namespace reinshard::sharding;
using testutil::error_of;

namespace {

chain::ChainPair pair_with(const std::string& miner, const std::vector<std::string>& owners) {
    chain::ChainPair p;
    p.pow = testutil::pow_block(miner);
    p.k_max = 16;
    p.stakes = 1;
    for (const std::string& o : owners) p.sub_chain.push_back(chain::make_pos_block(p, testutil::small_vdf(), node_id(o)));
    return p;
}

Digest raw_shard_id(const Digest& anchor, const std::set<NodeId>& members) {
    std::vector<unsigned char> pre{0x21};
    auto field = [&](const unsigned char* d, std::size_t n) {
        for (int s = 24; s >= 0; s -= 8) pre.push_back(static_cast<unsigned char>(n >> s));
        pre.insert(pre.end(), d, d + n);
    };
    field(anchor.bytes.data(), 32);
    unsigned char count[8];
    for (int i = 0; i < 8; ++i) count[i] = static_cast<unsigned char>(members.size() >> (56 - 8 * i));
    field(count, 8);
    for (const NodeId& m : members) field(m.bytes.data(), 32);
    Digest d;
    SHA256(pre.data(), pre.size(), d.bytes.data());
    return d;
}

std::size_t block_total(const std::vector<Shard>& shards) {
    std::size_t n = 0;
    for (const Shard& s : shards) n += s.blocks.size();
    return n;
}

} // namespace

TEST_CASE("mode names", "[sharding]") {
    CHECK(to_string(Mode::single_block) == "single");
    CHECK(parse_mode("multi_block") == Mode::multi_block);
    CHECK(parse_mode("single") == Mode::single_block);
    CHECK(error_of([] { (void)parse_mode("both"); }) == ErrorCode::ParseError);
}

TEST_CASE("shard_id matches a hand-built preimage", "[sharding]") {
    const std::set<NodeId> members{node_id("a"), node_id("b"), node_id("c")};
    CHECK(shard_id(node_id("anchor"), members) == raw_shard_id(node_id("anchor"), members));
    CHECK(shard_id(node_id("anchor"), {}) == raw_shard_id(node_id("anchor"), {}));
    CHECK(shard_id(node_id("anchor"), members) != shard_id(node_id("other"), members));
}

TEST_CASE("single_block shards follow pairs", "[sharding]") {
    const chain::GlobalChain g({pair_with("m1", {"a", "a"}), pair_with("m2", {"b"})});
    const auto shards = build_shards(g, Mode::single_block);
    REQUIRE(shards.size() == 2);
    for (const Shard& s : shards) {
        REQUIRE(s.members.size() == 1);
        const bool is_a = *s.members.begin() == node_id("a");
        CHECK(s.blocks.size() == (is_a ? 2u : 1u));
        CHECK(s.anchor == g.pairs()[is_a ? 0 : 1].id());
        CHECK(s.id == shard_id(s.anchor, s.members));
        CHECK(std::is_sorted(s.blocks.begin(), s.blocks.end()));
    }
}

TEST_CASE("single_block rejects a node in two pairs", "[sharding]") {
    const chain::GlobalChain g({pair_with("m1", {"a"}), pair_with("m2", {"a"})});
    CHECK(error_of([&] { (void)build_shards(g, Mode::single_block); }) == ErrorCode::ScenarioViolation);
    CHECK(build_shards(g, Mode::multi_block).size() == 1);
}

TEST_CASE("multi_block shards follow owners", "[sharding]") {
    const chain::GlobalChain g({pair_with("m1", {"a", "b"}), pair_with("m2", {"a", "c"})});
    const auto shards = build_shards(g, Mode::multi_block);
    REQUIRE(shards.size() == 3);
    std::map<NodeId, const Shard*> by_anchor;
    for (const Shard& s : shards) by_anchor[s.anchor] = &s;
    CHECK(by_anchor.at(node_id("a"))->members == std::set<NodeId>{node_id("a"), node_id("b"), node_id("c")});
    CHECK(by_anchor.at(node_id("a"))->blocks.size() == 2);
    CHECK(by_anchor.at(node_id("b"))->members == std::set<NodeId>{node_id("a"), node_id("b")});
    CHECK(by_anchor.at(node_id("c"))->members == std::set<NodeId>{node_id("a"), node_id("c")});

    const auto a = shard_lookup(shards, node_id("a"));
    CHECK(a.size() == 3);
    CHECK(shard_lookup(shards, node_id("c")).size() == 2);
    CHECK(error_of([&] { (void)shard_lookup(shards, node_id("stranger")); }) == ErrorCode::UnknownNode);
}

TEST_CASE("empty chain has no shards", "[sharding]") {
    const chain::GlobalChain empty;
    CHECK(error_of([&] { (void)build_shards(empty, Mode::multi_block); }) == ErrorCode::EmptyChain);
}

TEST_CASE("shards partition the placed blocks", "[sharding]") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const int pairs = 1 + static_cast<int>(rng() % 5);
        const int nodes = 1 + static_cast<int>(rng() % 6);
        std::vector<chain::ChainPair> ps;
        std::set<Digest> placed;
        for (int i = 0; i < pairs; ++i) {
            std::vector<std::string> owners;
            const int k = 1 + static_cast<int>(rng() % 4);
            for (int j = 0; j < k; ++j) owners.push_back("n" + std::to_string(rng() % nodes));
            ps.push_back(pair_with("m" + std::to_string(trial) + "-" + std::to_string(i), owners));
            for (const auto& b : ps.back().sub_chain) placed.insert(b.id);
        }
        const chain::GlobalChain g(ps);
        const auto shards = build_shards(g, Mode::multi_block);
        std::set<Digest> seen;
        for (const Shard& s : shards) {
            CHECK(s.members.count(s.anchor) == 1);
            for (const Placement& pl : s.blocks) {
                CHECK(pl.owner == s.anchor);
                CHECK(seen.insert(pl.block).second);
            }
        }
        CHECK(seen == placed);
        CHECK(block_total(shards) == placed.size());
        CHECK(build_shards(g, Mode::multi_block).front().id == shards.front().id);
    }
}

TEST_CASE("reward crediting", "[sharding]") {
    const chain::GlobalChain g({pair_with("m1", {"a", "b", "a"}), pair_with("m2", {"c"})});
    const auto shards = build_shards(g, Mode::multi_block);
    const PairId p1 = g.pairs()[0].id();

    const auto plain = credit_shard_rewards(shards, Mode::single_block, {{p1, 5}});
    CHECK(plain.at(node_id("a")) == 2);
    CHECK(plain.at(node_id("b")) == 1);
    CHECK(plain.at(node_id("c")) == 1);

    const auto split = credit_shard_rewards(shards, Mode::multi_block, {{p1, 5}});
    const NodeId low = std::min(node_id("a"), node_id("b"));
    const NodeId high = std::max(node_id("a"), node_id("b"));
    const std::uint64_t base_low = low == node_id("a") ? 2 : 1;
    const std::uint64_t base_high = high == node_id("a") ? 2 : 1;
    CHECK(split.at(low) == base_low + 3);
    CHECK(split.at(high) == base_high + 2);
    CHECK(split.at(node_id("c")) == 1);

    std::uint64_t total = 0;
    for (const auto& [n, v] : split) total += v;
    CHECK(total == 4 + 5);
}

TEST_CASE("chi-square helpers", "[sharding]") {
    using scenarios::chi_square_p_value;
    using scenarios::chi_square_statistic;
    CHECK(chi_square_statistic({10, 10, 10}) == Catch::Approx(0.0));
    CHECK(chi_square_statistic({20, 0}) == Catch::Approx(20.0));
    CHECK(chi_square_p_value(3.841459, 1) == Catch::Approx(0.05).margin(1e-5));
    CHECK(chi_square_p_value(9.487729, 4) == Catch::Approx(0.05).margin(1e-5));
    CHECK(chi_square_p_value(0.0, 4) == Catch::Approx(1.0));
}

TEST_CASE("adversary cannot bias its shard", "[sharding]") {
    scenarios::ShardBiasConfig cfg;
    const auto r = scenarios::run_shard_bias(cfg);
    CHECK(r.counts.size() == cfg.pairs);
    CHECK(r.placed + r.unplaced == cfg.seeds);
    CHECK(r.df == cfg.pairs - 1);
    CHECK(r.p_value > 0.01);
    CHECK(r.pass);
    for (std::uint64_t s = 1; s <= 5; ++s) {
        const auto i = scenarios::adversary_shard_index(cfg, s);
        CHECK(i >= -1);
        CHECK(i < static_cast<std::int64_t>(cfg.pairs));
        CHECK(i == scenarios::adversary_shard_index(cfg, s));
    }
}
