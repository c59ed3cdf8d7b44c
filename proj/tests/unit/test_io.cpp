#include "helpers.hpp"

#include "reinshard/config.hpp"
#include "reinshard/serialize.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

using namespace reinshard;
using testutil::error_of;
using nlohmann::json;

namespace {

chain::GlobalChain sample_chain() {
    chain::ChainPair a = testutil::make_pair("m1", 3, "alice");
    chain::ChainPair b = testutil::make_pair("m2", 2, "bob", 8, a.id());
    b.pseudo_ids = 2;
    return chain::GlobalChain({a, b}, {1, 9}, 4);
}

} // namespace

TEST_CASE("block and artifact round trips are byte-identical", "[io]") {
    const chain::GlobalChain g = sample_chain();
    const chain::PowBlock& pow = g.pairs()[0].pow;
    CHECK(io::to_json(io::pow_block_from_json(io::to_json(pow))).dump() == io::to_json(pow).dump());
    const chain::PosBlock& pos = g.pairs()[1].sub_chain[1];
    const chain::PosBlock back = io::pos_block_from_json(io::to_json(pos));
    CHECK(back.id == pos.id);
    CHECK(back.encode() == pos.encode());
    const vdf::VdfArtifact art = vdf::eval(testutil::small_vdf(30), node_id("in"));
    const vdf::VdfArtifact art2 = io::artifact_from_json(io::to_json(art));
    CHECK(art2.output == art.output);
    CHECK(art2.proof.checkpoints == art.proof.checkpoints);
    CHECK(vdf::verify(testutil::small_vdf(30).verify_key, art2, 1));
}

TEST_CASE("chain snapshot round trip", "[io]") {
    const chain::GlobalChain g = sample_chain();
    const json j = io::to_json(g);
    CHECK(j.at("schema_version") == 1);
    const chain::GlobalChain back = io::chain_from_json(j);
    CHECK(io::to_json(back).dump() == j.dump());
    CHECK(back.pending_incoming() == 4);
    CHECK(back.bounds().s_max == 9);
    CHECK(back.pairs()[1].pseudo_ids == 2);
    REQUIRE(back.pairs().size() == 2);
    for (std::size_t i = 0; i < 2; ++i) CHECK(back.pairs()[i].id() == g.pairs()[i].id());
}

TEST_CASE("snapshot readers reject tampering", "[io]") {
    const json j = io::to_json(sample_chain());

    json bad_id = j;
    bad_id["pairs"][0]["sub_chain"][1]["id"] = node_id("x").hex();
    CHECK(error_of([&] { (void)io::chain_from_json(bad_id); }) == ErrorCode::MalformedBlock);

    json bad_k = j;
    bad_k["pairs"][0]["k_i"] = 7;
    CHECK(error_of([&] { (void)io::chain_from_json(bad_k); }) == ErrorCode::MalformedBlock);

    json bad_pow = j;
    bad_pow["pairs"][1]["pow"]["nonce"] = 99;
    CHECK(error_of([&] { (void)io::chain_from_json(bad_pow); }) == ErrorCode::MalformedBlock);

    json short_digest = j;
    short_digest["pairs"][0]["pow"]["miner"] = "abcd";
    CHECK(error_of([&] { (void)io::chain_from_json(short_digest); }) == ErrorCode::MalformedBlock);

    json version = j;
    version["schema_version"] = 2;
    CHECK(error_of([&] { (void)io::chain_from_json(version); }) == ErrorCode::ParseError);

    json missing = j;
    missing.erase("pairs");
    CHECK(error_of([&] { (void)io::chain_from_json(missing); }) == ErrorCode::ParseError);

    json wrong_type = j;
    wrong_type["pairs"][0]["pow"]["is_pseudo"] = 1;
    CHECK(error_of([&] { (void)io::chain_from_json(wrong_type); }) == ErrorCode::ParseError);
}

TEST_CASE("shard map and Q-table forms", "[io]") {
    const chain::GlobalChain g = sample_chain();
    const auto shards = sharding::build_shards(g, sharding::Mode::multi_block);
    const json m = io::shard_map_json(shards);
    REQUIRE(m.size() == shards.size());
    std::size_t blocks = 0;
    for (const json& s : m) blocks += s.at("blocks").size();
    CHECK(blocks == 5);

    allocation::QTable q;
    q.entries[{{node_id("p"), 2}, allocation::Action::delegate}] = Rational(3, 4);
    const json qj = io::to_json(q);
    CHECK(qj.at("reserve_prob") == "1");
    REQUIRE(qj.at("entries").size() == 1);
    CHECK(qj.at("entries")[0].at("q") == "3/4");
    CHECK(qj.at("entries")[0].at("residual_bucket") == 2);
}

TEST_CASE("config round trip", "[io]") {
    SimConfig c;
    c.seed = 7;
    c.t_E = sim::seconds(9);
    c.latency_model = "uniform";
    c.latency_high = sim::seconds(0.3);
    c.mode = sharding::Mode::single_block;
    c.vdf_enabled = false;
    const json j = to_json(c);
    CHECK(to_json(config_from_json(j)).dump() == j.dump());
    CHECK_NOTHROW(validate(config_from_json(j)));

    const json partial = {{"t_E", 5}, {"clients", 20}};
    const SimConfig p = config_from_json(partial);
    CHECK(p.t_E == sim::seconds(5));
    CHECK(p.clients == 20);
    CHECK(p.t_V == SimConfig{}.t_V);

    const auto th = train_hotel_config(p);
    CHECK(th.t_eval == sim::seconds(5));
    CHECK(th.clients == 20);
    const auto pc = protocol_config(c);
    CHECK(pc.t_eval == sim::seconds(9));
    CHECK(pc.shard_mode == sharding::Mode::single_block);
    CHECK(latency_of(c).max() == sim::seconds(0.3));
}

TEST_CASE("config errors", "[io]") {
    CHECK(error_of([] { (void)config_from_json(json{{"t_e", 3}}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { (void)config_from_json(json{{"clients", -1}}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { (void)config_from_json(json{{"t_E", "3"}}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { (void)config_from_json(json{{"vdf_enabled", 1}}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { (void)config_from_json(json{{"mode", "triple"}}); }) == ErrorCode::ParseError);
    CHECK(error_of([] { (void)config_from_json(json::array()); }) == ErrorCode::ParseError);
    CHECK(error_of([] { (void)load_config("/nonexistent/config.json"); }) == ErrorCode::ParseError);

    auto bad = [](auto mutate) {
        SimConfig c;
        mutate(c);
        return error_of([&] { validate(c); });
    };
    CHECK(bad([](SimConfig& c) { c.t_V = c.t_E; }) == ErrorCode::BadParameter);
    CHECK(bad([](SimConfig& c) { c.tau_prime = 0; }) == ErrorCode::BadParameter);
    CHECK(bad([](SimConfig& c) { c.adversary_fraction = 0.7; }) == ErrorCode::BadParameter);
    CHECK(bad([](SimConfig& c) { c.k_max = 0; }) == ErrorCode::BadParameter);
    CHECK(bad([](SimConfig& c) { c.latency_model = "gamma"; }) == ErrorCode::ParseError);
    CHECK(bad([](SimConfig& c) { c.capability = "psychic"; }) == ErrorCode::ParseError);
    CHECK(bad([](SimConfig& c) { c.feedback = "loud"; }) == ErrorCode::ParseError);
}

TEST_CASE("config file loading", "[io]") {
    const std::string path = "io_test_config.json";
    {
        std::ofstream out(path);
        out << R"({"t_E": 7, "rounds": 12})";
    }
    const SimConfig c = load_config(path);
    CHECK(c.t_E == sim::seconds(7));
    CHECK(c.rounds == 12);
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    CHECK(error_of([&] { (void)load_config(path); }) == ErrorCode::ParseError);
    std::remove(path.c_str());
}
