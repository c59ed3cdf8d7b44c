#include "reinshard/serialize.hpp"

#include "reinshard/error.hpp"
#include "reinshard/numeric.hpp"

namespace reinshard::io {

namespace {

const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string text(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_string()) throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t u64(const json& j, const char* key) {
    const json& v = field(j, key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an unsigned integer");
    }
    return v.get<std::uint64_t>();
}

Digest digest(const json& j, const char* key) { return Digest::from_hex(text(j, key)); }

Bytes raw(const json& j, const char* key) { return from_hex(text(j, key)); }

} // namespace

json to_json(const vdf::VdfArtifact& a) {
    json cps = json::array();
    for (const Digest& c : a.proof.checkpoints) cps.push_back(c.hex());
    return {{"input", a.input.hex()},
            {"output", a.output.hex()},
            {"iterations", a.proof.iterations},
            {"checkpoints", cps},
            {"commitment", a.proof.commitment.hex()}};
}

vdf::VdfArtifact artifact_from_json(const json& j) {
    vdf::VdfArtifact a;
    a.input = digest(j, "input");
    a.output = digest(j, "output");
    a.proof.iterations = u64(j, "iterations");
    a.proof.commitment = digest(j, "commitment");
    const json& cps = field(j, "checkpoints");
    if (!cps.is_array()) throw Error(ErrorCode::ParseError, "checkpoints must be an array");
    for (const json& c : cps) {
        if (!c.is_string()) throw Error(ErrorCode::ParseError, "checkpoint must be a hex string");
        a.proof.checkpoints.push_back(Digest::from_hex(c.get<std::string>()));
    }
    return a;
}

json to_json(const chain::PowBlock& b) {
    return {{"id", b.id.hex()},
            {"h_rho", b.prev_pow_hash.hex()},
            {"h_s", b.pos_head_hash.hex()},
            {"nonce", b.nonce},
            {"alpha_m", to_string(b.pseudo_rate)},
            {"is_pseudo", b.is_pseudo},
            {"miner", b.miner.hex()}};
}

chain::PowBlock pow_block_from_json(const json& j) {
    chain::PowBlock b;
    b.id = digest(j, "id");
    b.prev_pow_hash = digest(j, "h_rho");
    b.pos_head_hash = digest(j, "h_s");
    b.nonce = u64(j, "nonce");
    b.pseudo_rate = parse_rational(text(j, "alpha_m"));
    const json& p = field(j, "is_pseudo");
    if (!p.is_boolean()) throw Error(ErrorCode::ParseError, "is_pseudo must be a boolean");
    b.is_pseudo = p.get<bool>();
    b.miner = digest(j, "miner");
    if (b.compute_id() != b.id) throw Error(ErrorCode::MalformedBlock, "PoW block id does not match its content");
    return b;
}

json to_json(const chain::PosBlock& b) {
    return {{"id", b.id.hex()},
            {"parent_pair", b.parent_pair.hex()},
            {"h_q", b.parent_pos_hash.hex()},
            {"h_g", b.prev_pos_hash.hex()},
            {"v_k", to_hex(b.verification_key)},
            {"vdf", to_json(b.vdf)},
            {"owner", b.owner.hex()},
            {"stake_delta", b.stake_delta}};
}

chain::PosBlock pos_block_from_json(const json& j) {
    chain::PosBlock b;
    b.id = digest(j, "id");
    b.parent_pair = digest(j, "parent_pair");
    b.parent_pos_hash = digest(j, "h_q");
    b.prev_pos_hash = digest(j, "h_g");
    b.verification_key = raw(j, "v_k");
    b.vdf = artifact_from_json(field(j, "vdf"));
    b.owner = digest(j, "owner");
    b.stake_delta = u64(j, "stake_delta");
    if (b.compute_id() != b.id) throw Error(ErrorCode::MalformedBlock, "PoS block id does not match its content");
    return b;
}

json to_json(const chain::GlobalChain& g) {
    json pairs = json::array();
    for (const chain::ChainPair& p : g.pairs()) {
        json sub = json::array();
        for (const chain::PosBlock& b : p.sub_chain) sub.push_back(to_json(b));
        pairs.push_back({{"pow", to_json(p.pow)},
                         {"k_i", p.k_i()},
                         {"eta_x", p.pseudo_ids},
                         {"k_max", p.k_max},
                         {"stakes", p.stakes},
                         {"sub_chain", sub}});
    }
    return {{"schema_version", schema_version},
            {"bounds", {{"s_min", g.bounds().s_min}, {"s_max", g.bounds().s_max}}},
            {"pending_incoming", g.pending_incoming()},
            {"pairs", pairs}};
}

chain::GlobalChain chain_from_json(const json& j) {
    if (u64(j, "schema_version") != static_cast<std::uint64_t>(schema_version)) {
        throw Error(ErrorCode::ParseError, "unsupported schema_version");
    }
    const json& bj = field(j, "bounds");
    chain::StakeBounds bounds{u64(bj, "s_min"), u64(bj, "s_max")};
    std::vector<chain::ChainPair> pairs;
    const json& pj = field(j, "pairs");
    if (!pj.is_array()) throw Error(ErrorCode::ParseError, "pairs must be an array");
    for (const json& e : pj) {
        chain::ChainPair p;
        p.pow = pow_block_from_json(field(e, "pow"));
        p.pseudo_ids = u64(e, "eta_x");
        p.k_max = u64(e, "k_max");
        p.stakes = u64(e, "stakes");
        const json& sub = field(e, "sub_chain");
        if (!sub.is_array()) throw Error(ErrorCode::ParseError, "sub_chain must be an array");
        for (const json& b : sub) p.sub_chain.push_back(pos_block_from_json(b));
        if (u64(e, "k_i") != p.k_i()) throw Error(ErrorCode::MalformedBlock, "k_i disagrees with the sub-chain");
        pairs.push_back(std::move(p));
    }
    return chain::GlobalChain(std::move(pairs), bounds, u64(j, "pending_incoming"));
}

json shard_map_json(const std::vector<sharding::Shard>& shards) {
    json out = json::array();
    for (const sharding::Shard& s : shards) {
        json members = json::array();
        for (const NodeId& m : s.members) members.push_back(m.hex());
        json blocks = json::array();
        for (const sharding::Placement& b : s.blocks) {
            blocks.push_back({{"block", b.block.hex()}, {"owner", b.owner.hex()}, {"pair", b.pair.hex()}});
        }
        out.push_back({{"shard_id", s.id.hex()}, {"anchor", s.anchor.hex()}, {"members", members}, {"blocks", blocks}});
    }
    return out;
}

json to_json(const allocation::QTable& q) {
    json entries = json::array();
    for (const auto& [key, value] : q.entries) {
        entries.push_back({{"pair", key.first.pair.hex()},
                           {"residual_bucket", key.first.residual_bucket},
                           {"action", key.second == allocation::Action::delegate ? "delegate" : "disallow"},
                           {"q", to_string(value)}});
    }
    return {{"reserve_prob", to_string(q.reserve_prob)}, {"entries", entries}};
}

} // namespace reinshard::io
