#include "reinshard/conformance.hpp"

#include "reinshard/chain.hpp"
#include "reinshard/consensus.hpp"
#include "reinshard/error.hpp"
#include "reinshard/numeric.hpp"
#include "reinshard/vdf.hpp"

#include <fstream>

namespace reinshard::conformance {

using nlohmann::json;

bool Report::pass() const {
    for (const auto& [name, s] : sections) {
        if (s.mismatches > 0 || s.checked == 0) return false;
    }
    return !sections.empty();
}

std::uint64_t Report::checked() const {
    std::uint64_t n = 0;
    for (const auto& [name, s] : sections) n += s.checked;
    return n;
}

namespace {

BigInt target_of(const json& j) { return to_bigint(Digest::from_hex(j.get<std::string>())); }

Digest dig(const json& j) { return Digest::from_hex(j.get<std::string>()); }

void expect(Section& s, bool ok, const std::string& what) {
    ++s.checked;
    if (ok) return;
    ++s.mismatches;
    if (s.details.size() < 5) s.details.push_back(what);
}

void check_puzzles(const json& v, Section& s) {
    for (const json& p : v) {
        const Rational alpha = parse_rational(p.at("alpha_m").get<std::string>());
        const Digest h_rho = dig(p.at("h_rho"));
        const Digest h_s = dig(p.at("h_s"));
        const std::uint64_t nonce = p.at("nonce").get<std::uint64_t>();
        const BigInt target = target_of(p.at("target"));
        expect(s, consensus::puzzle_z(h_rho, h_s) == dig(p.at("z")), "Z mismatch");
        expect(s, consensus::pow_hash(alpha, h_rho, h_s, nonce) == dig(p.at("hash")), "H mismatch");
        expect(s, consensus::check_pow_solution(alpha, h_rho, h_s, nonce, target) == p.at("valid").get<bool>(),
               "pow predicate mismatch at nonce " + std::to_string(nonce));
    }
}

void check_inputs(const json& v, Section& s) {
    for (const json& p : v) {
        expect(s, vdf::derive_input(dig(p.at("h_q")), dig(p.at("h_g"))) == dig(p.at("input")), "derive_input mismatch");
    }
}

void check_tickets(const json& v, Section& s) {
    for (const json& t : v) {
        const json& pj = t.at("pow");
        chain::PowBlock b;
        b.prev_pow_hash = dig(pj.at("h_rho"));
        b.pos_head_hash = dig(pj.at("h_s"));
        b.nonce = pj.at("nonce").get<std::uint64_t>();
        b.pseudo_rate = parse_rational(pj.at("alpha_m").get<std::string>());
        b.is_pseudo = pj.at("is_pseudo").get<bool>();
        b.miner = dig(pj.at("miner"));
        b.seal();
        expect(s, b.id == dig(pj.at("id")), "PoW id mismatch");
        const Bytes vk = from_hex(t.at("v_k").get<std::string>());
        const Rational reward = parse_rational(t.at("reward").get<std::string>());
        const BigInt target = target_of(t.at("target"));
        expect(s, consensus::leader_hash(b, vk) == dig(t.at("hash")), "leader hash mismatch");
        expect(s, consensus::check_leader_ticket(b, vk, reward, target) == t.at("eligible").get<bool>(),
               "leader ticket mismatch");
    }
}

void check_vdf(const json& v, Section& s) {
    for (const json& a : v) {
        vdf::VdfParams p;
        p.verify_key = from_hex(a.at("v_k").get<std::string>());
        p.iterations = a.at("iterations").get<std::uint64_t>();
        const vdf::VdfArtifact art = vdf::eval(p, dig(a.at("input")));
        std::vector<Digest> cps;
        for (const json& c : a.at("checkpoints")) cps.push_back(dig(c));
        const std::string z = std::to_string(p.iterations);
        expect(s, art.output == dig(a.at("output")), "VDF output mismatch at zeta " + z);
        expect(s, art.proof.checkpoints == cps, "VDF checkpoints mismatch at zeta " + z);
        expect(s, art.proof.commitment == dig(a.at("commitment")), "VDF commitment mismatch at zeta " + z);
        expect(s, vdf::verify(p.verify_key, art, 7), "VDF verify rejected an honest transcript at zeta " + z);
    }
}

void check_result(Section& s, const consensus::DifficultyResult& r, const json& c, std::size_t i) {
    const std::string at = " in case " + std::to_string(i);
    expect(s, r.target == target_of(c.at("expect")), "target mismatch" + at);
    expect(s, consensus::to_string(r.fallback) == c.at("fallback").get<std::string>(), "fallback mismatch" + at);
    expect(s, r.clamped == c.at("clamped").get<bool>(), "clamp flag mismatch" + at);
}

void check_pow_difficulty(const json& v, Section& s) {
    std::size_t i = 0;
    for (const json& c : v) {
        std::vector<consensus::PowPairInput> pairs;
        const json& eta = c.at("eta_x");
        const json& rew = c.at("reward");
        for (std::size_t k = 0; k < eta.size(); ++k) {
            pairs.push_back({eta[k].get<std::uint64_t>(), parse_rational(rew[k].get<std::string>())});
        }
        check_result(s, consensus::adjust_pow_difficulty(pairs, c.at("winner").get<std::size_t>(), target_of(c.at("target"))),
                     c, i++);
    }
}

void check_pos_difficulty(const json& v, Section& s) {
    std::size_t i = 0;
    for (const json& c : v) {
        std::vector<consensus::PosPairInput> pairs;
        const json& cap = c.at("extra_capacity");
        const json& st = c.at("stakes");
        for (std::size_t k = 0; k < cap.size(); ++k) {
            pairs.push_back({cap[k].get<std::uint64_t>(), st[k].get<std::uint64_t>()});
        }
        check_result(s,
                     consensus::adjust_pos_difficulty(pairs, c.at("winner").get<std::size_t>(),
                                                      c.at("incoming").get<std::uint64_t>(), target_of(c.at("target"))),
                     c, i++);
    }
}

void check_node_ids(const json& v, Section& s) {
    for (const json& n : v) {
        expect(s, node_id(n.at("label").get<std::string>()) == dig(n.at("id")), "node id mismatch");
    }
}

} // namespace

Report check_vectors(const json& vectors) {
    if (!vectors.is_object() || vectors.value("schema_version", 0) != 1) {
        throw Error(ErrorCode::ParseError, "golden vectors: unsupported document");
    }
    Report r;
    check_puzzles(vectors.at("puzzles"), r.sections["puzzles"]);
    check_inputs(vectors.at("derive_input"), r.sections["derive_input"]);
    check_tickets(vectors.at("leader_tickets"), r.sections["leader_tickets"]);
    check_vdf(vectors.at("vdf"), r.sections["vdf"]);
    check_pow_difficulty(vectors.at("pow_difficulty"), r.sections["pow_difficulty"]);
    check_pos_difficulty(vectors.at("pos_difficulty"), r.sections["pos_difficulty"]);
    check_node_ids(vectors.at("node_ids"), r.sections["node_ids"]);
    return r;
}

Report check_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read golden vectors " + path);
    try {
        return check_vectors(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("golden vectors: ") + e.what());
    }
}

} // namespace reinshard::conformance
