#include "helpers.hpp"

#include "reinshard/xshard.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

using namespace reinshard;
using namespace reinshard::xshard;
using sim::seconds;
using testutil::error_of;

namespace {

const Digest shard_a = node_id("shard-a");
const Digest shard_b = node_id("shard-b");
const Digest shard_c = node_id("shard-c");

Directory directory() {
    Directory d;
    d.add({node_id("alice"), shard_a, 9, true});
    d.add({node_id("amy"), shard_a, 2, true});
    d.add({node_id("bob"), shard_b, 5, true});
    d.add({node_id("carol"), shard_c, 1, true});
    d.add({node_id("mallory"), shard_b, 3, false});
    return d;
}

std::vector<TxState> states(const TxSession& s) {
    std::vector<TxState> out;
    for (const auto& [st, t] : s.history) out.push_back(st);
    return out;
}

SimTime at(const TxSession& s, TxState st) {
    for (const auto& [x, t] : s.history) {
        if (x == st) return t;
    }
    return -1;
}

void check_history_legal(const TxSession& s) {
    REQUIRE_FALSE(s.history.empty());
    CHECK(s.history.front().first == TxState::Init);
    for (std::size_t i = 1; i < s.history.size(); ++i) {
        CHECK(is_legal_transition(s.history[i - 1].first, s.history[i].first));
        CHECK(s.history[i - 1].second <= s.history[i].second);
    }
}

} // namespace

TEST_CASE("hold_duration examples", "[xshard]") {
    CHECK(hold_duration(seconds(2.5), 2, seconds(0.1), seconds(3)) == seconds(5.1));
    CHECK(hold_duration(seconds(2.5), 1, 0, seconds(3)) == seconds(2.5));
    CHECK(error_of([] { (void)hold_duration(seconds(3), 1, 0, seconds(3)); }) == ErrorCode::ContractViolation);
    CHECK(error_of([] { (void)hold_duration(seconds(1), 0, 0, seconds(3)); }) == ErrorCode::BadParameter);
    CHECK(error_of([] { (void)hold_duration(seconds(1), 1, -1, seconds(3)); }) == ErrorCode::BadParameter);
}

TEST_CASE("state names and steps", "[xshard]") {
    for (int i = 0; i <= static_cast<int>(TxState::Rejected); ++i) {
        const auto s = static_cast<TxState>(i);
        CHECK(parse_state(to_string(s)) == s);
    }
    CHECK(error_of([] { (void)parse_state("Pending"); }) == ErrorCode::ParseError);
    CHECK(step_of(TxState::PriorityProved) == 1);
    CHECK(step_of(TxState::HoldInit) == 5);
    CHECK(step_of(TxState::LedgerUpdated) == 12);
    CHECK(step_of(TxState::TimedOut) == 0);
    CHECK_FALSE(is_legal_transition(TxState::LedgerUpdated, TxState::Init));
    CHECK_FALSE(is_legal_transition(TxState::HoldConfirmed, TxState::Rejected));
    CHECK_FALSE(is_legal_transition(TxState::TimedOut, TxState::ChannelSet));
}

TEST_CASE("priority ordering", "[xshard]") {
    CHECK(priority(7) == 7);
    CHECK(outranks(9, node_id("z"), 5, node_id("a")));
    const NodeId lo = std::min(node_id("a"), node_id("b"));
    const NodeId hi = std::max(node_id("a"), node_id("b"));
    CHECK(outranks(5, lo, 5, hi));
    CHECK_FALSE(outranks(5, hi, 5, lo));
}

TEST_CASE("inter-shard P2P session completes", "[xshard]") {
    const XShardConfig cfg;
    const TxSession s = inter_shard_tx(node_id("alice"), {node_id("bob")}, directory(), cfg);
    CHECK(s.mode == TxMode::P2P);
    CHECK(s.inter_shard);
    CHECK(states(s) == std::vector<TxState>{TxState::Init, TxState::PriorityProved, TxState::InfoFetched,
                                             TxState::ReceiverResolved, TxState::HoldInit, TxState::HoldConfirmed,
                                             TxState::ChannelSet, TxState::ProtocolUp, TxState::TxActive,
                                             TxState::LedgerUpdated});
    check_history_legal(s);
    CHECK(s.committed);
    REQUIRE(s.hold);
    CHECK(s.hold->pairs_involved == 1);
    CHECK(s.hold->hold_duration == seconds(2.6));
    CHECK(s.advertised_wait == s.observed_wait);
    CHECK(s.observed_wait == cfg.tau_prime);
    CHECK(s.ledger.size() == 2);
    CHECK(s.released_at == at(s, TxState::LedgerUpdated));
}

TEST_CASE("P2MP session spans two shards", "[xshard]") {
    const XShardConfig cfg;
    const TxSession s = inter_shard_tx(node_id("alice"), {node_id("bob"), node_id("carol")}, directory(), cfg);
    CHECK(s.mode == TxMode::P2MP);
    REQUIRE(s.hold);
    CHECK(s.hold->pairs_involved == 2);
    CHECK(s.hold->hold_duration == seconds(5.1));
    CHECK(s.ledger.size() == 3);
    CHECK(s.state == TxState::LedgerUpdated);
    // the transaction phase scales with the receiver count
    CHECK(at(s, TxState::LedgerUpdated) - at(s, TxState::TxActive) == 2 * cfg.t_eval + seconds(0.1));
}

TEST_CASE("intra-shard session skips the hold", "[xshard]") {
    const TxSession s = intra_shard_tx(node_id("alice"), {node_id("amy")}, directory(), {});
    CHECK_FALSE(s.inter_shard);
    CHECK_FALSE(s.hold);
    CHECK(s.state == TxState::LedgerUpdated);
    const auto seen = states(s);
    CHECK(std::count(seen.begin(), seen.end(), TxState::HoldInit) == 0);
    check_history_legal(s);
}

TEST_CASE("invalid parties", "[xshard]") {
    const Directory d = directory();
    const XShardConfig cfg;
    CHECK(error_of([&] { (void)intra_shard_tx(node_id("alice"), {node_id("bob")}, d, cfg); }) == ErrorCode::InvalidParty);
    CHECK(error_of([&] { (void)intra_shard_tx(node_id("ghost"), {node_id("amy")}, d, cfg); }) == ErrorCode::InvalidParty);
    CHECK(error_of([&] { (void)inter_shard_tx(node_id("alice"), {node_id("ghost")}, d, cfg); }) == ErrorCode::InvalidParty);
    CHECK(error_of([&] { (void)inter_shard_tx(node_id("alice"), {node_id("mallory")}, d, cfg); }) == ErrorCode::InvalidParty);
    CHECK(error_of([&] { (void)inter_shard_tx(node_id("alice"), {node_id("alice")}, d, cfg); }) == ErrorCode::InvalidParty);
    CHECK(error_of([&] { (void)inter_shard_tx(node_id("alice"), {node_id("bob"), node_id("bob")}, d, cfg); }) ==
          ErrorCode::InvalidParty);
    CHECK(error_of([&] { (void)inter_shard_tx(node_id("alice"), {}, d, cfg); }) == ErrorCode::InvalidParty);
}

TEST_CASE("bad session configuration", "[xshard]") {
    sim::Simulator sim(1);
    XShardConfig cfg;
    cfg.tau_prime = cfg.t_eval;
    CHECK(error_of([&] { SessionManager m(sim, cfg, directory()); }) == ErrorCode::ContractViolation);
    cfg = {};
    cfg.t_verify = cfg.t_eval;
    CHECK(error_of([&] { SessionManager m(sim, cfg, directory()); }) == ErrorCode::ContractViolation);
    cfg = {};
    cfg.vdf_iterations = 0;
    CHECK(error_of([&] { SessionManager m(sim, cfg, directory()); }) == ErrorCode::BadParameter);
}

TEST_CASE("failure paths", "[xshard]") {
    const Directory d = directory();
    XShardConfig cfg;
    SessionOptions withhold;
    withhold.withhold_confirmation = true;
    const TxSession w = inter_shard_tx(node_id("alice"), {node_id("bob")}, d, cfg, 1, withhold);
    CHECK(w.state == TxState::TimedOut);
    CHECK(at(w, TxState::TimedOut) - w.hold_init_at == w.hold->hold_duration);

    SessionOptions forged;
    forged.forged_proof = true;
    const TxSession f = inter_shard_tx(node_id("alice"), {node_id("bob")}, d, cfg, 1, forged);
    CHECK(f.state == TxState::Rejected);
    CHECK(f.ledger.empty());

    SessionOptions abandon;
    abandon.abandon_after_grant = true;
    const TxSession a = inter_shard_tx(node_id("alice"), {node_id("bob")}, d, cfg, 1, abandon);
    CHECK(a.state == TxState::TimedOut);
    CHECK(a.released_at == a.hold->expires_at);

    // verification slower than the hold window
    cfg.tau_prime = seconds(0.5);
    const TxSession slow = inter_shard_tx(node_id("alice"), {node_id("bob")}, d, cfg);
    CHECK(slow.state == TxState::TimedOut);

    for (const TxSession* s : {&w, &f, &a, &slow}) check_history_legal(*s);
}

TEST_CASE("update_ledgers", "[xshard]") {
    TxSession s;
    s.sender = node_id("alice");
    s.receivers = {node_id("bob"), node_id("carol"), node_id("amy")};
    CHECK(error_of([&] { (void)update_ledgers(s, true); }) == ErrorCode::IllegalState);
    s.state = TxState::TxActive;
    const auto e = update_ledgers(s, false);
    CHECK(e.size() == 4);
    CHECK(std::count_if(e.begin(), e.end(), [](const LedgerEntry& x) { return x.is_sender; }) == 1);
    CHECK(std::none_of(e.begin(), e.end(), [](const LedgerEntry& x) { return x.committed; }));
    CHECK(s.state == TxState::LedgerUpdated);
    CHECK_FALSE(s.committed);
    CHECK(error_of([&] { (void)update_ledgers(s, true); }) == ErrorCode::IllegalState);
}

TEST_CASE("commit callback decides atomically", "[xshard]") {
    SessionOptions o;
    o.commit = [](const TxSession&) { return CommitResult{false, "aborted"}; };
    const TxSession s = inter_shard_tx(node_id("alice"), {node_id("bob"), node_id("carol")}, directory(), {}, 1, o);
    CHECK(s.state == TxState::LedgerUpdated);
    CHECK(s.detail == "aborted");
    CHECK(std::none_of(s.ledger.begin(), s.ledger.end(), [](const LedgerEntry& e) { return e.committed; }));
}

// Many senders with random stakes contend for one receiver that an intra-shard
// session keeps busy until all of them are eligible. The expected grant order
// is an independent sort on (stakes desc, session id asc).
TEST_CASE("grant order follows priority", "[xshard]") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        Directory d;
        const NodeId target = node_id("target");
        d.add({target, shard_a, 1, true});
        d.add({node_id("blocker"), shard_a, 1, true});
        const int n = 2 + static_cast<int>(rng() % 5);
        std::vector<NodeId> senders;
        for (int i = 0; i < n; ++i) {
            const NodeId s = node_id("s" + std::to_string(trial) + "-" + std::to_string(i));
            const std::uint64_t stakes = trial == 0 ? (i == 0 ? 5 : 9) : rng() % 10;
            d.add({s, shard_b, stakes, true});
            senders.push_back(s);
        }
        sim::Simulator sim(static_cast<std::uint64_t>(trial) + 1, false);
        SessionManager mgr(sim, {}, d);
        (void)mgr.start(node_id("blocker"), {target});
        struct Expect {
            std::uint64_t psi;
            Digest id;
        };
        std::vector<Expect> expect;
        for (const NodeId& s : senders) expect.push_back({d.parties.at(s).stakes, mgr.start(s, {target})});
        sim.run();

        std::sort(expect.begin(), expect.end(), [](const Expect& a, const Expect& b) {
            return a.psi != b.psi ? a.psi > b.psi : a.id < b.id;
        });
        SimTime last = -1;
        for (const Expect& e : expect) {
            const TxSession& s = mgr.session(e.id);
            CHECK(s.state == TxState::LedgerUpdated);
            REQUIRE(s.hold);
            CHECK(s.hold->granted_at > last);
            last = s.hold->granted_at;
        }
    }
}

TEST_CASE("no receiver is held by two sessions at once", "[xshard]") {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        std::mt19937_64 rng(seed);
        Directory d;
        std::vector<NodeId> nodes;
        for (int i = 0; i < 8; ++i) {
            nodes.push_back(node_id("p" + std::to_string(i)));
            d.add({nodes.back(), i % 2 ? shard_a : shard_b, rng() % 6, true});
        }
        XShardConfig cfg;
        cfg.latency = sim::LatencyModel::uniform(seconds(0.05), seconds(0.4));
        sim::Simulator sim(seed, false);
        SessionManager mgr(sim, cfg, d);
        for (int k = 0; k < 12; ++k) {
            const SimTime when = static_cast<SimTime>(rng() % 20'000'000);
            const NodeId from = nodes[rng() % nodes.size()];
            std::vector<NodeId> to;
            for (const NodeId& r : nodes) {
                if (r != from && d.parties.at(r).valid && rng() % 4 == 0) to.push_back(r);
            }
            if (to.empty()) to.push_back(from == nodes[0] ? nodes[1] : nodes[0]);
            sim.schedule(when, sim::EventKind::TxStep, [&mgr, from, to](sim::Simulator&) { (void)mgr.start(from, to); });
        }
        sim.run();

        std::map<NodeId, std::vector<std::pair<SimTime, SimTime>>> busy;
        for (const Digest& id : mgr.order()) {
            const TxSession& s = mgr.session(id);
            check_history_legal(s);
            const SimTime from = s.hold ? s.hold->granted_at : at(s, TxState::ChannelSet);
            if (from < 0) continue;
            for (const NodeId& r : s.receivers) busy[r].emplace_back(from, s.released_at);
        }
        for (auto& [r, spans] : busy) {
            std::sort(spans.begin(), spans.end());
            for (std::size_t i = 1; i < spans.size(); ++i) CHECK(spans[i - 1].second <= spans[i].first);
        }
        for (const NodeId& n : nodes) CHECK(mgr.active_holders(n) == 0);
    }
}

TEST_CASE("an uncontended hold is served within two hold durations", "[xshard]") {
    XShardConfig cfg;
    cfg.latency = sim::LatencyModel::uniform(seconds(0.05), seconds(0.5));
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const TxSession s = inter_shard_tx(node_id("alice"), {node_id("bob"), node_id("carol")}, directory(), cfg, seed);
        REQUIRE(s.hold);
        CHECK(s.state == TxState::LedgerUpdated);
        CHECK(at(s, TxState::ChannelSet) - s.hold_init_at <= 2 * s.hold->hold_duration);
        CHECK(s.advertised_wait == s.observed_wait);
    }
}

TEST_CASE("sessions are deterministic per seed", "[xshard]") {
    XShardConfig cfg;
    cfg.latency = sim::LatencyModel::uniform(seconds(0.05), seconds(0.5));
    const TxSession a = inter_shard_tx(node_id("alice"), {node_id("bob")}, directory(), cfg, 17);
    const TxSession b = inter_shard_tx(node_id("alice"), {node_id("bob")}, directory(), cfg, 17);
    CHECK(a.history == b.history);
    CHECK(a.id == b.id);
}
