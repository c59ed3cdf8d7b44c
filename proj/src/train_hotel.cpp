#include "reinshard/train_hotel.hpp"

#include "reinshard/chain.hpp"
#include "reinshard/error.hpp"
#include "reinshard/sharding.hpp"
#include "reinshard/xshard.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace reinshard::scenarios {

std::string_view to_string(AdversaryCapability c) noexcept {
    return c == AdversaryCapability::with_vdf ? "with_vdf" : "without_vdf";
}

AdversaryCapability parse_capability(std::string_view s) {
    if (s == "with_vdf" || s == "with-vdf") return AdversaryCapability::with_vdf;
    if (s == "without_vdf" || s == "without-vdf") return AdversaryCapability::without_vdf;
    throw Error(ErrorCode::ParseError, "unknown adversary capability '" + std::string(s) + "'");
}

std::string_view to_string(ClientOutcome o) noexcept {
    switch (o) {
    case ClientOutcome::both: return "both";
    case ClientOutcome::train_only: return "train_only";
    case ClientOutcome::hotel_only: return "hotel_only";
    case ClientOutcome::none_denied: return "none_denied";
    case ClientOutcome::none_error: return "none_error";
    }
    return "?";
}

SimTime theoretical_completion(std::uint64_t participants, SimTime t_eval, SimTime tau_prime) {
    return static_cast<SimTime>(participants) * t_eval + tau_prime;
}

namespace {

struct World {
    NodeId train = node_id("train-server");
    NodeId hotel = node_id("hotel-server");
    std::vector<NodeId> clients;
    xshard::Directory dir;
};

/// Both servers attach one PoS block each to their own chain-pair; the
/// single-block shards of that chain put them in distinct shards.
World build_world(const TrainHotelConfig& cfg, sim::Simulator& sim) {
    World w;
    vdf::VdfParams params;
    params.iterations = 16;
    params.verify_key = {0x01};
    std::vector<chain::ChainPair> pairs;
    for (const NodeId& server : {w.train, w.hotel}) {
        chain::ChainPair p;
        p.pow.prev_pow_hash = pairs.empty() ? Digest{} : pairs.back().id();
        p.pow.miner = server;
        p.pow.pseudo_rate = Rational(1, 10);
        p.pow.seal();
        p.stakes = 1;
        p.sub_chain.push_back(chain::make_pos_block(p, params, server));
        pairs.push_back(std::move(p));
    }
    const chain::GlobalChain g(std::move(pairs));
    const std::vector<sharding::Shard> shards = sharding::build_shards(g, sharding::Mode::single_block);

    auto& stakes_rng = sim.rng().stream("stakes");
    std::uniform_int_distribution<std::uint64_t> honest_stake(1, 100);
    for (std::uint64_t i = 0; i < cfg.clients; ++i) w.clients.push_back(node_id("client-" + std::to_string(i)));
    const std::set<NodeId> client_set(w.clients.begin(), w.clients.end());
    const Digest client_shard = sharding::shard_id(node_id("client-gateway"), client_set);

    for (const sharding::Shard& s : shards) {
        for (const NodeId& m : s.members) w.dir.add({m, s.id, 0, true});
    }
    for (const NodeId& c : w.clients) w.dir.add({c, client_shard, honest_stake(stakes_rng), true});
    return w;
}

std::vector<bool> pick_adversaries(const TrainHotelConfig& cfg, sim::Simulator& sim) {
    std::vector<bool> adv(cfg.clients, false);
    const auto n_adv = static_cast<std::uint64_t>(std::llround(cfg.adversary_fraction * static_cast<double>(cfg.clients)));
    if (n_adv == 0) return adv;
    std::vector<std::uint64_t> idx(cfg.clients);
    for (std::uint64_t i = 0; i < cfg.clients; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), sim.rng().stream("adversary"));
    for (std::uint64_t k = 0; k < n_adv && k < idx.size(); ++k) adv[idx[k]] = true;
    return adv;
}

void tally(ScenarioReport& r) {
    for (ClientOutcome o : r.outcomes) {
        switch (o) {
        case ClientOutcome::both: ++r.both; break;
        case ClientOutcome::train_only: ++r.train_only; break;
        case ClientOutcome::hotel_only: ++r.hotel_only; break;
        case ClientOutcome::none_denied: ++r.denied; break;
        case ClientOutcome::none_error: ++r.errored; break;
        }
    }
}

void run_with_holds(const TrainHotelConfig& cfg, sim::Simulator& sim, World& w, ScenarioReport& r) {
    const std::vector<bool> adv = pick_adversaries(cfg, sim);
    r.adversarial = adv;
    auto& adv_rng = sim.rng().stream("adversary");
    std::uniform_int_distribution<std::uint64_t> adv_stake(101, 200);
    std::bernoulli_distribution validator_withholds(std::clamp(cfg.adversary_fraction, 0.0, 1.0));
    for (std::size_t i = 0; i < w.clients.size(); ++i) {
        if (adv[i]) w.dir.parties[w.clients[i]].stakes = adv_stake(adv_rng);
    }

    xshard::XShardConfig xc;
    xc.tau_prime = cfg.tau_prime;
    xc.t_eval = cfg.t_eval;
    xc.t_verify = cfg.t_verify;
    xc.latency = cfg.latency;
    xc.holds_enabled = true;
    xshard::SessionManager mgr(sim, xc, w.dir);

    std::uint64_t train_left = cfg.train_tickets;
    std::uint64_t hotel_left = cfg.hotel_tickets;
    std::map<Digest, std::size_t> owner; // session -> client index
    std::vector<std::vector<Digest>> sessions_of(w.clients.size());

    auto commit = [&](const xshard::TxSession& s) -> xshard::CommitResult {
        if (train_left > 0 && hotel_left > 0) {
            --train_left;
            --hotel_left;
            ++r.train_booked;
            ++r.hotel_booked;
            r.booking_phase = std::max(r.booking_phase, sim.now());
            sim.trace({{"kind", "booking"}, {"session", s.id.hex()}, {"result", "both"}});
            return {true, "booked train then hotel"};
        }
        sim.trace({{"kind", "booking"}, {"session", s.id.hex()}, {"result", "unavailable"}});
        return {false, "unavailable"};
    };

    for (std::size_t i = 0; i < w.clients.size(); ++i) {
        const NodeId c = w.clients[i];
        if (!adv[i]) {
            xshard::SessionOptions o;
            o.commit = commit;
            o.withhold_confirmation = cfg.adversary_fraction > 0 && validator_withholds(adv_rng);
            const Digest id = mgr.start(c, {w.train, w.hotel}, o);
            owner[id] = i;
            sessions_of[i].push_back(id);
            continue;
        }
        for (std::uint64_t k = 0; k < std::max<std::uint64_t>(1, cfg.spam_per_adversary); ++k) {
            xshard::SessionOptions o;
            if (cfg.capability == AdversaryCapability::with_vdf) {
                o.abandon_after_grant = true; // takes the hold, lets it expire
            } else {
                o.forged_proof = true; // cannot produce the delay proof in time
            }
            const Digest id = mgr.start(c, {w.train, w.hotel}, o);
            owner[id] = i;
            sessions_of[i].push_back(id);
        }
        if (cfg.capability == AdversaryCapability::without_vdf) {
            // Direct bookings bypass the hold protocol; servers only book over an open channel.
            r.adversary_rejections += 2;
            sim.trace({{"kind", "direct_booking"}, {"client", c.hex()}, {"result", "refused"}});
        }
    }

    sim.run();

    r.outcomes.assign(w.clients.size(), ClientOutcome::none_error);
    bool all_timed_out = true;
    std::uint64_t honest_sessions = 0;
    for (const Digest& id : mgr.order()) {
        const xshard::TxSession& s = mgr.session(id);
        const std::size_t i = owner.at(id);
        const SimTime end = s.history.back().second;
        r.completion = std::max(r.completion, end);
        if (s.state == xshard::TxState::TimedOut || s.state == xshard::TxState::Rejected) ++r.error_events;
        if (s.state == xshard::TxState::Rejected && adv[i]) ++r.adversary_rejections;
        if (!adv[i]) {
            ++honest_sessions;
            if (s.state != xshard::TxState::TimedOut) all_timed_out = false;
            if (s.state == xshard::TxState::LedgerUpdated) {
                r.outcomes[i] = s.committed ? ClientOutcome::both : ClientOutcome::none_denied;
            }
        }
        r.waits.push_back({s.id, s.inter_shard, s.state == xshard::TxState::LedgerUpdated, s.advertised_wait,
                           s.observed_wait, cfg.t_verify, cfg.t_eval});
        if (s.hold && s.hold->granted_at >= 0) {
            for (const NodeId& rcv : s.receivers) r.holds.push_back({rcv, s.id, s.hold->granted_at, s.released_at});
        }
    }
    r.deadlock = r.train_booked + r.hotel_booked == 0 && r.error_events > 0 && honest_sessions > 0 && all_timed_out;
}

void run_racing(const TrainHotelConfig& cfg, sim::Simulator& sim, World& w, ScenarioReport& r) {
    r.adversarial.assign(w.clients.size(), false);
    struct Server {
        NodeId id;
        std::uint64_t left;
        SimTime busy_until = 0;
        bool train;
    };
    Server servers[2] = {{w.train, cfg.train_tickets, 0, true}, {w.hotel, cfg.hotel_tickets, 0, false}};
    std::vector<bool> got_train(w.clients.size(), false);
    std::vector<bool> got_hotel(w.clients.size(), false);

    auto& req_rng = sim.rng().stream("requests");
    auto& lat_rng = sim.rng().stream("latency");
    std::uniform_int_distribution<SimTime> jitter(0, std::max<SimTime>(0, cfg.request_jitter));
    for (std::size_t i = 0; i < w.clients.size(); ++i) {
        for (Server& srv : servers) {
            const SimTime arrive = jitter(req_rng) + cfg.latency.sample(lat_rng);
            Server* sp = &srv;
            sim.schedule(arrive, sim::EventKind::TxStep, [&, sp, i](sim::Simulator& s) {
                const SimTime start = std::max(s.now(), sp->busy_until);
                sp->busy_until = start + cfg.tau_prime;
                const bool booked = sp->left > 0;
                if (booked) --sp->left;
                const SimTime reply = sp->busy_until + cfg.latency.sample(lat_rng);
                s.schedule(reply, sim::EventKind::TxStep, [&, sp, i, booked](sim::Simulator& s2) {
                    if (booked) {
                        (sp->train ? got_train : got_hotel)[i] = true;
                        (sp->train ? r.train_booked : r.hotel_booked) += 1;
                        r.booking_phase = std::max(r.booking_phase, s2.now());
                    }
                    r.completion = std::max(r.completion, s2.now());
                    s2.trace({{"kind", "booking"},
                              {"client", w.clients[i].hex()},
                              {"server", sp->train ? "train" : "hotel"},
                              {"result", booked ? "booked" : "unavailable"}});
                });
            });
        }
    }
    sim.run();

    r.outcomes.resize(w.clients.size());
    for (std::size_t i = 0; i < w.clients.size(); ++i) {
        if (got_train[i] && got_hotel[i]) {
            r.outcomes[i] = ClientOutcome::both;
        } else if (got_train[i]) {
            r.outcomes[i] = ClientOutcome::train_only;
        } else if (got_hotel[i]) {
            r.outcomes[i] = ClientOutcome::hotel_only;
        } else {
            r.outcomes[i] = ClientOutcome::none_denied;
        }
    }
}

} // namespace

ScenarioReport run_train_hotel(const TrainHotelConfig& cfg, std::uint64_t seed) {
    if (cfg.adversary_fraction < 0 || cfg.adversary_fraction > 0.5) {
        throw Error(ErrorCode::BadParameter, "adversary fraction must lie in [0, 0.5]");
    }
    sim::Simulator sim(seed, cfg.keep_trace);
    World w = build_world(cfg, sim);
    ScenarioReport r;
    r.seed = seed;
    r.vdf_enabled = cfg.vdf_enabled;
    r.adversary_fraction = cfg.adversary_fraction;
    sim.trace({{"kind", "scenario"},
               {"name", "train-hotel"},
               {"seed", seed},
               {"vdf", cfg.vdf_enabled},
               {"clients", cfg.clients}});
    if (cfg.vdf_enabled) {
        run_with_holds(cfg, sim, w, r);
    } else {
        run_racing(cfg, sim, w, r);
    }
    tally(r);
    sim.trace({{"kind", "summary"},
               {"both", r.both},
               {"single", r.single()},
               {"denied", r.denied},
               {"errors", r.error_events},
               {"deadlock", r.deadlock}});
    r.trace_digest = sim.log().digest();
    r.trace_lines = sim.log().count();
    r.trace = sim.log().lines();
    return r;
}

ScenarioReport run_timing(const TrainHotelConfig& cfg, std::uint64_t seed) {
    TrainHotelConfig c = cfg;
    c.clients = cfg.participants;
    return run_train_hotel(c, seed);
}

ScenarioReport run_adversary(const TrainHotelConfig& cfg, std::uint64_t seed) {
    const double f = cfg.adversary_fraction;
    if (f != 0.0 && (f < 0.30 - 1e-9 || f > 0.50 + 1e-9)) {
        throw Error(ErrorCode::BadParameter, "adversary fraction must lie in [0.30, 0.50]");
    }
    TrainHotelConfig c = cfg;
    c.vdf_enabled = true;
    return run_train_hotel(c, seed);
}

} // namespace reinshard::scenarios
