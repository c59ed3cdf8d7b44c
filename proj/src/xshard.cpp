#include "reinshard/xshard.hpp"

#include "reinshard/error.hpp"

#include <algorithm>

namespace reinshard::xshard {

std::string_view to_string(TxState s) noexcept {
    switch (s) {
    case TxState::Init: return "Init";
    case TxState::PriorityProved: return "PriorityProved";
    case TxState::InfoFetched: return "InfoFetched";
    case TxState::ReceiverResolved: return "ReceiverResolved";
    case TxState::HoldInit: return "HoldInit";
    case TxState::HoldConfirmed: return "HoldConfirmed";
    case TxState::ChannelSet: return "ChannelSet";
    case TxState::ProtocolUp: return "ProtocolUp";
    case TxState::TxActive: return "TxActive";
    case TxState::LedgerUpdated: return "LedgerUpdated";
    case TxState::TimedOut: return "TimedOut";
    case TxState::Rejected: return "Rejected";
    }
    return "?";
}

std::string_view to_string(TxMode m) noexcept { return m == TxMode::P2P ? "P2P" : "P2MP"; }

TxState parse_state(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(TxState::Rejected); ++i) {
        const auto st = static_cast<TxState>(i);
        if (to_string(st) == s) return st;
    }
    throw Error(ErrorCode::ParseError, "unknown session state '" + std::string(s) + "'");
}

int step_of(TxState s) noexcept {
    switch (s) {
    case TxState::PriorityProved: return 1;
    case TxState::InfoFetched: return 3;
    case TxState::ReceiverResolved: return 4;
    case TxState::HoldInit: return 5;
    case TxState::HoldConfirmed: return 7;
    case TxState::ChannelSet: return 9;
    case TxState::ProtocolUp: return 10;
    case TxState::TxActive: return 11;
    case TxState::LedgerUpdated: return 12;
    default: return 0;
    }
}

bool is_legal_transition(TxState from, TxState to) noexcept {
    using S = TxState;
    switch (from) {
    case S::Init: return to == S::PriorityProved || to == S::Rejected;
    case S::PriorityProved: return to == S::InfoFetched || to == S::Rejected;
    case S::InfoFetched: return to == S::ReceiverResolved || to == S::Rejected;
    case S::ReceiverResolved: return to == S::HoldInit || to == S::ChannelSet || to == S::Rejected;
    case S::HoldInit: return to == S::HoldConfirmed || to == S::TimedOut || to == S::Rejected;
    case S::HoldConfirmed: return to == S::ChannelSet || to == S::TimedOut;
    case S::ChannelSet: return to == S::ProtocolUp;
    case S::ProtocolUp: return to == S::TxActive;
    case S::TxActive: return to == S::LedgerUpdated;
    default: return false;
    }
}

SimTime hold_duration(SimTime tau_prime, std::uint64_t pairs_involved, SimTime latency, SimTime tau) {
    if (tau_prime >= tau) {
        throw Error(ErrorCode::ContractViolation, "delay factor tau' must be strictly below tau");
    }
    if (pairs_involved == 0) throw Error(ErrorCode::BadParameter, "at least one chain-pair must be involved");
    if (tau_prime < 0 || latency < 0) throw Error(ErrorCode::BadParameter, "negative duration");
    return tau_prime * static_cast<SimTime>(pairs_involved) + latency;
}

std::vector<LedgerEntry> update_ledgers(TxSession& session, bool committed) {
    if (session.state != TxState::TxActive) {
        throw Error(ErrorCode::IllegalState,
                    "ledger update needs TxActive, session is " + std::string(to_string(session.state)));
    }
    std::vector<LedgerEntry> out;
    out.push_back({session.id, session.sender, true, 1, committed});
    for (const NodeId& r : session.receivers) out.push_back({session.id, r, false, 1, committed});
    session.state = TxState::LedgerUpdated;
    session.committed = committed;
    session.ledger = out;
    return out;
}

const Party* Directory::find(const NodeId& id) const {
    const auto it = parties.find(id);
    return it == parties.end() ? nullptr : &it->second;
}

SessionManager::SessionManager(sim::Simulator& sim, XShardConfig cfg, Directory directory)
    : sim_(sim), cfg_(std::move(cfg)), dir_(std::move(directory)) {
    vdf::check_timing(cfg_.t_verify, cfg_.t_eval);
    if (cfg_.holds_enabled) (void)hold_duration(cfg_.tau_prime, 1, 0, cfg_.t_eval);
    if (cfg_.vdf_iterations == 0) throw Error(ErrorCode::BadParameter, "zero VDF iterations");
    vdf_.iterations = cfg_.vdf_iterations;
    vdf_.tau = cfg_.t_eval;
    const Digest vk = FieldHasher(tag::vdf_keys).text("session-verify").finish();
    vdf_.verify_key.assign(vk.bytes.begin(), vk.bytes.end());
}

SessionManager::Live& SessionManager::live(const Digest& id) {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::IllegalState, "unknown session " + id.hex());
    return it->second;
}

const TxSession& SessionManager::session(const Digest& id) const {
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::IllegalState, "unknown session " + id.hex());
    return it->second.s;
}

std::size_t SessionManager::active_holders(const NodeId& receiver) const { return bound_.count(receiver); }

SimTime SessionManager::sample_latency() { return cfg_.latency.sample(sim_.rng().stream("latency")); }

void SessionManager::advance(Live& l, TxState next, std::string detail) {
    if (!is_legal_transition(l.s.state, next)) {
        throw Error(ErrorCode::IllegalState, "illegal transition " + std::string(to_string(l.s.state)) + " -> " +
                                                 std::string(to_string(next)));
    }
    l.s.state = next;
    l.s.history.emplace_back(next, sim_.now());
    if (!detail.empty()) l.s.detail = detail;
    sim_.trace({{"kind", "session"},
                {"session", l.s.id.hex()},
                {"step", step_of(next)},
                {"state", to_string(next)},
                {"detail", detail}});
}

Digest SessionManager::start(const NodeId& sender, std::vector<NodeId> receivers, SessionOptions opts) {
    FieldHasher h(tag::session_id);
    h.digest(sender).u64(receivers.size());
    for (const NodeId& r : receivers) h.digest(r);
    h.u64(counter_++).u64(static_cast<std::uint64_t>(sim_.now()));
    const Digest id = h.finish();

    Live l;
    l.s.id = id;
    l.s.sender = sender;
    l.s.receivers = std::move(receivers);
    l.s.mode = l.s.receivers.size() > 1 ? TxMode::P2MP : TxMode::P2P;
    l.s.started_at = sim_.now();
    l.s.history.emplace_back(TxState::Init, sim_.now());
    l.opts = std::move(opts);
    Live& ref = sessions_.emplace(id, std::move(l)).first->second;
    order_.push_back(id);
    sim_.trace({{"kind", "session"}, {"session", id.hex()}, {"step", 0}, {"state", "Init"},
                {"detail", std::string(to_string(ref.s.mode))}});

    const Party* s = dir_.find(sender);
    bool ok = s != nullptr && s->valid && !ref.s.receivers.empty();
    std::set<NodeId> seen;
    for (const NodeId& r : ref.s.receivers) {
        const Party* p = dir_.find(r);
        if (p == nullptr || !p->valid || r == sender || !seen.insert(r).second) ok = false;
        if (ok && p->shard != s->shard) ref.s.inter_shard = true;
    }
    if (!ok) {
        advance(ref, TxState::Rejected, "invalid party");
        return id;
    }
    advance(ref, TxState::PriorityProved, "psi=" + std::to_string(priority(s->stakes)));
    sim_.schedule_in(sample_latency(), sim::EventKind::TxStep, [this, id](sim::Simulator&) { on_fetch(id); });
    return id;
}

void SessionManager::on_fetch(const Digest& id) {
    Live& l = live(id);
    advance(l, TxState::InfoFetched);
    advance(l, TxState::ReceiverResolved, std::to_string(l.s.receivers.size()) + " receiver(s)");

    if (!(cfg_.holds_enabled && l.s.inter_shard)) {
        l.s.eligible_at = sim_.now();
        waiting_.push_back(id);
        try_grant();
        return;
    }

    std::set<Digest> shards;
    for (const NodeId& r : l.s.receivers) shards.insert(dir_.find(r)->shard);
    HoldTicket t;
    t.session = id;
    t.sender = l.s.sender;
    t.receivers = l.s.receivers;
    t.priority = priority(dir_.find(l.s.sender)->stakes);
    t.pairs_involved = cfg_.pairs_involved.value_or(shards.size());
    t.latency = sample_latency();
    t.hold_duration = hold_duration(cfg_.tau_prime, t.pairs_involved, t.latency, cfg_.t_eval);
    l.s.hold = t;
    l.s.hold_init_at = sim_.now();
    l.s.advertised_wait = cfg_.tau_prime;
    l.s.timer = sim_.now() + cfg_.tau_prime;
    advance(l, TxState::HoldInit, "advertised wait " + std::to_string(cfg_.tau_prime) + "us");

    if (l.opts.withhold_confirmation) {
        sim_.schedule_in(t.hold_duration, sim::EventKind::HoldExpire, [this, id](sim::Simulator&) {
            Live& w = live(id);
            if (w.s.state == TxState::HoldInit) advance(w, TxState::TimedOut, "hold confirmation withheld");
        });
        return;
    }
    sim_.schedule_in(cfg_.t_verify, sim::EventKind::VdfVerifyDone, [this, id](sim::Simulator&) { on_verify_done(id); });
    sim_.schedule_in(cfg_.tau_prime, sim::EventKind::HoldExpire, [this, id](sim::Simulator&) { on_window_end(id); });
}

void SessionManager::on_verify_done(const Digest& id) {
    Live& l = live(id);
    if (l.s.state != TxState::HoldInit) return;
    vdf::VdfArtifact proof = vdf::eval(vdf_, vdf::derive_input(id, l.s.sender));
    if (l.opts.forged_proof) proof.output.bytes[0] ^= 0x01;
    if (!vdf::verify(vdf_.verify_key, proof, sim_.rng().master_seed())) {
        advance(l, TxState::Rejected, "priority proof failed verification");
        return;
    }
    if (sim_.now() >= l.s.hold_init_at + cfg_.tau_prime) {
        advance(l, TxState::TimedOut, "verification did not finish inside the hold window");
        return;
    }
    l.verified = true;
}

void SessionManager::on_window_end(const Digest& id) {
    Live& l = live(id);
    if (l.s.state != TxState::HoldInit) return;
    if (!l.verified) {
        advance(l, TxState::TimedOut, "hold window elapsed before verification");
        return;
    }
    l.s.observed_wait = sim_.now() - l.s.hold_init_at;
    l.s.eligible_at = sim_.now();
    l.s.timer = -1;
    waiting_.push_back(id);
    try_grant();
}

void SessionManager::try_grant() {
    std::vector<Live*> queue;
    for (const Digest& id : waiting_) queue.push_back(&live(id));
    std::sort(queue.begin(), queue.end(), [this](const Live* a, const Live* b) {
        const std::uint64_t pa = priority(dir_.find(a->s.sender)->stakes);
        const std::uint64_t pb = priority(dir_.find(b->s.sender)->stakes);
        if (pa != pb) return pa > pb;
        if (a->s.eligible_at != b->s.eligible_at) return a->s.eligible_at < b->s.eligible_at;
        return a->s.id < b->s.id;
    });
    // A blocked session reserves its receivers so lower-priority sessions
    // cannot overtake it indefinitely.
    std::set<NodeId> reserved;
    std::vector<Digest> still;
    for (Live* l : queue) {
        bool free = true;
        for (const NodeId& r : l->s.receivers) {
            if (bound_.count(r) > 0 || reserved.count(r) > 0) free = false;
        }
        if (free) {
            grant(*l);
        } else {
            reserved.insert(l->s.receivers.begin(), l->s.receivers.end());
            still.push_back(l->s.id);
        }
    }
    waiting_ = std::move(still);
}

void SessionManager::grant(Live& l) {
    const Digest id = l.s.id;
    for (const NodeId& r : l.s.receivers) bound_[r] = id;
    if (l.s.hold) {
        l.s.hold->granted_at = sim_.now();
        l.s.hold->expires_at = sim_.now() + l.s.hold->hold_duration;
        l.s.timer = l.s.hold->expires_at;
        advance(l, TxState::HoldConfirmed, "observed wait " + std::to_string(l.s.observed_wait) + "us");
        l.expiry = sim_.schedule(l.s.hold->expires_at, sim::EventKind::HoldExpire,
                                 [this, id](sim::Simulator&) { on_expire(id); });
        l.expiry_armed = true;
        if (l.opts.abandon_after_grant) return;
    }
    sim_.schedule_in(sample_latency(), sim::EventKind::TxStep, [this, id](sim::Simulator&) { on_channel(id); });
}

void SessionManager::on_channel(const Digest& id) {
    Live& l = live(id);
    const bool hold_path = l.s.hold.has_value();
    if (hold_path && l.s.state != TxState::HoldConfirmed) return;
    if (hold_path && sim_.now() >= l.s.hold->expires_at) return;
    advance(l, TxState::ChannelSet, std::string(to_string(l.s.mode)));
    if (l.expiry_armed) {
        sim_.cancel(l.expiry);
        l.expiry_armed = false;
    }
    l.s.timer = -1;
    advance(l, TxState::ProtocolUp);
    advance(l, TxState::TxActive);
    const SimTime work = cfg_.t_eval * static_cast<SimTime>(l.s.receivers.size());
    sim_.schedule_in(work, sim::EventKind::TxStep, [this, id](sim::Simulator&) { on_tx_done(id); });
}

void SessionManager::on_expire(const Digest& id) {
    Live& l = live(id);
    l.expiry_armed = false;
    if (l.s.state != TxState::HoldConfirmed) return;
    advance(l, TxState::TimedOut, "hold expired before channel setup");
    release(l);
    try_grant();
}

void SessionManager::on_tx_done(const Digest& id) {
    sim_.schedule_in(sample_latency(), sim::EventKind::TxStep, [this, id](sim::Simulator&) { on_ledger(id); });
}

void SessionManager::on_ledger(const Digest& id) {
    Live& l = live(id);
    CommitResult c{true, "committed"};
    if (l.opts.commit) c = l.opts.commit(l.s);
    update_ledgers(l.s, c.committed);
    l.s.history.emplace_back(TxState::LedgerUpdated, sim_.now());
    l.s.detail = c.detail;
    sim_.trace({{"kind", "session"},
                {"session", id.hex()},
                {"step", step_of(TxState::LedgerUpdated)},
                {"state", "LedgerUpdated"},
                {"detail", c.detail},
                {"entries", l.s.ledger.size()}});
    release(l);
    try_grant();
}

void SessionManager::release(Live& l) {
    for (const NodeId& r : l.s.receivers) {
        const auto it = bound_.find(r);
        if (it != bound_.end() && it->second == l.s.id) bound_.erase(it);
    }
    l.s.released_at = sim_.now();
}

namespace {

TxSession run_single(const NodeId& sender, const std::vector<NodeId>& receivers, const Directory& dir,
                     const XShardConfig& cfg, std::uint64_t seed, SessionOptions opts) {
    sim::Simulator sim(seed);
    SessionManager mgr(sim, cfg, dir);
    const Digest id = mgr.start(sender, receivers, std::move(opts));
    sim.run();
    TxSession s = mgr.session(id);
    if (s.state == TxState::Rejected && s.detail == "invalid party") {
        throw Error(ErrorCode::InvalidParty, "session rejected: invalid party");
    }
    return s;
}

} // namespace

TxSession intra_shard_tx(const NodeId& sender, const std::vector<NodeId>& receivers, const Directory& dir,
                         const XShardConfig& cfg, std::uint64_t seed) {
    const Party* s = dir.find(sender);
    if (s == nullptr) throw Error(ErrorCode::InvalidParty, "unknown sender");
    for (const NodeId& r : receivers) {
        const Party* p = dir.find(r);
        if (p == nullptr) throw Error(ErrorCode::InvalidParty, "unknown receiver " + r.hex());
        if (p->shard != s->shard) throw Error(ErrorCode::InvalidParty, "receiver outside the sender's shard");
    }
    return run_single(sender, receivers, dir, cfg, seed, {});
}

TxSession inter_shard_tx(const NodeId& sender, const std::vector<NodeId>& receivers, const Directory& dir,
                         const XShardConfig& cfg, std::uint64_t seed, SessionOptions opts) {
    return run_single(sender, receivers, dir, cfg, seed, std::move(opts));
}

} // namespace reinshard::xshard
