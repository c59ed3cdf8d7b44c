#pragma once

#include "reinshard/crypto.hpp"
#include "reinshard/sim.hpp"
#include "reinshard/vdf.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace reinshard::xshard {

using sim::SimTime;

enum class TxState {
    Init,
    PriorityProved,
    InfoFetched,
    ReceiverResolved,
    HoldInit,
    HoldConfirmed,
    ChannelSet,
    ProtocolUp,
    TxActive,
    LedgerUpdated,
    TimedOut,
    Rejected,
};

enum class TxMode { P2P, P2MP };

std::string_view to_string(TxState s) noexcept;
std::string_view to_string(TxMode m) noexcept;
/// Step number in the twelve-step figure (1..12) of the step that enters `s`;
/// 0 for Init and the terminal failure states.
int step_of(TxState s) noexcept;
bool is_legal_transition(TxState from, TxState to) noexcept;
TxState parse_state(std::string_view s);

/// psi: total stakes earned.
inline std::uint64_t priority(std::uint64_t stakes) noexcept { return stakes; }

/// True if (psi_a, id_a) is served before (psi_b, id_b): higher psi, then lower digest.
inline bool outranks(std::uint64_t psi_a, const NodeId& a, std::uint64_t psi_b, const NodeId& b) noexcept {
    return psi_a != psi_b ? psi_a > psi_b : a < b;
}

/// tau' * D + Gamma. Throws ContractViolation if tau' >= tau, BadParameter if D == 0.
SimTime hold_duration(SimTime tau_prime, std::uint64_t pairs_involved, SimTime latency, SimTime tau);

struct HoldTicket {
    Digest session;
    NodeId sender;
    std::vector<NodeId> receivers;
    std::uint64_t priority = 0;
    std::uint64_t pairs_involved = 1; // D
    SimTime latency = 0;              // Gamma
    SimTime hold_duration = 0;
    SimTime granted_at = -1;
    SimTime expires_at = -1;
};

struct LedgerEntry {
    Digest session;
    NodeId party;
    bool is_sender = false;
    std::uint64_t reward = 1;
    bool committed = false;
};

struct TxSession {
    Digest id;
    NodeId sender;
    std::vector<NodeId> receivers;
    TxMode mode = TxMode::P2P;
    TxState state = TxState::Init;
    bool inter_shard = false;
    SimTime timer = -1; // active timer deadline, -1 when none
    std::vector<std::pair<TxState, SimTime>> history;
    std::optional<HoldTicket> hold;
    SimTime started_at = 0;
    SimTime hold_init_at = -1;
    SimTime eligible_at = -1;
    SimTime released_at = -1;
    SimTime advertised_wait = -1; // tau_1
    SimTime observed_wait = -1;   // tau_2
    bool committed = false;
    std::string detail;
    std::vector<LedgerEntry> ledger;
};

/// Pre: state == TxActive. Writes one entry per party, moves to LedgerUpdated.
std::vector<LedgerEntry> update_ledgers(TxSession& session, bool committed);

struct Party {
    NodeId id;
    Digest shard;
    std::uint64_t stakes = 0;
    bool valid = true;
};

struct Directory {
    std::map<NodeId, Party> parties;

    void add(const Party& p) { parties[p.id] = p; }
    const Party* find(const NodeId& id) const;
};

struct CommitResult {
    bool committed = false;
    std::string detail;
};

struct SessionOptions {
    /// Called once the transaction phase ends; decides the atomic commit.
    std::function<CommitResult(const TxSession&)> commit;
    bool forged_proof = false;         // proof fails verification at the receivers
    bool withhold_confirmation = false; // validating pair never confirms the hold
    bool abandon_after_grant = false;  // sender takes the hold and never opens the channel
};

struct XShardConfig {
    SimTime tau_prime = sim::seconds(2.5); // delay factor
    SimTime t_eval = sim::seconds(3);      // t_E, equal to the VDF tau
    SimTime t_verify = sim::seconds(1);    // t_V
    sim::LatencyModel latency = sim::LatencyModel::constant(sim::seconds(0.1));
    bool holds_enabled = true;
    std::optional<std::uint64_t> pairs_involved; // default: distinct receiver shards
    std::uint64_t vdf_iterations = 64;           // real proof checked at HoldInit
};

/// Drives cross- and intra-shard sessions as simulator events.
class SessionManager {
public:
    SessionManager(sim::Simulator& sim, XShardConfig cfg, Directory directory);

    /// Starts a session at the current simulated time. Invalid parties end in
    /// Rejected immediately.
    Digest start(const NodeId& sender, std::vector<NodeId> receivers, SessionOptions opts = {});

    const TxSession& session(const Digest& id) const;
    const std::vector<Digest>& order() const noexcept { return order_; }
    const XShardConfig& config() const noexcept { return cfg_; }
    const Directory& directory() const noexcept { return dir_; }
    Directory& directory() noexcept { return dir_; }

    /// Sessions that currently hold or are bound to `receiver`.
    std::size_t active_holders(const NodeId& receiver) const;

private:
    struct Live {
        TxSession s;
        SessionOptions opts;
        sim::EventId expiry = 0;
        bool expiry_armed = false;
        bool verified = false;
    };

    void advance(Live& l, TxState next, std::string detail = {});
    void on_fetch(const Digest& id);
    void on_verify_done(const Digest& id);
    void on_window_end(const Digest& id);
    void try_grant();
    void grant(Live& l);
    void on_channel(const Digest& id);
    void on_expire(const Digest& id);
    void on_tx_done(const Digest& id);
    void on_ledger(const Digest& id);
    void release(Live& l);
    SimTime sample_latency();
    Live& live(const Digest& id);

    sim::Simulator& sim_;
    XShardConfig cfg_;
    Directory dir_;
    vdf::VdfParams vdf_;
    std::map<Digest, Live> sessions_;
    std::vector<Digest> order_;
    std::vector<Digest> waiting_; // eligible for a grant
    std::map<NodeId, Digest> bound_;
    std::uint64_t counter_ = 0;
};

/// Runs one intra-shard session to completion on a fresh simulator. Throws
/// InvalidParty if any party is unknown, invalid, or outside the sender's shard.
TxSession intra_shard_tx(const NodeId& sender, const std::vector<NodeId>& receivers, const Directory& dir,
                         const XShardConfig& cfg, std::uint64_t seed = 1);

/// Runs one inter-shard session to completion. Throws InvalidParty.
TxSession inter_shard_tx(const NodeId& sender, const std::vector<NodeId>& receivers, const Directory& dir,
                         const XShardConfig& cfg, std::uint64_t seed = 1, SessionOptions opts = {});

} // namespace reinshard::xshard
