#pragma once

#include "reinshard/crypto.hpp"
#include "reinshard/sim.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace reinshard::scenarios {

using sim::SimTime;

enum class AdversaryCapability { with_vdf, without_vdf };

std::string_view to_string(AdversaryCapability c) noexcept;
AdversaryCapability parse_capability(std::string_view s);

struct TrainHotelConfig {
    std::uint64_t train_tickets = 5;
    std::uint64_t hotel_tickets = 5;
    std::uint64_t clients = 50;      // request generators in outcome runs
    std::uint64_t participants = 10; // competing participants in timing runs
    bool vdf_enabled = true;
    SimTime t_eval = sim::seconds(3);
    SimTime t_verify = sim::seconds(1);
    SimTime tau_prime = sim::seconds(2.5);
    sim::LatencyModel latency = sim::LatencyModel::constant(sim::seconds(0.1));
    SimTime request_jitter = sim::seconds(1); // spread of racing requests without holds
    double adversary_fraction = 0.0;
    AdversaryCapability capability = AdversaryCapability::with_vdf;
    std::uint64_t spam_per_adversary = 2;
    bool keep_trace = true;
};

enum class ClientOutcome { both, train_only, hotel_only, none_denied, none_error };

std::string_view to_string(ClientOutcome o) noexcept;

/// Wait figures of one inter-shard session, kept for the chain-wait audit.
struct WaitRecord {
    Digest session;
    bool inter_shard = false;
    bool completed = false; // reached LedgerUpdated
    SimTime advertised = -1; // tau_1
    SimTime observed = -1;   // tau_2
    SimTime t_verify = 0;
    SimTime t_eval = 0;
};

/// Interval during which a session had a receiver bound.
struct HoldInterval {
    Digest receiver;
    Digest session;
    SimTime from = 0;
    SimTime to = 0;
};

struct ScenarioReport {
    std::uint64_t seed = 0;
    bool vdf_enabled = true;
    double adversary_fraction = 0.0;
    std::vector<ClientOutcome> outcomes; // one per client, adversarial clients included
    std::vector<bool> adversarial;       // parallel to outcomes
    std::uint64_t both = 0;
    std::uint64_t train_only = 0;
    std::uint64_t hotel_only = 0;
    std::uint64_t denied = 0;
    std::uint64_t errored = 0;
    std::uint64_t train_booked = 0;
    std::uint64_t hotel_booked = 0;
    std::uint64_t error_events = 0;
    std::uint64_t adversary_rejections = 0; // forged proofs and direct bookings refused
    SimTime completion = 0;                 // last session or request finished
    SimTime booking_phase = 0;              // last successful booking
    bool deadlock = false;
    std::vector<WaitRecord> waits;
    std::vector<HoldInterval> holds;
    std::vector<std::string> trace;         // JSON lines, when kept
    Digest trace_digest;
    std::uint64_t trace_lines = 0;

    std::uint64_t single() const noexcept { return train_only + hotel_only; }
};

ScenarioReport run_train_hotel(const TrainHotelConfig& cfg, std::uint64_t seed);

/// Timing run: `participants` clients compete instead of `clients`.
ScenarioReport run_timing(const TrainHotelConfig& cfg, std::uint64_t seed);

/// Requires adversary_fraction in [0.30, 0.50] or exactly 0.
ScenarioReport run_adversary(const TrainHotelConfig& cfg, std::uint64_t seed);

/// n * t_E + tau'.
SimTime theoretical_completion(std::uint64_t participants, SimTime t_eval, SimTime tau_prime);

} // namespace reinshard::scenarios
