#pragma once

#include "reinshard/crypto.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace reinshard::sim {

/// Simulated time in integer microseconds.
using SimTime = std::int64_t;

inline constexpr SimTime micros_per_second = 1'000'000;

constexpr SimTime seconds(double s) { return static_cast<SimTime>(s * 1e6 + (s >= 0 ? 0.5 : -0.5)); }
constexpr double to_seconds(SimTime t) { return static_cast<double>(t) / 1e6; }

enum class EventKind { MineAttempt, VdfEvalDone, VdfVerifyDone, BlockArrive, HoldExpire, TxStep, EpochBoundary, AdversaryAct };

std::string_view to_string(EventKind k) noexcept;

/// Independent mt19937_64 streams keyed by name and seeded from
/// SHA-256(tag, master seed, name).
class RngStreams {
public:
    explicit RngStreams(std::uint64_t master_seed) : seed_(master_seed) {}
    std::mt19937_64& stream(std::string_view name);
    std::uint64_t master_seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::map<std::string, std::mt19937_64, std::less<>> streams_;
};

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view name);

struct LatencyModel {
    enum class Kind { constant, uniform };
    Kind kind = Kind::constant;
    SimTime low = 100'000; // constant value, or lower bound
    SimTime high = 100'000;

    static LatencyModel constant(SimTime v) { return {Kind::constant, v, v}; }
    static LatencyModel uniform(SimTime lo, SimTime hi) { return {Kind::uniform, lo, hi}; }

    SimTime sample(std::mt19937_64& rng) const;
    SimTime max() const noexcept { return kind == Kind::constant ? low : high; }
};

/// JSON-lines trace with a running digest over every emitted line.
class EventLog {
public:
    explicit EventLog(bool keep_lines = true) : keep_(keep_lines) {}

    void write(const nlohmann::json& record);
    const std::vector<std::string>& lines() const noexcept { return lines_; }
    std::uint64_t count() const noexcept { return count_; }
    /// Hash chain d_n = SHA-256(d_{n-1} || line_n), d_0 = 0.
    const Digest& digest() const noexcept { return digest_; }

private:
    bool keep_;
    std::vector<std::string> lines_;
    std::uint64_t count_ = 0;
    Digest digest_;
};

using EventId = std::uint64_t;

class Simulator {
public:
    using Action = std::function<void(Simulator&)>;

    explicit Simulator(std::uint64_t seed, bool keep_trace = true) : rng_(seed), log_(keep_trace) {}

    SimTime now() const noexcept { return now_; }

    /// Throws PastEvent if at < now().
    EventId schedule(SimTime at, EventKind kind, Action action);
    EventId schedule_in(SimTime delay, EventKind kind, Action action) { return schedule(now_ + delay, kind, std::move(action)); }
    /// Returns false if the event already ran or was cancelled.
    bool cancel(EventId id);

    /// Processes events with at <= limit. Returns the number processed.
    std::uint64_t run_until(SimTime limit);
    /// Runs to quiescence.
    std::uint64_t run() { return run_until(std::numeric_limits<SimTime>::max()); }

    std::size_t pending() const noexcept { return queue_.size() - cancelled_.size(); }
    std::uint64_t processed() const noexcept { return processed_; }
    std::uint64_t cancelled_count() const noexcept { return cancelled_total_; }

    RngStreams& rng() noexcept { return rng_; }
    EventLog& log() noexcept { return log_; }
    const EventLog& log() const noexcept { return log_; }

    /// Writes {"t": now, ...fields} to the trace.
    void trace(nlohmann::json record);

private:
    struct Entry {
        SimTime at;
        EventId seq;
        EventKind kind;
        Action action;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const noexcept {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    SimTime now_ = 0;
    EventId next_seq_ = 0;
    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    std::set<EventId> cancelled_;
    std::set<EventId> live_;
    std::uint64_t processed_ = 0;
    std::uint64_t cancelled_total_ = 0;
    RngStreams rng_;
    EventLog log_;
};

} // namespace reinshard::sim
