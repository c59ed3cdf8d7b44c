#include "reinshard/sim.hpp"

#include "reinshard/error.hpp"

namespace reinshard::sim {

std::string_view to_string(EventKind k) noexcept {
    switch (k) {
    case EventKind::MineAttempt: return "MineAttempt";
    case EventKind::VdfEvalDone: return "VdfEvalDone";
    case EventKind::VdfVerifyDone: return "VdfVerifyDone";
    case EventKind::BlockArrive: return "BlockArrive";
    case EventKind::HoldExpire: return "HoldExpire";
    case EventKind::TxStep: return "TxStep";
    case EventKind::EpochBoundary: return "EpochBoundary";
    case EventKind::AdversaryAct: return "AdversaryAct";
    }
    return "?";
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::string_view name) {
    const Digest d = FieldHasher(tag::rng_stream).u64(master_seed).text(name).finish();
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d.bytes[static_cast<std::size_t>(i)];
    return v;
}

std::mt19937_64& RngStreams::stream(std::string_view name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) {
        it = streams_.emplace(std::string(name), std::mt19937_64(derive_stream_seed(seed_, name))).first;
    }
    return it->second;
}

SimTime LatencyModel::sample(std::mt19937_64& rng) const {
    if (kind == Kind::constant || high <= low) return low;
    return std::uniform_int_distribution<SimTime>(low, high)(rng);
}

void EventLog::write(const nlohmann::json& record) {
    std::string line = record.dump();
    Sha256 h;
    h.update(digest_.bytes);
    h.update(line);
    digest_ = h.finish();
    ++count_;
    if (keep_) lines_.push_back(std::move(line));
}

EventId Simulator::schedule(SimTime at, EventKind kind, Action action) {
    if (at < now_) {
        throw Error(ErrorCode::PastEvent,
                    "event at " + std::to_string(at) + " is before now=" + std::to_string(now_));
    }
    const EventId id = next_seq_++;
    queue_.push({at, id, kind, std::move(action)});
    live_.insert(id);
    return id;
}

bool Simulator::cancel(EventId id) {
    if (live_.erase(id) == 0) return false;
    cancelled_.insert(id);
    ++cancelled_total_;
    return true;
}

std::uint64_t Simulator::run_until(SimTime limit) {
    std::uint64_t n = 0;
    while (!queue_.empty() && queue_.top().at <= limit) {
        Entry e = queue_.top();
        queue_.pop();
        if (cancelled_.erase(e.seq) > 0) continue;
        live_.erase(e.seq);
        if (e.at < now_) throw Error(ErrorCode::InvariantBroken, "clock moved backwards");
        now_ = e.at;
        ++processed_;
        ++n;
        e.action(*this);
    }
    return n;
}

void Simulator::trace(nlohmann::json record) {
    nlohmann::json line = nlohmann::json::object();
    line["t"] = now_;
    for (auto& [k, v] : record.items()) line[k] = std::move(v);
    log_.write(line);
}

} // namespace reinshard::sim
