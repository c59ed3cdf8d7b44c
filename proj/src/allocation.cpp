#include "reinshard/allocation.hpp"

#include "reinshard/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace reinshard::allocation {

std::uint64_t extra_capacity(std::uint64_t storage_avail, std::uint64_t eta, std::uint64_t storage_per_block) {
    if (eta == 0 || storage_per_block == 0) {
        throw Error(ErrorCode::BadProfile, "pseudo count and per-block storage must be non-zero");
    }
    const unsigned __int128 need = static_cast<unsigned __int128>(eta) * storage_per_block;
    if (need > storage_avail) return 0;
    return static_cast<std::uint64_t>(storage_avail / need);
}

PowerReward power_reward(std::span<const double> ratios) {
    if (ratios.empty()) throw Error(ErrorCode::EmptyWindow, "no blocks in the reward window");
    bool clamped = false;
    double sum = 0.0;
    for (double r : ratios) {
        double c = r;
        if (!(c >= ratio_epsilon)) c = ratio_epsilon; // also catches NaN
        if (c > 1.0 - ratio_epsilon) c = 1.0 - ratio_epsilon;
        if (c != r) clamped = true;
        sum += -std::log1p(-c);
    }
    return {rational_from_double(static_cast<double>(ratios.size()) / sum), clamped};
}

Rational growth_reward(const Rational& theta_prev, const Rational& delta_prev, std::uint64_t t) {
    if (t == 0) throw Error(ErrorCode::BadParameter, "t must be at least 1");
    const Rational base = 1 + delta_prev;
    Rational out = theta_prev;
    for (std::uint64_t i = 0; i < t; ++i) out *= base;
    return out;
}

Rational selection_reward(const Rational& theta, const Rational& omega, const Rational& gamma) {
    if (theta == 0 || omega == 0) throw Error(ErrorCode::DegenerateProfile, "theta and omega must be non-zero");
    return 1 / theta + gamma / omega;
}

Rational delegation_reward(const Rational& theta, const Rational& omega, const Rational& gamma) {
    return theta + gamma * omega;
}

Rational mean_reward(std::span<const Rational> rewards) {
    if (rewards.empty()) return Rational{0};
    Rational sum{0};
    for (const Rational& r : rewards) sum += r;
    return sum / static_cast<long long>(rewards.size());
}

std::vector<Digest> validator_list(std::span<const ValidatorCandidate> candidates, const Rational& mean_prev) {
    std::vector<Digest> out;
    for (const ValidatorCandidate& c : candidates) {
        if (c.reward < mean_prev) continue;
        if (c.extra_capacity == 0) continue;
        if (c.pseudo_used > c.pseudo_limit) continue;
        if (!c.alpha_valid || c.pending) continue;
        out.push_back(c.pair);
    }
    if (out.empty()) throw Error(ErrorCode::EmptyValidatorSet, "no chain-pair qualifies as validator");
    return out;
}

std::uint64_t ValidatorState::chain_extra(std::size_t j) const {
    const NodeProfile& o = chains.at(j).owner;
    return extra_capacity(o.storage_avail, eta_x(), o.storage_per_block);
}

std::uint64_t ValidatorState::chain_capacity(std::size_t j) const {
    const std::uint64_t strength = chains.at(j).strength;
    const std::uint64_t room = strength >= k_max ? 0 : k_max - strength;
    return std::min(chain_extra(j), room);
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
    case Outcome::placed: return "placed";
    case Outcome::waited: return "waited";
    case Outcome::delegated: return "delegated";
    }
    return "?";
}

std::string_view to_string(Branch b) noexcept {
    switch (b) {
    case Branch::single_candidate: return "single_candidate";
    case Branch::max_stake: return "max_stake";
    case Branch::max_reward: return "max_reward";
    case Branch::lowest_digest: return "lowest_digest";
    case Branch::direct: return "direct";
    case Branch::over_pseudo_limit: return "over_pseudo_limit";
    case Branch::no_extra_capacity: return "no_extra_capacity";
    case Branch::no_candidate: return "no_candidate";
    case Branch::own_full: return "own_full";
    case Branch::empty_validator_set: return "empty_validator_set";
    }
    return "?";
}

std::uint8_t residual_bucket(std::uint64_t residual) noexcept {
    return static_cast<std::uint8_t>(std::min<std::uint64_t>(residual, 3));
}

Rational QTable::get(const QState& s, Action a) const {
    const auto it = entries.find({s, a});
    return it == entries.end() ? Rational{0} : it->second;
}

Rational QTable::max_over_actions(const QState& s) const {
    return std::max(get(s, Action::delegate), get(s, Action::disallow));
}

QUpdateResult q_update(QTable& table, const QState& state, Action action, const Rational& reward,
                       const Rational& delta, const Rational& next_max) {
    if (delta <= 0) throw Error(ErrorCode::ZeroLearningRate, "learning rate delta must be positive");
    QUpdateResult r;
    Rational rate = delta;
    if (rate > 1) {
        rate = 1;
        r.rate_clamped = true;
    }
    r.value = table.get(state, action) + rate * (reward + table.reserve_prob * next_max);
    table.entries[{state, action}] = r.value;
    return r;
}

Digest choose_delegate(const QTable& table, std::span<const DelegateCandidate> candidates) {
    const DelegateCandidate* best = nullptr;
    Rational best_q;
    for (const DelegateCandidate& c : candidates) {
        if (c.residual < 2) continue;
        const Rational q = table.get({c.pair, residual_bucket(c.residual - 1)}, Action::delegate);
        if (best == nullptr || q > best_q || (q == best_q && c.pair < best->pair)) {
            best = &c;
            best_q = q;
        }
    }
    if (best == nullptr) throw Error(ErrorCode::NoDelegate, "no delegate keeps spare capacity");
    return best->pair;
}

namespace {

AllocationDecision place(const ValidatorState& w, std::size_t j, Branch why) {
    AllocationDecision d;
    d.outcome = Outcome::placed;
    d.target_pair = w.chains[j].id;
    d.pseudo_id = j;
    d.reason = why;
    d.target_capacity = w.chain_capacity(j);
    return d;
}

AllocationDecision wait_or_delegate(std::span<const ValidatorState> validators, std::size_t winner,
                                    const QTable& qtable, std::uint64_t attempt, Branch why) {
    AllocationDecision d;
    d.outcome = Outcome::waited;
    d.reason = why;
    if (attempt == 0) return d;

    std::vector<DelegateCandidate> candidates;
    for (std::size_t v = 0; v < validators.size(); ++v) {
        if (v == winner || validators[v].chains.empty()) continue;
        candidates.push_back({validators[v].pair, validators[v].chain_capacity(0)});
    }
    try {
        const Digest target = choose_delegate(qtable, candidates);
        for (const DelegateCandidate& c : candidates) {
            if (c.pair == target) d.target_capacity = c.residual;
        }
        d.outcome = Outcome::delegated;
        d.target_pair = target;
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoDelegate) throw;
    }
    return d;
}

} // namespace

AllocationDecision allocate_pos_block(std::span<const ValidatorState> validators, std::optional<std::size_t> winner,
                                      const QTable& qtable, std::uint64_t attempt) {
    if (!winner || *winner >= validators.size() || validators[*winner].chains.empty()) {
        AllocationDecision d;
        d.reason = Branch::empty_validator_set;
        return d;
    }
    const std::size_t wi = *winner;
    const ValidatorState& w = validators[wi];
    const std::uint64_t eta_x = w.eta_x();

    if (eta_x > w.profile().pseudo_limit) return wait_or_delegate(validators, wi, qtable, attempt, Branch::over_pseudo_limit);

    const std::uint64_t k_extra = w.chain_extra(0);
    if (k_extra == 0) return wait_or_delegate(validators, wi, qtable, attempt, Branch::no_extra_capacity);
    const std::uint64_t k_cap = k_extra + w.chains[0].strength;

    if (k_extra > 1 && eta_x > 1) {
        std::vector<std::size_t> x;
        for (std::size_t j = 0; j < eta_x; ++j) {
            if (w.chain_extra(j) + w.chains[j].strength <= k_cap && w.chain_capacity(j) > 0) x.push_back(j);
        }
        if (x.empty()) return wait_or_delegate(validators, wi, qtable, attempt, Branch::no_candidate);
        if (x.size() == 1) return place(w, x.front(), Branch::single_candidate);

        std::uint64_t top_stake = 0;
        for (std::size_t j : x) top_stake = std::max(top_stake, w.chains[j].owner.stakes);
        std::vector<std::size_t> tied;
        for (std::size_t j : x) {
            if (w.chains[j].owner.stakes == top_stake) tied.push_back(j);
        }
        if (tied.size() == 1) return place(w, tied.front(), Branch::max_stake);

        std::vector<Rational> rewards;
        rewards.reserve(tied.size());
        for (std::size_t j : tied) {
            const NodeProfile& o = w.chains[j].owner;
            rewards.push_back(selection_reward(o.theta, o.omega, o.gamma));
        }
        const Rational top_reward = *std::max_element(rewards.begin(), rewards.end());
        std::vector<std::size_t> best;
        for (std::size_t k = 0; k < tied.size(); ++k) {
            if (rewards[k] == top_reward) best.push_back(tied[k]);
        }
        if (best.size() == 1) return place(w, best.front(), Branch::max_reward);
        const auto lowest = std::min_element(best.begin(), best.end(), [&](std::size_t a, std::size_t b) {
            return w.chains[a].id < w.chains[b].id;
        });
        return place(w, *lowest, Branch::lowest_digest);
    }

    // K^(A) == 1 or eta_x == 1: the winner's own sub-chain.
    if (w.chain_capacity(0) > 0) return place(w, 0, Branch::direct);
    return wait_or_delegate(validators, wi, qtable, attempt, Branch::own_full);
}

std::vector<std::size_t> batch_order(std::span<const IncomingBlock> blocks, bool parallel) {
    std::vector<std::size_t> order(blocks.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (parallel && blocks[a].memory_use != blocks[b].memory_use) {
            return blocks[a].memory_use > blocks[b].memory_use;
        }
        return blocks[a].arrival < blocks[b].arrival;
    });
    return order;
}

void apply_decision(std::vector<ValidatorState>& validators, std::size_t winner, const AllocationDecision& d) {
    auto consume = [](PseudoChainState& c) {
        ++c.strength;
        c.owner.storage_avail -= std::min(c.owner.storage_avail, c.owner.storage_per_block);
    };
    if (d.outcome == Outcome::placed) {
        consume(validators.at(winner).chains.at(d.pseudo_id.value()));
    } else if (d.outcome == Outcome::delegated) {
        for (ValidatorState& v : validators) {
            if (v.pair == d.target_pair.value()) {
                consume(v.chains.at(0));
                return;
            }
        }
        throw Error(ErrorCode::UnknownPair, "delegate not among validators");
    }
}

std::vector<BatchEntry> allocate_batch(std::vector<ValidatorState>& validators, std::size_t winner,
                                       std::span<const IncomingBlock> blocks, bool parallel, const QTable& qtable,
                                       std::uint64_t attempt) {
    std::vector<BatchEntry> out;
    out.reserve(blocks.size());
    for (std::size_t idx : batch_order(blocks, parallel)) {
        AllocationDecision d = allocate_pos_block(validators, winner, qtable, attempt);
        apply_decision(validators, winner, d);
        out.push_back({idx, std::move(d)});
    }
    return out;
}

} // namespace reinshard::allocation
