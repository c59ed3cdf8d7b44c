#pragma once

#include "reinshard/crypto.hpp"
#include "reinshard/numeric.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace reinshard::allocation {

struct NodeProfile {
    std::uint64_t pseudo_limit = 1;      // eta_s
    std::uint64_t pseudo_used = 0;       // eta_x
    std::uint64_t storage_avail = 0;     // G_a
    std::uint64_t storage_per_block = 1; // G_e
    std::uint64_t stakes = 0;            // S_a
    Rational omega{1};                   // power reward
    Rational theta{1};                   // growth reward
    Rational earn_actual{0};             // O_a
    Rational earn_expected{1};           // O_e
    Rational growth_rate{0};             // delta
    Rational gamma{1};
};

/// K^(A) = floor(G_a / (eta * G_e)) when eta * G_e <= G_a, else 0.
std::uint64_t extra_capacity(std::uint64_t storage_avail, std::uint64_t eta, std::uint64_t storage_per_block);

inline constexpr double ratio_epsilon = 1e-6;

struct PowerReward {
    Rational omega;
    bool clamped = false;
};

/// omega = K / sum_j ln(1 / (1 - ratio_j)), ratios clamped to [eps, 1 - eps].
PowerReward power_reward(std::span<const double> ratios);

/// theta_t = theta_{t-1} * (1 + delta_{t-1})^t.
Rational growth_reward(const Rational& theta_prev, const Rational& delta_prev, std::uint64_t t);

/// R = 1/theta + gamma/omega.
Rational selection_reward(const Rational& theta, const Rational& omega, const Rational& gamma);

/// R' = theta + gamma * omega.
Rational delegation_reward(const Rational& theta, const Rational& omega, const Rational& gamma);

struct ValidatorCandidate {
    Digest pair;
    Rational reward{0}; // R' at t
    std::uint64_t extra_capacity = 0;
    std::uint64_t pseudo_used = 0;
    std::uint64_t pseudo_limit = 0;
    bool alpha_valid = true;
    bool pending = false;
};

Rational mean_reward(std::span<const Rational> rewards);

/// Pairs with R' >= mean of the previous round, spare capacity, eta_x <= eta_s,
/// a valid alpha_m and no pending pair. Throws EmptyValidatorSet.
std::vector<Digest> validator_list(std::span<const ValidatorCandidate> candidates, const Rational& mean_prev);

struct PseudoChainState {
    Digest id;
    std::uint64_t strength = 0; // current K_j
    NodeProfile owner;
};

/// A validator's view for Algorithm 1. chains[0] is its own sub-chain and
/// chains[0].owner is its own profile.
struct ValidatorState {
    Digest pair;
    std::vector<PseudoChainState> chains;
    Rational reward{0}; // R'
    std::uint64_t k_max = 8;

    const NodeProfile& profile() const { return chains.at(0).owner; }
    std::uint64_t eta_x() const noexcept { return chains.size(); }
    /// Extra capacity K_j^(A) of chain j under the current eta_x.
    std::uint64_t chain_extra(std::size_t j) const;
    /// Blocks chain j can still take: min(K_j^(A), K_max - K_j).
    std::uint64_t chain_capacity(std::size_t j) const;
};

enum class Outcome { placed, waited, delegated };

enum class Branch {
    single_candidate,
    max_stake,
    max_reward,
    lowest_digest,
    direct,
    over_pseudo_limit,
    no_extra_capacity,
    no_candidate,
    own_full,
    empty_validator_set,
};

std::string_view to_string(Outcome o) noexcept;
std::string_view to_string(Branch b) noexcept;

struct AllocationDecision {
    Outcome outcome = Outcome::waited;
    std::optional<Digest> target_pair;
    std::optional<std::size_t> pseudo_id; // index into the winner's chains
    Branch reason = Branch::empty_validator_set;
    std::uint64_t target_capacity = 0;    // capacity of the target at decision time
};

enum class Action { delegate, disallow };

struct QState {
    Digest pair;
    std::uint8_t residual_bucket = 0; // 0, 1, 2, 3 = "3 or more"

    friend auto operator<=>(const QState&, const QState&) = default;
};

std::uint8_t residual_bucket(std::uint64_t residual) noexcept;

struct QTable {
    std::map<std::pair<QState, Action>, Rational> entries;
    Rational reserve_prob{1}; // P_x = gamma

    Rational get(const QState& s, Action a) const;
    Rational max_over_actions(const QState& s) const;
};

struct QUpdateResult {
    Rational value;
    bool rate_clamped = false;
};

/// Q(s,a) += delta * (R' + P_x * next_max). delta is clamped to (0, 1].
QUpdateResult q_update(QTable& table, const QState& state, Action action, const Rational& reward,
                       const Rational& delta, const Rational& next_max);

struct DelegateCandidate {
    Digest pair;
    std::uint64_t residual = 0; // capacity before accepting
};

/// argmax Q((pair, bucket(residual - 1)), delegate) over candidates keeping
/// positive capacity after accepting; ties by lowest digest. Throws NoDelegate.
Digest choose_delegate(const QTable& table, std::span<const DelegateCandidate> candidates);

/// Algorithm 1 for one incoming block. `attempt` counts earlier rounds in
/// which this block already waited; the first wait never delegates.
AllocationDecision allocate_pos_block(std::span<const ValidatorState> validators, std::optional<std::size_t> winner,
                                      const QTable& qtable, std::uint64_t attempt = 0);

struct IncomingBlock {
    Digest id;
    std::uint64_t arrival = 0;
    std::uint64_t memory_use = 0;
};

struct BatchEntry {
    std::size_t block = 0; // index into the input span
    AllocationDecision decision;
};

/// Allocates blocks one at a time, updating the validators' chain strengths and
/// storage after each placement. Sequential batches are served FCFS by
/// arrival; parallel instances by decreasing memory use. Entries come back in
/// service order.
std::vector<BatchEntry> allocate_batch(std::vector<ValidatorState>& validators, std::size_t winner,
                                       std::span<const IncomingBlock> blocks, bool parallel,
                                       const QTable& qtable, std::uint64_t attempt = 0);

/// Order in which allocate_batch serves `blocks` (indices into the span).
std::vector<std::size_t> batch_order(std::span<const IncomingBlock> blocks, bool parallel);

/// Applies a placed/delegated decision to the validator views.
void apply_decision(std::vector<ValidatorState>& validators, std::size_t winner, const AllocationDecision& d);

} // namespace reinshard::allocation
