#pragma once

#include "reinshard/crypto.hpp"

#include <cstdint>
#include <vector>

namespace reinshard::scenarios {

struct ShardBiasConfig {
    std::uint64_t pairs = 5;          // honest chain-pairs with equal R'
    std::uint64_t first_seed = 1;
    std::uint64_t seeds = 200;
    std::uint64_t preferred_pair = 0; // the adversary asks for this pair; allocation ignores it
    std::uint64_t max_rounds = 64;    // election rounds tried per seed before giving up
};

struct ShardBiasReport {
    std::vector<std::uint64_t> counts; // adversary's shard, by pair index
    std::uint64_t placed = 0;
    std::uint64_t unplaced = 0;
    double chi2 = 0.0;
    std::uint64_t df = 0;
    double p_value = 1.0;
    bool pass = false; // p > 0.01
};

/// Index of the pair whose single-block shard receives the adversary's block
/// for one seed, or -1 if no leader emerged within max_rounds.
std::int64_t adversary_shard_index(const ShardBiasConfig& cfg, std::uint64_t seed);

/// Chi-square uniformity test of the adversary's shard over all seeds.
ShardBiasReport run_shard_bias(const ShardBiasConfig& cfg);

/// Pearson statistic against a uniform expectation and its upper-tail p-value.
double chi_square_statistic(const std::vector<std::uint64_t>& counts);
double chi_square_p_value(double statistic, std::uint64_t df);

} // namespace reinshard::scenarios
