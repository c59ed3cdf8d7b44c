#pragma once

#include "reinshard/protocol_sim.hpp"
#include "reinshard/train_hotel.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reinshard::properties {

struct PropertyHarnessParams {
    std::uint64_t rounds = 0;  // R_d, first sample round audited
    std::uint64_t horizon = 0; // aleph, last sample round audited; 0 = end of trace
    std::uint64_t window = 40; // L
    std::uint64_t growth = 0;  // K, per-round credit cap in the growth bound; 0 = K_max of the trace
    double upsilon = 0.0;      // adversarial stake ratio
    double rho = 1.0;          // honest ratio
    double epsilon = 0.1;
};

/// Throws BadParameter unless upsilon + rho <= 1, 0 < epsilon < 1, and for the
/// quality checker L <= K_max and K^(A) <= K_max - L.
void validate(const PropertyHarnessParams& p);

struct Verdict {
    bool pass = true;
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
    std::string first_violation;
    double worst = 0.0; // checker-specific extreme (e.g. max adversarial fraction)

    void fail(std::string why);
};

/// Every honest node's adopted length at sample aleph is at least its length at
/// R_d plus the blocks produced in rounds R_d..aleph-1 (each capped at K),
/// and honest nodes report the same N at each sample.
Verdict check_chain_growth(const protocol::ProtocolTrace& trace, const PropertyHarnessParams& params);

/// Every L-window of every honest node's final adoption sequence (genesis
/// excluded) holds at most upsilon / (1 - upsilon) + epsilon adversarial blocks.
Verdict check_chain_quality(const protocol::ProtocolTrace& trace, const PropertyHarnessParams& params);

/// exp(-(eps^2 * upsilon * L) + ln R): the reported failure bound, with f taken
/// as the identity.
double quality_failure_bound(const PropertyHarnessParams& params, std::uint64_t rounds);

/// At every sample time, any two honest chains are prefix-related.
Verdict check_common_prefix(const protocol::ProtocolTrace& trace);

/// Every completed inter-shard session has advertised == observed wait and
/// t_V < wait < t_E.
Verdict check_chain_wait(std::span<const scenarios::WaitRecord> waits);

/// Honest-only protocol run audited for growth, prefix and wait.
protocol::ProtocolConfig honest_suite_config();

/// 6 honest and 2 adversarial nodes, K_max 48, K^(A) 8, 48 rounds: the smallest
/// setting where an L = 40 window satisfies K^(A) <= K_max - L.
protocol::ProtocolConfig quality_suite_config();

/// L = 40, epsilon = 0.1, upsilon = 0.25.
PropertyHarnessParams quality_suite_params();

struct SuiteResult {
    std::uint64_t seed = 0;
    Verdict growth;
    Verdict prefix;
    Verdict wait;
    Verdict quality;
    Digest honest_digest;
    Digest quality_digest;
};

/// One seed of the full suite: an honest run and a mixed run.
SuiteResult run_suite(std::uint64_t seed);

struct FixtureResult {
    std::string name;
    bool rejected = false; // the checker flagged the planted violation
};

/// Plants one violation per checker into traces built from `seed`.
std::vector<FixtureResult> run_fixtures(std::uint64_t seed);

namespace fixtures {

/// Honest trace with one sample of one node cut short.
protocol::ProtocolTrace truncated(protocol::ProtocolTrace trace);
/// Marks L consecutive adopted blocks adversarial.
protocol::ProtocolTrace adversarial_window(protocol::ProtocolTrace trace, std::uint64_t window);
/// Replaces the last block of one honest node's final sample with a foreign id.
protocol::ProtocolTrace forked(protocol::ProtocolTrace trace);
/// One wait record with advertised != observed.
std::vector<scenarios::WaitRecord> mismatched_wait(std::vector<scenarios::WaitRecord> waits);
/// One wait record with tau == t_E.
std::vector<scenarios::WaitRecord> boundary_wait(std::vector<scenarios::WaitRecord> waits);

} // namespace fixtures

} // namespace reinshard::properties
