#include "reinshard/properties.hpp"

#include "reinshard/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace reinshard::properties {

void validate(const PropertyHarnessParams& p) {
    if (p.upsilon < 0 || p.upsilon >= 1) throw Error(ErrorCode::BadParameter, "upsilon must lie in [0, 1)");
    if (p.rho < 0 || p.rho > 1) throw Error(ErrorCode::BadParameter, "rho must lie in [0, 1]");
    if (p.upsilon + p.rho > 1 + 1e-12) throw Error(ErrorCode::BadParameter, "upsilon + rho exceeds 1");
    if (p.epsilon <= 0 || p.epsilon >= 1) throw Error(ErrorCode::BadParameter, "epsilon must lie in (0, 1)");
    if (p.window == 0) throw Error(ErrorCode::BadParameter, "window must be positive");
    if (p.horizon != 0 && p.horizon < p.rounds) throw Error(ErrorCode::BadParameter, "horizon precedes R_d");
}

void Verdict::fail(std::string why) {
    pass = false;
    ++violations;
    if (first_violation.empty()) first_violation = std::move(why);
}

namespace {

/// samples[round][node] for honest nodes.
std::map<std::uint64_t, std::map<std::size_t, const protocol::Sample*>> honest_samples(
    const protocol::ProtocolTrace& t) {
    std::map<std::uint64_t, std::map<std::size_t, const protocol::Sample*>> out;
    for (const protocol::Sample& s : t.samples) {
        if (s.node < t.nodes.size() && t.nodes[s.node].honest) out[s.round][s.node] = &s;
    }
    return out;
}

bool is_prefix(const std::vector<Digest>& a, const std::vector<Digest>& b) {
    return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

} // namespace

Verdict check_chain_growth(const protocol::ProtocolTrace& trace, const PropertyHarnessParams& params) {
    validate(params);
    Verdict v;
    const auto by_round = honest_samples(trace);
    if (by_round.empty()) return v;
    const std::uint64_t last = by_round.rbegin()->first;
    const std::uint64_t horizon = params.horizon == 0 ? last : std::min(params.horizon, last);
    const std::uint64_t cap = params.growth == 0 ? trace.k_max : params.growth;

    for (const auto& [round, nodes] : by_round) {
        std::optional<std::uint64_t> n;
        for (const auto& [node, s] : nodes) {
            if (n && *n != s->reported_n) {
                v.fail("honest nodes report different N at round " + std::to_string(round));
            }
            n = s->reported_n;
        }
    }

    const auto start = by_round.find(params.rounds);
    if (start == by_round.end()) {
        v.fail("no sample at R_d=" + std::to_string(params.rounds));
        return v;
    }
    for (const auto& [node, base] : start->second) {
        std::uint64_t credit = 0;
        for (std::uint64_t aleph = params.rounds; aleph <= horizon; ++aleph) {
            if (aleph > params.rounds) {
                const std::uint64_t produced = trace.produced(aleph - 1);
                credit += std::min(produced, cap);
            }
            const auto at = by_round.find(aleph);
            if (at == by_round.end() || at->second.count(node) == 0) continue;
            const protocol::Sample* s = at->second.at(node);
            ++v.checked;
            const std::uint64_t bound = base->length + credit;
            v.worst = std::max(v.worst, static_cast<double>(bound) - static_cast<double>(s->length));
            if (s->length < bound) {
                v.fail("node " + std::to_string(node) + " has length " + std::to_string(s->length) + " < " +
                       std::to_string(bound) + " at round " + std::to_string(aleph));
            }
        }
    }
    return v;
}

Verdict check_chain_quality(const protocol::ProtocolTrace& trace, const PropertyHarnessParams& params) {
    validate(params);
    if (params.window > trace.k_max) throw Error(ErrorCode::BadParameter, "window L exceeds K_max");
    if (trace.ka_cap > trace.k_max - params.window) {
        throw Error(ErrorCode::BadParameter, "K^(A) must not exceed K_max - L");
    }
    Verdict v;
    const double limit = params.upsilon / (1.0 - params.upsilon) + params.epsilon;
    const auto by_round = honest_samples(trace);
    if (by_round.empty()) return v;
    for (const auto& [node, s] : by_round.rbegin()->second) {
        std::vector<bool> adv;
        for (const Digest& id : s->chain) {
            const auto it = trace.blocks.find(id);
            if (it == trace.blocks.end()) {
                v.fail("node " + std::to_string(node) + " adopted an unknown block");
                continue;
            }
            if (it->second.round == 0) continue; // genesis
            adv.push_back(it->second.adversarial);
        }
        if (adv.size() < params.window) continue;
        std::uint64_t count = static_cast<std::uint64_t>(std::count(adv.begin(), adv.begin() + params.window, true));
        for (std::size_t lo = 0;; ++lo) {
            const double frac = static_cast<double>(count) / static_cast<double>(params.window);
            ++v.checked;
            v.worst = std::max(v.worst, frac);
            if (frac > limit + 1e-12) {
                v.fail("node " + std::to_string(node) + " window at " + std::to_string(lo) + " has adversarial fraction " +
                       std::to_string(frac));
            }
            const std::size_t hi = lo + params.window;
            if (hi >= adv.size()) break;
            count += adv[hi] ? 1 : 0;
            count -= adv[lo] ? 1 : 0;
        }
    }
    return v;
}

double quality_failure_bound(const PropertyHarnessParams& params, std::uint64_t rounds) {
    const double e = params.epsilon;
    return std::exp(-(e * e * params.upsilon * static_cast<double>(params.window)) +
                    std::log(static_cast<double>(std::max<std::uint64_t>(rounds, 1))));
}

Verdict check_common_prefix(const protocol::ProtocolTrace& trace) {
    Verdict v;
    for (const auto& [round, nodes] : honest_samples(trace)) {
        for (auto a = nodes.begin(); a != nodes.end(); ++a) {
            for (auto b = std::next(a); b != nodes.end(); ++b) {
                ++v.checked;
                const auto& ca = a->second->chain;
                const auto& cb = b->second->chain;
                if (!is_prefix(ca, cb) && !is_prefix(cb, ca)) {
                    v.fail("nodes " + std::to_string(a->first) + " and " + std::to_string(b->first) +
                           " diverge at round " + std::to_string(round));
                }
            }
        }
    }
    return v;
}

Verdict check_chain_wait(std::span<const scenarios::WaitRecord> waits) {
    Verdict v;
    for (const scenarios::WaitRecord& w : waits) {
        if (!w.inter_shard || !w.completed) continue;
        ++v.checked;
        if (w.advertised != w.observed) {
            v.fail("session " + w.session.hex().substr(0, 16) + " advertised " + std::to_string(w.advertised) +
                   "us but waited " + std::to_string(w.observed) + "us");
        } else if (!(w.t_verify < w.advertised && w.advertised < w.t_eval)) {
            v.fail("session " + w.session.hex().substr(0, 16) + " wait " + std::to_string(w.advertised) +
                   "us outside (t_V, t_E)");
        }
    }
    return v;
}

namespace fixtures {

protocol::ProtocolTrace truncated(protocol::ProtocolTrace trace) {
    for (auto it = trace.samples.rbegin(); it != trace.samples.rend(); ++it) {
        if (trace.nodes.at(it->node).honest && !it->chain.empty()) {
            it->chain.pop_back();
            it->length = it->length == 0 ? 0 : it->length - 1;
            break;
        }
    }
    return trace;
}

protocol::ProtocolTrace adversarial_window(protocol::ProtocolTrace trace, std::uint64_t window) {
    if (trace.samples.empty()) return trace;
    std::uint64_t marked = 0;
    for (const Digest& id : trace.samples.back().chain) {
        auto it = trace.blocks.find(id);
        if (it == trace.blocks.end() || it->second.round == 0) continue;
        it->second.adversarial = true;
        if (++marked == window) break;
    }
    return trace;
}

protocol::ProtocolTrace forked(protocol::ProtocolTrace trace) {
    for (auto it = trace.samples.rbegin(); it != trace.samples.rend(); ++it) {
        if (trace.nodes.at(it->node).honest && !it->chain.empty()) {
            it->chain.back() = FieldHasher(tag::pos_block).text("fork").finish();
            break;
        }
    }
    return trace;
}

std::vector<scenarios::WaitRecord> mismatched_wait(std::vector<scenarios::WaitRecord> waits) {
    for (scenarios::WaitRecord& w : waits) {
        if (w.inter_shard && w.completed) {
            w.observed = w.advertised + 1;
            return waits;
        }
    }
    waits.push_back({Digest{}, true, true, sim::seconds(2.5), sim::seconds(2.5) + 1, sim::seconds(1), sim::seconds(3)});
    return waits;
}

std::vector<scenarios::WaitRecord> boundary_wait(std::vector<scenarios::WaitRecord> waits) {
    for (scenarios::WaitRecord& w : waits) {
        if (w.inter_shard && w.completed) {
            w.advertised = w.t_eval;
            w.observed = w.t_eval;
            return waits;
        }
    }
    waits.push_back({Digest{}, true, true, sim::seconds(3), sim::seconds(3), sim::seconds(1), sim::seconds(3)});
    return waits;
}

} // namespace fixtures

} // namespace reinshard::properties

namespace reinshard::properties {

protocol::ProtocolConfig honest_suite_config() {
    protocol::ProtocolConfig c;
    c.keep_trace = false;
    return c;
}

protocol::ProtocolConfig quality_suite_config() {
    protocol::ProtocolConfig c;
    c.honest_nodes = 6;
    c.adversarial_nodes = 2;
    c.k_max = 48;
    c.ka_cap = 8;
    c.rounds = 48;
    c.sessions = 0;
    c.keep_trace = false;
    return c;
}

PropertyHarnessParams quality_suite_params() {
    PropertyHarnessParams p;
    p.window = 40;
    p.upsilon = 0.25;
    p.rho = 0.75;
    p.epsilon = 0.1;
    return p;
}

SuiteResult run_suite(std::uint64_t seed) {
    SuiteResult r;
    r.seed = seed;
    const protocol::ProtocolTrace honest = protocol::run_protocol(honest_suite_config(), seed);
    r.growth = check_chain_growth(honest, {});
    r.prefix = check_common_prefix(honest);
    r.wait = check_chain_wait(honest.waits);
    r.honest_digest = honest.digest;
    const protocol::ProtocolTrace mixed = protocol::run_protocol(quality_suite_config(), seed);
    r.quality = check_chain_quality(mixed, quality_suite_params());
    r.quality_digest = mixed.digest;
    return r;
}

std::vector<FixtureResult> run_fixtures(std::uint64_t seed) {
    const protocol::ProtocolTrace honest = protocol::run_protocol(honest_suite_config(), seed);
    const protocol::ProtocolTrace mixed = protocol::run_protocol(quality_suite_config(), seed);
    const PropertyHarnessParams qp = quality_suite_params();
    return {
        {"growth_truncated", !check_chain_growth(fixtures::truncated(honest), {}).pass},
        {"quality_adversarial_window",
         !check_chain_quality(fixtures::adversarial_window(mixed, qp.window), qp).pass},
        {"prefix_forked", !check_common_prefix(fixtures::forked(honest)).pass},
        {"wait_mismatched", !check_chain_wait(fixtures::mismatched_wait(honest.waits)).pass},
        {"wait_boundary", !check_chain_wait(fixtures::boundary_wait(honest.waits)).pass},
    };
}

} // namespace reinshard::properties
