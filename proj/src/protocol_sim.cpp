#include "reinshard/protocol_sim.hpp"

#include "reinshard/allocation.hpp"
#include "reinshard/error.hpp"
#include "reinshard/sharding.hpp"
#include "reinshard/xshard.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>

namespace reinshard::protocol {

std::string_view to_string(Feedback f) noexcept { return f == Feedback::applied ? "applied" : "logged_only"; }

Feedback parse_feedback(std::string_view s) {
    if (s == "logged_only") return Feedback::logged_only;
    if (s == "applied") return Feedback::applied;
    throw Error(ErrorCode::ParseError, "unknown difficulty feedback '" + std::string(s) + "'");
}

void validate(const ProtocolConfig& cfg) {
    if (cfg.honest_nodes + cfg.adversarial_nodes == 0) throw Error(ErrorCode::BadParameter, "no nodes");
    if (cfg.k_max == 0 || cfg.ka_cap == 0) throw Error(ErrorCode::BadParameter, "K_max and K^(A) must be positive");
    if (cfg.epoch_blocks == 0) throw Error(ErrorCode::BadParameter, "epoch_blocks must be positive");
    if (cfg.reward <= 0) throw Error(ErrorCode::BadParameter, "R' must be positive");
    if (cfg.pos_target <= 0 || cfg.pow_target <= 0) throw Error(ErrorCode::BadParameter, "targets must be positive");
    vdf::check_timing(cfg.t_verify, cfg.t_eval);
    if (cfg.round_time <= cfg.t_eval + cfg.latency.max() + cfg.t_verify) {
        throw Error(ErrorCode::BadParameter, "round_time must exceed t_E + Gamma + t_V");
    }
}

std::uint64_t ProtocolTrace::produced(std::uint64_t round) const {
    for (const RoundInfo& r : rounds) {
        if (r.round == round) return std::min(r.honest_blocks + r.adversarial_blocks, k_max);
    }
    return 0;
}

double ProtocolTrace::adversarial_share() const {
    if (nodes.empty()) return 0.0;
    const auto adv = std::count_if(nodes.begin(), nodes.end(), [](const NodeInfo& n) { return !n.honest; });
    return static_cast<double>(adv) / static_cast<double>(nodes.size());
}

namespace {

vdf::VdfParams round_params(std::uint64_t seed, std::uint64_t round, const NodeId& node, SimTime tau,
                            const BigInt& pos_target, const vdf::CostModel& cost) {
    const Digest d = FieldHasher(tag::rng_stream).u64(seed).u64(round).digest(node).finish();
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | d.bytes[i];
    return vdf::setup(128, tau, pos_target, s, cost);
}

double ratio(const BigInt& num, const BigInt& den) { return to_double(Rational(num, den)); }

} // namespace

Bytes round_verify_key(std::uint64_t seed, std::uint64_t round, const NodeId& node, SimTime tau,
                       const BigInt& pos_target, const vdf::CostModel& cost) {
    return round_params(seed, round, node, tau, pos_target, cost).verify_key;
}

Election elect_leader(std::span<const chain::PowBlock> pows, std::span<const Bytes> verify_keys,
                      std::span<const Rational> rewards, const BigInt& pos_target) {
    if (pows.size() != verify_keys.size() || pows.size() != rewards.size()) {
        throw Error(ErrorCode::BadParameter, "election inputs differ in length");
    }
    Election e;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pows.size(); ++k) {
        if (rewards[k] <= 0) continue;
        if (!consensus::check_leader_ticket(pows[k], verify_keys[k], rewards[k], pos_target)) continue;
        e.eligible.push_back(k);
        const BigInt thr = consensus::leader_threshold(rewards[k], pos_target);
        const BigInt h = to_bigint(consensus::leader_hash(pows[k], verify_keys[k]));
        // h < thr for an eligible ticket; +1 keeps u inside (0, 1].
        const double u = ratio(h + 1, thr + 1);
        const double key = -std::log(u) / to_double(rewards[k]);
        if (!e.winner || key < best) {
            best = key;
            e.winner = k;
        }
    }
    return e;
}

namespace {

struct Delivery {
    std::uint64_t seq = 0;
    std::optional<chain::ChainPair> new_pair;
    PairId pair;
    chain::PosBlock block;
    std::uint64_t position = 0;
    std::uint64_t global_n = 0;
};

struct Node {
    NodeInfo info;
    chain::GlobalChain view;
    std::vector<Digest> adopted;
    std::uint64_t reported_n = 0;
    std::uint64_t next_seq = 0;
    std::map<std::uint64_t, std::shared_ptr<const Delivery>> buffer;
};

struct Pending {
    std::uint64_t attempt = 0;
};

class Runner {
public:
    Runner(const ProtocolConfig& cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed), sim_(seed, cfg.keep_trace) {
        validate(cfg_);
        pos_target_ = cfg_.pos_target;
        pow_target_ = cfg_.pow_target;
    }

    ProtocolTrace run() {
        genesis();
        for (std::uint64_t r = 0; r <= cfg_.rounds; ++r) {
            sim_.schedule(static_cast<SimTime>(r) * cfg_.round_time, sim::EventKind::MineAttempt,
                          [this, r](sim::Simulator&) {
                              take_samples(r);
                              if (r < cfg_.rounds) round(r);
                          });
        }
        sim_.run();
        run_sessions();

        trace_.digest = sim_.log().digest();
        trace_.trace_lines = sim_.log().count();
        trace_.trace = sim_.log().lines();
        return std::move(trace_);
    }

private:
    void genesis() {
        trace_.seed = seed_;
        trace_.k_max = cfg_.k_max;
        trace_.ka_cap = cfg_.ka_cap;
        const vdf::VdfParams params = vdf::setup(128, cfg_.t_eval, pos_target_, seed_, cfg_.cost);
        std::vector<chain::ChainPair> pairs;
        const std::uint64_t n = cfg_.honest_nodes + cfg_.adversarial_nodes;
        for (std::uint64_t i = 0; i < n; ++i) {
            NodeInfo info;
            const bool honest = i < cfg_.honest_nodes;
            info.id = node_id((honest ? "honest-" : "adversary-") + std::to_string(i));
            info.honest = honest;
            trace_.nodes.push_back(info);

            chain::ChainPair p;
            p.pow.prev_pow_hash = pairs.empty() ? Digest{} : pairs.back().id();
            p.pow.pseudo_rate = alpha_;
            p.pow.miner = info.id;
            p.pow.seal();
            p.k_max = cfg_.k_max;
            p.stakes = cfg_.stakes;
            chain::PosBlock b = chain::make_pos_block(p, params, info.id);
            trace_.blocks[b.id] = {b.id, p.id(), info.id, 0, false, true};
            p.sub_chain.push_back(std::move(b));
            own_pair_.push_back(p.id());
            pairs.push_back(std::move(p));
        }
        const chain::GlobalChain g(pairs);
        for (const NodeInfo& info : trace_.nodes) {
            Node node;
            node.info = info;
            node.view = g;
            for (const chain::ChainPair& p : g.pairs()) {
                for (const chain::PosBlock& b : p.sub_chain) node.adopted.push_back(b.id);
            }
            node.reported_n = g.pos_sum();
            nodes_.push_back(std::move(node));
        }
        sim_.trace({{"kind", "genesis"}, {"nodes", n}, {"pairs", g.pow_count()}, {"blocks", g.pos_sum()}});
    }

    void take_samples(std::uint64_t r) {
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            trace_.samples.push_back({r, sim_.now(), i, n.view.pos_sum(), n.reported_n, n.adopted});
        }
    }

    allocation::ValidatorState validator_of(const chain::GlobalChain& view, std::size_t j) const {
        allocation::ValidatorState v;
        v.pair = own_pair_[j];
        v.reward = cfg_.reward;
        v.k_max = cfg_.k_max;
        allocation::PseudoChainState c;
        c.id = own_pair_[j];
        c.strength = view.pair(own_pair_[j]).k_i();
        c.owner.pseudo_limit = 1;
        c.owner.pseudo_used = 1;
        c.owner.storage_avail = cfg_.ka_cap;
        c.owner.storage_per_block = 1;
        c.owner.stakes = cfg_.stakes;
        v.chains.push_back(c);
        return v;
    }

    void round(std::uint64_t r) {
        RoundInfo info;
        info.round = r;
        pending_.push_back({});

        std::vector<chain::PowBlock> pows;
        std::vector<Bytes> vks;
        std::vector<Rational> rewards;
        std::vector<vdf::VdfParams> params;
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            pows.push_back(nodes_[k].view.pair(own_pair_[k]).pow);
            params.push_back(round_params(seed_, r, nodes_[k].info.id, cfg_.t_eval, pos_target_, cfg_.cost));
            vks.push_back(params.back().verify_key);
            rewards.push_back(cfg_.reward);
        }
        const Election e = elect_leader(pows, vks, rewards, pos_target_);
        info.eligible = e.eligible.size();
        info.leader = e.winner;

        std::vector<std::shared_ptr<const Delivery>> out;
        std::optional<chain::GlobalChain> leader_view;
        if (e.winner) {
            const std::size_t w = *e.winner;
            chain::GlobalChain& work = leader_view.emplace(nodes_[w].view);
            std::deque<Pending> still;
            while (!pending_.empty()) {
                Pending p = pending_.front();
                pending_.pop_front();
                auto d = place(work, w, params[w], p, info);
                if (d) {
                    out.push_back(std::move(d));
                } else {
                    ++p.attempt;
                    still.push_back(p);
                }
            }
            pending_ = std::move(still);
        } else {
            for (Pending& p : pending_) ++p.attempt;
            info.branch = "no_leader";
        }
        info.pending = pending_.size();
        const bool adversarial = e.winner && !nodes_[*e.winner].info.honest;
        (adversarial ? info.adversarial_blocks : info.honest_blocks) = out.size();
        for (const auto& d : out) {
            trace_.blocks[d->block.id] = {d->block.id, d->pair, d->block.owner, r + 1, adversarial,
                                          d->new_pair.has_value()};
        }
        sim_.trace({{"kind", "round"},
                    {"round", r},
                    {"leader", e.winner ? nodes_[*e.winner].info.id.hex() : std::string()},
                    {"eligible", info.eligible},
                    {"blocks", out.size()},
                    {"pending", info.pending},
                    {"branch", info.branch}});
        trace_.rounds.push_back(info);

        if (!out.empty()) {
            const std::size_t w = *e.winner;
            sim_.schedule_in(cfg_.t_eval, sim::EventKind::VdfEvalDone,
                             [this, w, out](sim::Simulator&) { broadcast(w, out); });
            produced_total_ += out.size();
            if (produced_total_ / cfg_.epoch_blocks > epoch_) {
                epoch_ = produced_total_ / cfg_.epoch_blocks;
                retarget(w, *leader_view);
            }
        }
    }

    /// Leader-side handling of one incoming block against its working view.
    std::shared_ptr<const Delivery> place(chain::GlobalChain& work, std::size_t w,
                                          const vdf::VdfParams& params, const Pending& p, RoundInfo& info) {
        std::vector<allocation::ValidatorState> vs;
        for (std::size_t j = 0; j < nodes_.size(); ++j) vs.push_back(validator_of(work, j));
        const allocation::AllocationDecision d = allocation::allocate_pos_block(vs, w, qtable_, p.attempt);
        info.branch = std::string(allocation::to_string(d.reason));
        const NodeId& leader = nodes_[w].info.id;
        sim_.trace({{"kind", "allocation"},
                    {"branch", info.branch},
                    {"winner", leader.hex()},
                    {"pseudo_id", d.pseudo_id ? static_cast<std::int64_t>(*d.pseudo_id) : -1},
                    {"reason", allocation::to_string(d.outcome)}});

        auto del = std::make_shared<Delivery>();
        del->seq = next_seq_;
        if (d.outcome != allocation::Outcome::waited) {
            const PairId target = *d.target_pair;
            const chain::ChainPair& pair = work.pair(target);
            del->pair = target;
            del->position = pair.k_i();
            del->block = chain::make_pos_block(pair, params, leader);
            work.append_pos_block(target, del->block, del->position);
            if (d.outcome == allocation::Outcome::delegated) {
                const allocation::QState s{target, allocation::residual_bucket(d.target_capacity - 1)};
                allocation::q_update(qtable_, s, allocation::Action::delegate, cfg_.reward, Rational(1, 2),
                                     qtable_.max_over_actions(s));
            }
        } else if (d.reason == allocation::Branch::own_full) {
            const chain::ChainPair& own = work.pair(own_pair_[w]);
            chain::PowBlock pow;
            pow.prev_pow_hash = work.pairs().back().id();
            pow.pos_head_hash = own.tail_hash();
            pow.pseudo_rate = alpha_;
            pow.miner = leader;
            const std::uint64_t first = sim_.rng().stream("mining")();
            const auto nonce = consensus::mine(alpha_, pow.prev_pow_hash, pow.pos_head_hash, pow_target_, first,
                                               cfg_.mine_attempts);
            if (!nonce) return nullptr;
            pow.nonce = *nonce;
            pow.seal();
            chain::ChainPair fresh;
            fresh.pow = pow;
            fresh.k_max = cfg_.k_max;
            fresh.stakes = cfg_.stakes;
            del->block = chain::make_pos_block(fresh, params, leader);
            fresh.sub_chain.push_back(del->block);
            del->pair = fresh.id();
            del->position = 0;
            work.add_pair(fresh);
            del->new_pair = std::move(fresh);
            own_pair_[w] = del->pair;
            ++trace_.mined_pairs;
            info.branch = "mined_pair";
        } else {
            return nullptr;
        }
        del->global_n = work.pos_sum();
        ++next_seq_;
        return del;
    }

    void broadcast(std::size_t leader, const std::vector<std::shared_ptr<const Delivery>>& out) {
        auto& lat = sim_.rng().stream("latency");
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            const SimTime gamma = j == leader ? 0 : cfg_.latency.sample(lat);
            for (const auto& d : out) {
                sim_.schedule_in(gamma, sim::EventKind::BlockArrive, [this, j, d](sim::Simulator& s) {
                    s.schedule_in(cfg_.t_verify, sim::EventKind::VdfVerifyDone,
                                  [this, j, d](sim::Simulator&) { receive(j, d); });
                });
            }
        }
    }

    void receive(std::size_t j, const std::shared_ptr<const Delivery>& d) {
        Node& n = nodes_[j];
        n.buffer[d->seq] = d;
        while (!n.buffer.empty() && n.buffer.begin()->first == n.next_seq) {
            const std::shared_ptr<const Delivery> next = n.buffer.begin()->second;
            n.buffer.erase(n.buffer.begin());
            ++n.next_seq;
            adopt(j, *next);
        }
    }

    void adopt(std::size_t j, const Delivery& d) {
        Node& n = nodes_[j];
        bool ok = true;
        try {
            if (d.new_pair) {
                ok = chain::validate_chain_pair(*d.new_pair, n.view.bounds());
                if (ok) n.view.add_pair(*d.new_pair);
            } else {
                const chain::PosBlock& b = d.block;
                ok = b.id == b.compute_id() && b.vdf.input == vdf::derive_input(b.parent_pos_hash, b.prev_pos_hash) &&
                     vdf::verify(b.verification_key, b.vdf, seed_);
                if (ok) n.view.append_pos_block(d.pair, b, d.position);
            }
        } catch (const Error&) {
            ok = false;
        }
        if (!ok) {
            ++trace_.rejected_deliveries;
            sim_.trace({{"kind", "reject"}, {"node", n.info.id.hex()}, {"block", d.block.id.hex()}});
            return;
        }
        n.adopted.push_back(d.block.id);
        n.reported_n = d.global_n;
        sim_.trace({{"kind", "adopt"}, {"node", j}, {"block", d.block.id.hex()}, {"n", d.global_n}});
    }

    /// `view` is the leader's working view, which already holds this round's placements.
    void retarget(std::size_t winner, const chain::GlobalChain& view) {
        std::vector<consensus::PowPairInput> pw;
        std::vector<consensus::PosPairInput> ps;
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            pw.push_back({1, cfg_.reward});
            ps.push_back({validator_of(view, j).chain_capacity(0), cfg_.stakes});
        }
        const auto a = consensus::adjust_pow_difficulty(pw, winner, pow_target_);
        const auto b = consensus::adjust_pos_difficulty(ps, winner, pending_.size(), pos_target_);
        DifficultyLog log;
        log.epoch = epoch_;
        log.blocks = produced_total_;
        log.pow_factor = reinshard::to_string(a.factor);
        log.pos_factor = reinshard::to_string(b.factor);
        log.pow_fallback = std::string(consensus::to_string(a.fallback));
        log.pos_fallback = std::string(consensus::to_string(b.fallback));
        log.applied = cfg_.feedback == Feedback::applied;
        if (log.applied) {
            pow_target_ = a.target;
            pos_target_ = b.target;
        }
        log.pow_target = to_digest(pow_target_).hex();
        log.pos_target = to_digest(pos_target_).hex();
        sim_.trace({{"kind", "difficulty"},
                    {"epoch", log.epoch},
                    {"pow_factor", log.pow_factor},
                    {"pos_factor", log.pos_factor},
                    {"applied", log.applied}});
        trace_.difficulty.push_back(std::move(log));
    }

    /// Point-to-point sessions between nodes of different shards of the final chain.
    void run_sessions() {
        const chain::GlobalChain& view = nodes_.front().view;
        trace_.final_chain = view;
        trace_.shards = sharding::build_shards(view, cfg_.shard_mode);
        if (cfg_.sessions == 0 || nodes_.size() < 2) return;
        const std::vector<sharding::Shard>& shards = trace_.shards;
        xshard::Directory dir;
        std::vector<NodeId> placed;
        for (const Node& n : nodes_) {
            for (const sharding::Shard& s : shards) {
                if (s.anchor == n.info.id) {
                    dir.add({n.info.id, s.id, cfg_.stakes, true});
                    placed.push_back(n.info.id);
                }
            }
        }
        if (placed.size() < 2) return;
        xshard::XShardConfig xc;
        xc.tau_prime = cfg_.tau_prime;
        xc.t_eval = cfg_.t_eval;
        xc.t_verify = cfg_.t_verify;
        xc.latency = cfg_.latency;
        xshard::SessionManager mgr(sim_, xc, dir);
        const SimTime start = sim_.now() + cfg_.round_time;
        for (std::uint64_t k = 0; k < cfg_.sessions; ++k) {
            const NodeId a = placed[k % placed.size()];
            const NodeId b = placed[(k + 1) % placed.size()];
            sim_.schedule(start, sim::EventKind::TxStep, [&mgr, a, b](sim::Simulator&) { mgr.start(a, {b}); });
        }
        sim_.run();
        for (const Digest& id : mgr.order()) {
            const xshard::TxSession& s = mgr.session(id);
            trace_.waits.push_back({s.id, s.inter_shard, s.state == xshard::TxState::LedgerUpdated, s.advertised_wait,
                                    s.observed_wait, cfg_.t_verify, cfg_.t_eval});
        }
    }

    const ProtocolConfig& cfg_;
    std::uint64_t seed_;
    sim::Simulator sim_;
    ProtocolTrace trace_;
    std::vector<Node> nodes_;
    std::vector<PairId> own_pair_;
    std::deque<Pending> pending_;
    allocation::QTable qtable_;
    BigInt pos_target_;
    BigInt pow_target_;
    Rational alpha_{1, 10};
    std::uint64_t next_seq_ = 0;
    std::uint64_t produced_total_ = 0;
    std::uint64_t epoch_ = 0;
};

} // namespace

ProtocolTrace run_protocol(const ProtocolConfig& cfg, std::uint64_t seed) { return Runner(cfg, seed).run(); }

} // namespace reinshard::protocol
