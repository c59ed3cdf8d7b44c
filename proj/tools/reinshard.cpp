#include "reinshard/bench.hpp"
#include "reinshard/config.hpp"
#include "reinshard/conformance.hpp"
#include "reinshard/error.hpp"
#include "reinshard/properties.hpp"
#include "reinshard/protocol_sim.hpp"
#include "reinshard/serialize.hpp"
#include "reinshard/train_hotel.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

using nlohmann::json;
using namespace reinshard;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_check = 1;
constexpr int exit_usage = 2;

#ifndef REINSHARD_GOLDEN_VECTORS
#define REINSHARD_GOLDEN_VECTORS "tests/data/golden_vectors.json"
#endif

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(text);
    std::string item;
    auto num = [&](const std::string& s) {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size()) throw Error(ErrorCode::ParseError, "bad seed '" + s + "'");
        return static_cast<std::uint64_t>(v);
    };
    try {
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            const std::size_t dots = item.find("..");
            if (dots == std::string::npos) {
                out.push_back(num(item));
                continue;
            }
            const std::uint64_t lo = num(item.substr(0, dots));
            const std::uint64_t hi = num(item.substr(dots + 2));
            if (hi < lo) throw Error(ErrorCode::ParseError, "empty seed range '" + item + "'");
            for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
        }
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::ParseError, "bad seed list '" + text + "'");
    }
    if (out.empty()) throw Error(ErrorCode::ParseError, "seed list is empty");
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& text) { return parse_seeds(text); }

/// Runs f(seed) for every seed on `jobs` threads; results keep seed order.
template <class R, class F>
std::vector<R> run_seeds(const std::vector<std::uint64_t>& seeds, unsigned jobs, F f) {
    std::vector<R> out(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                out[i] = f(seeds[i]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size())));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// What every command produces before it is written out.
struct Output {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> trace;
    json report = json::object();
    bool pass = true;
    std::map<std::string, std::string> extra_files;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << std::fixed << v;
    std::string s = os.str();
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
}

std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
        os << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return os.str();
}

void add_trace(Output& out, std::uint64_t seed, const std::vector<std::string>& lines) {
    for (const std::string& l : lines) {
        json j = json::parse(l);
        j["seed"] = seed;
        out.trace.push_back(j.dump());
    }
}

struct Cli {
    std::string config_path;
    std::string seeds;
    unsigned jobs = 1;
    std::string out_dir = "reinshard-out";
    std::string format = "csv";
    double te = 0, tv = 0, delay = 0, adversary = 0;
    std::string capability;
    std::string mode;
    std::uint64_t rounds = 0, nodes = 0;
    bool expect_deadlock = false;
    std::string vectors = REINSHARD_GOLDEN_VECTORS;

    CLI::Option* vdf_opt = nullptr;
    CLI::Option* no_vdf_opt = nullptr;
    CLI::Option* te_opt = nullptr;
    CLI::Option* tv_opt = nullptr;
    CLI::Option* delay_opt = nullptr;
    CLI::Option* adversary_opt = nullptr;
    CLI::Option* capability_opt = nullptr;
    CLI::Option* mode_opt = nullptr;
    CLI::Option* rounds_opt = nullptr;
    CLI::Option* nodes_opt = nullptr;
    CLI::Option* seeds_opt = nullptr;

    // bench
    std::string bench_what = "all";
    std::string sizes = "1000,10000,100000,1000000";
    std::string validators = "1,10,100";
    std::string zetas = "10000,100000,1000000";
    std::string timing_te = "3,5,7,9";

    SimConfig config() const {
        SimConfig c = config_path.empty() ? SimConfig{} : load_config(config_path);
        if (vdf_opt->count()) c.vdf_enabled = true;
        if (no_vdf_opt->count()) c.vdf_enabled = false;
        if (te_opt->count()) c.t_E = sim::seconds(te);
        if (tv_opt->count()) c.t_V = sim::seconds(tv);
        if (delay_opt->count()) c.tau_prime = sim::seconds(delay);
        if (adversary_opt->count()) c.adversary_fraction = adversary;
        if (capability_opt->count()) c.capability = capability;
        if (mode_opt->count()) c.mode = sharding::parse_mode(mode);
        if (rounds_opt->count()) c.rounds = rounds;
        if (nodes_opt->count()) c.n_nodes = nodes;
        validate(c);
        return c;
    }

    std::vector<std::uint64_t> seed_list(const SimConfig& c, const std::string& fallback = "") const {
        if (seeds_opt->count()) return parse_seeds(seeds);
        if (!fallback.empty()) return parse_seeds(fallback);
        return {c.seed};
    }
};

std::vector<std::string> scenario_row(const scenarios::ScenarioReport& r, const std::string& capability) {
    return {std::to_string(r.seed),        r.vdf_enabled ? "1" : "0",
            fmt(r.adversary_fraction),     capability,
            std::to_string(r.both),        std::to_string(r.train_only),
            std::to_string(r.hotel_only),  std::to_string(r.single()),
            std::to_string(r.denied),      std::to_string(r.errored),
            std::to_string(r.error_events), std::to_string(r.adversary_rejections),
            fmt(sim::to_seconds(r.completion)), fmt(sim::to_seconds(r.booking_phase)),
            r.deadlock ? "1" : "0",        r.trace_digest.hex()};
}

const std::vector<std::string> scenario_header = {
    "seed",  "vdf",    "adversary", "capability",   "both",  "train_only", "hotel_only", "single",
    "denied", "errored", "error_events", "adversary_rejections", "completion_s", "booking_phase_s",
    "deadlock", "trace_digest"};

Output cmd_train_hotel(const Cli& cli) {
    const SimConfig c = cli.config();
    const scenarios::TrainHotelConfig tc = train_hotel_config(c);
    const std::vector<std::uint64_t> seeds = cli.seed_list(c);
    const auto reports = run_seeds<scenarios::ScenarioReport>(
        seeds, cli.jobs, [&](std::uint64_t s) { return scenarios::run_train_hotel(tc, s); });

    Output out;
    out.header = scenario_header;
    std::uint64_t with_single = 0, deadlocks = 0, single_total = 0;
    for (const auto& r : reports) {
        out.rows.push_back(scenario_row(r, c.adversary_fraction > 0 ? c.capability : "none"));
        add_trace(out, r.seed, r.trace);
        with_single += r.single() > 0;
        single_total += r.single();
        deadlocks += r.deadlock;
    }
    std::vector<std::string> failures;
    if (cli.expect_deadlock) {
        if (deadlocks != reports.size()) failures.push_back("expected a deadlock in every seed");
    } else {
        if (deadlocks > 0) failures.push_back("deadlock in " + std::to_string(deadlocks) + " seed(s)");
        if (c.vdf_enabled && single_total > 0) failures.push_back("single-ticket clients under VDF");
    }
    out.pass = failures.empty();
    out.report = {{"seeds_with_single", with_single},
                  {"single_total", single_total},
                  {"deadlocks", deadlocks},
                  {"expect_deadlock", cli.expect_deadlock},
                  {"failures", failures}};
    return out;
}

Output cmd_adversary(const Cli& cli) {
    const SimConfig c = cli.config();
    const std::vector<double> fractions =
        cli.adversary_opt->count() ? std::vector<double>{c.adversary_fraction} : std::vector<double>{0.30, 0.40, 0.50};
    const std::vector<std::string> caps = cli.capability_opt->count() ? std::vector<std::string>{c.capability}
                                                                      : std::vector<std::string>{"with_vdf", "without_vdf"};
    const std::vector<std::uint64_t> seeds = cli.seed_list(c);

    Output out;
    out.header = scenario_header;
    json groups = json::array();
    for (double f : fractions) {
        for (const std::string& cap : caps) {
            scenarios::TrainHotelConfig tc = train_hotel_config(c);
            tc.adversary_fraction = f;
            tc.capability = scenarios::parse_capability(cap);
            const auto reports = run_seeds<scenarios::ScenarioReport>(
                seeds, cli.jobs, [&](std::uint64_t s) { return scenarios::run_adversary(tc, s); });
            std::uint64_t single = 0, denied = 0, rejections = 0;
            for (const auto& r : reports) {
                out.rows.push_back(scenario_row(r, cap));
                add_trace(out, r.seed, r.trace);
                single += r.single();
                denied += r.denied;
                rejections += r.adversary_rejections;
            }
            out.pass = out.pass && single == 0;
            groups.push_back({{"fraction", f},
                              {"capability", cap},
                              {"single_total", single},
                              {"denied_total", denied},
                              {"adversary_rejections", rejections}});
        }
    }
    out.report = {{"groups", groups}};
    return out;
}

Output cmd_simulate(const Cli& cli) {
    const SimConfig c = cli.config();
    const protocol::ProtocolConfig pc = protocol_config(c);
    protocol::validate(pc);
    const std::vector<std::uint64_t> seeds = cli.seed_list(c);
    const auto traces = run_seeds<protocol::ProtocolTrace>(seeds, cli.jobs,
                                                           [&](std::uint64_t s) { return protocol::run_protocol(pc, s); });

    Output out;
    out.header = {"seed",   "blocks", "mined_pairs", "rejected_deliveries", "adversarial_share",
                  "growth", "prefix", "wait",        "trace_digest"};
    for (const auto& t : traces) {
        const properties::Verdict g = properties::check_chain_growth(t, {});
        const properties::Verdict p = properties::check_common_prefix(t);
        const properties::Verdict w = properties::check_chain_wait(t.waits);
        out.pass = out.pass && g.pass && p.pass && w.pass;
        out.rows.push_back({std::to_string(t.seed), std::to_string(t.blocks.size()), std::to_string(t.mined_pairs),
                            std::to_string(t.rejected_deliveries), fmt(t.adversarial_share()), g.pass ? "pass" : "fail",
                            p.pass ? "pass" : "fail", w.pass ? "pass" : "fail", t.digest.hex()});
        add_trace(out, t.seed, t.trace);
    }
    // chain and shard exports of the first seed
    const protocol::ProtocolTrace& first = traces.front();
    out.extra_files["chain.json"] = io::to_json(first.final_chain).dump(1) + "\n";
    out.extra_files["shards.json"] = io::shard_map_json(first.shards).dump(1) + "\n";
    out.report = {{"protocol",
                   {{"honest_nodes", pc.honest_nodes},
                    {"adversarial_nodes", pc.adversarial_nodes},
                    {"rounds", pc.rounds},
                    {"round_time_s", sim::to_seconds(pc.round_time)},
                    {"k_max", pc.k_max},
                    {"feedback", protocol::to_string(pc.feedback)},
                    {"shard_mode", sharding::to_string(pc.shard_mode)}}}};
    return out;
}

Output cmd_properties(const Cli& cli) {
    const SimConfig c = cli.config();
    const std::vector<std::uint64_t> seeds = cli.seed_list(c, "1..50");
    const auto results = run_seeds<properties::SuiteResult>(seeds, cli.jobs, properties::run_suite);
    const auto fixtures = properties::run_fixtures(seeds.front());

    Output out;
    out.header = {"seed", "growth", "prefix", "wait", "quality", "quality_worst", "honest_digest", "quality_digest"};
    std::uint64_t growth = 0, prefix = 0, wait = 0, quality = 0;
    for (const auto& r : results) {
        growth += r.growth.pass;
        prefix += r.prefix.pass;
        wait += r.wait.pass;
        quality += r.quality.pass;
        out.rows.push_back({std::to_string(r.seed), r.growth.pass ? "pass" : "fail", r.prefix.pass ? "pass" : "fail",
                            r.wait.pass ? "pass" : "fail", r.quality.pass ? "pass" : "fail", fmt(r.quality.worst),
                            r.honest_digest.hex(), r.quality_digest.hex()});
    }
    const std::uint64_t n = results.size();
    // quality tolerates one failing seed in fifty
    const std::uint64_t quality_needed = n - n / 50;
    json fx = json::object();
    bool fixtures_ok = true;
    for (const auto& f : fixtures) {
        fx[f.name] = f.rejected ? "rejected" : "accepted";
        fixtures_ok = fixtures_ok && f.rejected;
    }
    out.pass = growth == n && prefix == n && wait == n && quality >= quality_needed && fixtures_ok;
    const properties::PropertyHarnessParams qp = properties::quality_suite_params();
    out.report = {{"growth_pass", growth},
                  {"prefix_pass", prefix},
                  {"wait_pass", wait},
                  {"quality_pass", quality},
                  {"quality_needed", quality_needed},
                  {"quality_failure_bound",
                   properties::quality_failure_bound(qp, properties::quality_suite_config().rounds)},
                  {"fixtures", fx}};
    return out;
}

Output cmd_bench(const Cli& cli) {
    const SimConfig c = cli.config();
    Output out;
    out.header = {"metric", "value"};
    const bool all = cli.bench_what == "all";
    json report = json::object();

    if (all || cli.bench_what == "blockgen") {
        std::vector<std::vector<std::string>> rows;
        for (std::uint64_t v : parse_u64_list(cli.validators)) {
            for (std::uint64_t size : parse_u64_list(cli.sizes)) {
                for (bench::HashKind h : {bench::HashKind::sha256, bench::HashKind::sha512}) {
                    const bench::BlockGenRow r = bench::block_gen_benchmark(size, v, h);
                    rows.push_back({std::to_string(size), std::to_string(v), std::string(bench::to_string(h)),
                                    fmt(r.generate_ms), fmt(r.validate_ms), fmt(r.total_ms)});
                }
            }
        }
        out.extra_files["blockgen.csv"] =
            csv({"block_bytes", "validators", "hash", "generate_ms", "validate_ms", "total_ms"}, rows);
        out.rows.push_back({"blockgen_rows", std::to_string(rows.size())});
    }
    if (all || cli.bench_what == "vdf") {
        std::vector<std::vector<std::string>> rows;
        bool verified = true;
        for (std::uint64_t z : parse_u64_list(cli.zetas)) {
            const bench::VdfBenchRow r = bench::vdf_benchmark(z);
            verified = verified && r.verified;
            rows.push_back({std::to_string(z), fmt(r.eval_ms), fmt(r.verify_ms), fmt(r.ratio())});
            out.rows.push_back({"vdf_ratio_" + std::to_string(z), fmt(r.ratio())});
        }
        out.extra_files["vdf.csv"] = csv({"zeta", "eval_ms", "verify_ms", "verify_over_eval"}, rows);
        out.pass = out.pass && verified;
        report["vdf_verified"] = verified;
    }
    if (all || cli.bench_what == "timing") {
        std::vector<std::vector<std::string>> rows;
        const std::vector<std::uint64_t> seeds = cli.seed_list(c);
        double prev = 0;
        bool monotone = true;
        for (std::uint64_t te : parse_u64_list(cli.timing_te)) {
            scenarios::TrainHotelConfig tc = train_hotel_config(c);
            tc.vdf_enabled = true;
            tc.t_eval = sim::seconds(static_cast<double>(te));
            if (tc.t_verify >= tc.t_eval) throw Error(ErrorCode::BadParameter, "timing t_E must exceed t_V");
            const auto reports = run_seeds<scenarios::ScenarioReport>(
                seeds, cli.jobs, [&](std::uint64_t s) { return scenarios::run_timing(tc, s); });
            double completion = 0, booking = 0;
            for (const auto& r : reports) {
                completion += sim::to_seconds(r.completion);
                booking += sim::to_seconds(r.booking_phase);
            }
            completion /= static_cast<double>(reports.size());
            booking /= static_cast<double>(reports.size());
            const double theory =
                sim::to_seconds(scenarios::theoretical_completion(tc.participants, tc.t_eval, tc.tau_prime));
            monotone = monotone && completion >= prev;
            prev = completion;
            rows.push_back({std::to_string(te), fmt(theory), fmt(completion), fmt(booking)});
            out.rows.push_back({"completion_s_te" + std::to_string(te), fmt(completion)});
        }
        out.extra_files["timing.csv"] = csv({"t_E", "theoretical_s", "completion_s", "booking_phase_s"}, rows);
        out.pass = out.pass && monotone;
        report["timing_monotone"] = monotone;
    }
    if (out.rows.empty()) throw Error(ErrorCode::ParseError, "unknown bench target '" + cli.bench_what + "'");
    out.report = report;
    return out;
}

Output cmd_conformance(const Cli& cli) {
    const conformance::Report r = conformance::check_file(cli.vectors);
    Output out;
    out.header = {"section", "checked", "mismatches"};
    json sections = json::object();
    for (const auto& [name, s] : r.sections) {
        out.rows.push_back({name, std::to_string(s.checked), std::to_string(s.mismatches)});
        sections[name] = {{"checked", s.checked}, {"mismatches", s.mismatches}, {"details", s.details}};
    }
    out.pass = r.pass();
    out.report = {{"vectors", cli.vectors}, {"sections", sections}};
    return out;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::ParseError, "cannot write " + p.string());
    f << content;
}

int emit(const Cli& cli, const std::string& command, Output out) {
    const char* env = std::getenv("REINSHARD_OUT");
    const std::filesystem::path dir = env && *env ? env : cli.out_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::ParseError, "cannot create output directory " + dir.string());

    std::string trace;
    for (const std::string& l : out.trace) trace += l + "\n";
    const std::string summary = csv(out.header, out.rows);
    out.report["command"] = command;
    out.report["pass"] = out.pass;
    out.report["schema_version"] = io::schema_version;

    write_file(dir / "trace.jsonl", trace);
    write_file(dir / "summary.csv", summary);
    write_file(dir / "report.json", out.report.dump(1) + "\n");
    for (const auto& [name, content] : out.extra_files) write_file(dir / name, content);

    if (cli.format == "json") {
        std::cout << out.report.dump(1) << "\n";
    } else {
        std::cout << summary;
    }
    std::cerr << command << ": " << (out.pass ? "PASS" : "FAIL") << " (artifacts in " << dir.string() << ")\n";
    return out.pass ? exit_ok : exit_check;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reinshard dual-chain simulator"};
    app.require_subcommand(1);
    Cli cli;

    app.add_option("--config", cli.config_path, "Flat JSON config mirroring SimConfig")->check(CLI::ExistingFile);
    cli.seeds_opt = app.add_option("--seeds", cli.seeds, "Seeds, e.g. 1..100 or 1,4,9");
    app.add_option("--jobs", cli.jobs, "Worker threads for independent seeds")->check(CLI::Range(1u, 256u));
    cli.vdf_opt = app.add_flag("--vdf", "Enable VDF holds");
    cli.no_vdf_opt = app.add_flag("--no-vdf", "Disable VDF holds")->excludes(cli.vdf_opt);
    cli.te_opt = app.add_option("--te", cli.te, "VDF evaluation time t_E, seconds");
    cli.tv_opt = app.add_option("--tv", cli.tv, "VDF verification time t_V, seconds");
    cli.delay_opt = app.add_option("--delay", cli.delay, "Hold timer tau', seconds");
    cli.adversary_opt = app.add_option("--adversary", cli.adversary, "Adversary fraction in [0, 0.5]");
    cli.capability_opt =
        app.add_option("--capability", cli.capability, "Adversary profile")->check(CLI::IsMember({"with_vdf", "without_vdf"}));
    cli.mode_opt = app.add_option("--mode", cli.mode, "Sharding mode")->check(CLI::IsMember({"single", "multi"}));
    cli.rounds_opt = app.add_option("--rounds", cli.rounds, "Protocol rounds");
    cli.nodes_opt = app.add_option("--nodes", cli.nodes, "Honest protocol nodes");
    app.add_option("--out", cli.out_dir, "Output directory (REINSHARD_OUT overrides)");
    app.add_option("--format", cli.format, "Stdout format")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--expect-deadlock", cli.expect_deadlock, "Deadlock is the expected outcome");

    auto* simulate = app.add_subcommand("simulate", "Protocol run with growth, prefix and wait checks");
    auto* train_hotel = app.add_subcommand("train-hotel", "Train-and-hotel booking experiment");
    auto* adversary = app.add_subcommand("adversary", "Booking experiment with adversarial clients");
    auto* props = app.add_subcommand("properties", "Security property suite with planted fixtures");
    auto* bench_cmd = app.add_subcommand("bench", "Block generation, VDF and timing measurements");
    auto* conf = app.add_subcommand("conformance", "Replay golden vectors");
    bench_cmd->add_option("what", cli.bench_what, "all | blockgen | vdf | timing")
        ->check(CLI::IsMember({"all", "blockgen", "vdf", "timing"}));
    bench_cmd->add_option("--sizes", cli.sizes, "Block sizes in bytes");
    bench_cmd->add_option("--validators", cli.validators, "Validator counts");
    bench_cmd->add_option("--zeta", cli.zetas, "VDF iteration counts");
    bench_cmd->add_option("--timing-te", cli.timing_te, "t_E values for the timing curve");
    conf->add_option("--vectors", cli.vectors, "Golden vector file");
    for (CLI::App* sub : {simulate, train_hotel, adversary, props, bench_cmd, conf}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (simulate->parsed()) return emit(cli, "simulate", cmd_simulate(cli));
        if (train_hotel->parsed()) return emit(cli, "train-hotel", cmd_train_hotel(cli));
        if (adversary->parsed()) return emit(cli, "adversary", cmd_adversary(cli));
        if (props->parsed()) return emit(cli, "properties", cmd_properties(cli));
        if (bench_cmd->parsed()) return emit(cli, "bench", cmd_bench(cli));
        if (conf->parsed()) return emit(cli, "conformance", cmd_conformance(cli));
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
