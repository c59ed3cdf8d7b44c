#include "helpers.hpp"

#include "reinshard/sim.hpp"

#include <catch_amalgamated.hpp>

#include <openssl/sha.h>

#include <cmath>

using namespace reinshard;
using namespace reinshard::sim;
using testutil::error_of;

TEST_CASE("time conversion", "[sim]") {
    CHECK(seconds(2.5) == 2'500'000);
    CHECK(seconds(0.0000014) == 1);
    CHECK(to_seconds(seconds(92.5)) == 92.5);
    CHECK(to_string(EventKind::HoldExpire) == "HoldExpire");
}

TEST_CASE("events run in time then insertion order", "[sim]") {
    Simulator s(1);
    std::vector<int> order;
    s.schedule(20, EventKind::TxStep, [&](Simulator&) { order.push_back(3); });
    s.schedule(10, EventKind::TxStep, [&](Simulator&) { order.push_back(1); });
    s.schedule(10, EventKind::TxStep, [&](Simulator&) { order.push_back(2); });
    s.schedule(20, EventKind::TxStep, [&](Simulator& sim) {
        order.push_back(4);
        sim.schedule_in(0, EventKind::TxStep, [&](Simulator&) { order.push_back(5); });
    });
    CHECK(s.run() == 5);
    CHECK(order == std::vector<int>{1, 2, 3, 4, 5});
    CHECK(s.now() == 20);
    CHECK(s.processed() == 5);
}

TEST_CASE("past events and cancellation", "[sim]") {
    Simulator s(1);
    s.schedule(100, EventKind::TxStep, [](Simulator&) {});
    s.run();
    CHECK(error_of([&] { s.schedule(99, EventKind::TxStep, [](Simulator&) {}); }) == ErrorCode::PastEvent);
    CHECK(error_of([&] { s.schedule_in(-1, EventKind::TxStep, [](Simulator&) {}); }) == ErrorCode::PastEvent);

    bool ran = false;
    const EventId id = s.schedule(200, EventKind::TxStep, [&](Simulator&) { ran = true; });
    CHECK(s.pending() == 1);
    CHECK(s.cancel(id));
    CHECK_FALSE(s.cancel(id));
    CHECK(s.pending() == 0);
    s.run();
    CHECK_FALSE(ran);
    CHECK(s.cancelled_count() == 1);

    const EventId done = s.schedule(300, EventKind::TxStep, [](Simulator&) {});
    s.run();
    CHECK_FALSE(s.cancel(done));
}

TEST_CASE("run_until stops at the limit", "[sim]") {
    Simulator s(1);
    for (SimTime t = 1; t <= 10; ++t) s.schedule(t, EventKind::MineAttempt, [](Simulator&) {});
    CHECK(s.run_until(4) == 4);
    CHECK(s.now() == 4);
    CHECK(s.pending() == 6);
    CHECK(s.run() == 6);
}

TEST_CASE("clock is monotone under random scheduling", "[sim]") {
    Simulator s(7, false);
    std::mt19937_64& rng = s.rng().stream("test");
    SimTime last = 0;
    bool monotone = true;
    std::function<void(Simulator&)> step = [&](Simulator& sim) {
        monotone = monotone && sim.now() >= last;
        last = sim.now();
        if (sim.processed() < 5000) sim.schedule_in(static_cast<SimTime>(rng() % 50), EventKind::TxStep, step);
    };
    for (int i = 0; i < 20; ++i) s.schedule(static_cast<SimTime>(rng() % 100), EventKind::TxStep, step);
    s.run();
    CHECK(monotone);
    CHECK(s.processed() >= 5000);
}

TEST_CASE("rng streams are keyed and independent", "[sim]") {
    RngStreams a(5), b(5), c(6);
    CHECK(a.stream("latency")() == b.stream("latency")());
    // drawing from one stream does not shift another
    for (int i = 0; i < 100; ++i) (void)a.stream("mining")();
    CHECK(a.stream("latency")() == b.stream("latency")());
    CHECK(c.stream("latency")() != RngStreams(5).stream("latency")());
    CHECK(derive_stream_seed(5, "x") != derive_stream_seed(5, "y"));
    CHECK(derive_stream_seed(5, "x") == derive_stream_seed(5, "x"));

    // seed = first eight bytes of the tagged hash, big-endian
    std::vector<unsigned char> pre{0x23, 0, 0, 0, 8, 0, 0, 0, 0, 0, 0, 0, 5, 0, 0, 0, 1, 'x'};
    unsigned char d[32];
    SHA256(pre.data(), pre.size(), d);
    std::uint64_t expect = 0;
    for (int i = 0; i < 8; ++i) expect = (expect << 8) | d[i];
    CHECK(derive_stream_seed(5, "x") == expect);

    // streams are uncorrelated in their low bit
    std::mt19937_64& x = a.stream("p");
    std::mt19937_64& y = a.stream("q");
    int agree = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) agree += ((x() ^ y()) & 1) == 0;
    CHECK(std::abs(agree - n / 2) < 4 * std::sqrt(n / 4.0));
}

TEST_CASE("latency models", "[sim]") {
    std::mt19937_64 rng(3);
    CHECK(LatencyModel::constant(seconds(0.1)).sample(rng) == seconds(0.1));
    const LatencyModel u = LatencyModel::uniform(seconds(0.05), seconds(0.15));
    CHECK(u.max() == seconds(0.15));
    double sum = 0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
        const SimTime v = u.sample(rng);
        REQUIRE(v >= u.low);
        REQUIRE(v <= u.high);
        sum += static_cast<double>(v);
    }
    const double sd = static_cast<double>(u.high - u.low) / std::sqrt(12.0);
    CHECK(std::abs(sum / n - static_cast<double>(seconds(0.1))) < 4 * sd / std::sqrt(n));
}

TEST_CASE("event log hash chain", "[sim]") {
    EventLog log;
    log.write({{"a", 1}});
    log.write({{"b", 2}});
    CHECK(log.count() == 2);
    CHECK(log.lines() == std::vector<std::string>{R"({"a":1})", R"({"b":2})"});

    Digest d;
    for (const std::string& line : log.lines()) {
        std::vector<unsigned char> pre(d.bytes.begin(), d.bytes.end());
        pre.insert(pre.end(), line.begin(), line.end());
        SHA256(pre.data(), pre.size(), d.bytes.data());
    }
    CHECK(log.digest() == d);

    EventLog quiet(false);
    quiet.write({{"a", 1}});
    quiet.write({{"b", 2}});
    CHECK(quiet.lines().empty());
    CHECK(quiet.digest() == log.digest());
}

TEST_CASE("trace records carry the clock", "[sim]") {
    Simulator s(1);
    s.schedule(42, EventKind::TxStep, [](Simulator& sim) { sim.trace({{"kind", "x"}}); });
    s.run();
    REQUIRE(s.log().lines().size() == 1);
    CHECK(nlohmann::json::parse(s.log().lines()[0]) == nlohmann::json{{"t", 42}, {"kind", "x"}});
}

TEST_CASE("identical seeds give identical digests", "[sim]") {
    auto run = [](std::uint64_t seed) {
        Simulator s(seed, false);
        std::mt19937_64& rng = s.rng().stream("work");
        std::function<void(Simulator&)> step = [&](Simulator& sim) {
            sim.trace({{"v", rng() % 1000}});
            if (sim.processed() < 300) sim.schedule_in(static_cast<SimTime>(rng() % 10), EventKind::TxStep, step);
        };
        s.schedule(0, EventKind::TxStep, step);
        s.run();
        return s.log().digest();
    };
    CHECK(run(9) == run(9));
    CHECK(run(9) != run(10));
}
