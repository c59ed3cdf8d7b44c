#pragma once

#include "reinshard/protocol_sim.hpp"
#include "reinshard/sharding.hpp"
#include "reinshard/train_hotel.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>

namespace reinshard {

/// Flat run configuration. Times are seconds in JSON, microseconds here.
struct SimConfig {
    std::uint64_t seed = 1;
    std::uint64_t n_nodes = 5;      // honest protocol nodes
    std::uint64_t n_validators = 5; // chain-pairs in the sharding experiment
    sim::SimTime t_E = sim::seconds(3);
    sim::SimTime t_V = sim::seconds(1);
    sim::SimTime tau_prime = sim::seconds(2.5);
    std::string latency_model = "constant"; // constant | uniform
    sim::SimTime latency = sim::seconds(0.1);
    sim::SimTime latency_high = sim::seconds(0.1); // upper end for the uniform model
    std::uint64_t epoch_blocks = 16;
    std::uint64_t k_max = 8;
    double adversary_fraction = 0.0;
    sharding::Mode mode = sharding::Mode::multi_block; // single_block needs one pair per owner

    std::uint64_t train_tickets = 5;
    std::uint64_t hotel_tickets = 5;
    std::uint64_t clients = 50;
    std::uint64_t participants = 10;
    bool vdf_enabled = true;
    std::string capability = "with_vdf";
    std::uint64_t rounds = 100;
    std::string feedback = "logged_only";
};

/// Rejects negative or zero durations, t_V >= t_E, fractions outside [0, 0.5]
/// and unknown enum names. Throws BadParameter or ParseError.
void validate(const SimConfig& c);

/// Unknown keys are a ParseError so typos do not pass silently.
SimConfig config_from_json(const nlohmann::json& j, SimConfig base = {});
SimConfig load_config(const std::string& path, SimConfig base = {});
nlohmann::json to_json(const SimConfig& c);

sim::LatencyModel latency_of(const SimConfig& c);
scenarios::TrainHotelConfig train_hotel_config(const SimConfig& c);
protocol::ProtocolConfig protocol_config(const SimConfig& c);

} // namespace reinshard
