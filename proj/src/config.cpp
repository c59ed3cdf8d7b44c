#include "reinshard/config.hpp"

#include "reinshard/error.hpp"

#include <algorithm>
#include <fstream>

namespace reinshard {

namespace {

using nlohmann::json;

sim::SimTime secs(const json& v, const std::string& key) {
    if (!v.is_number()) throw Error(ErrorCode::ParseError, "'" + key + "' must be a number of seconds");
    return sim::seconds(v.get<double>());
}

std::uint64_t count(const json& v, const std::string& key) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) throw Error(ErrorCode::ParseError, "'" + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string str(const json& v, const std::string& key) {
    if (!v.is_string()) throw Error(ErrorCode::ParseError, "'" + key + "' must be a string");
    return v.get<std::string>();
}

} // namespace

void validate(const SimConfig& c) {
    if (c.t_E <= 0 || c.t_V <= 0 || c.tau_prime <= 0) throw Error(ErrorCode::BadParameter, "durations must be positive");
    if (c.t_V >= c.t_E) throw Error(ErrorCode::BadParameter, "t_V must be below t_E");
    if (c.latency < 0 || c.latency_high < c.latency) throw Error(ErrorCode::BadParameter, "bad latency range");
    if (c.latency_model != "constant" && c.latency_model != "uniform") {
        throw Error(ErrorCode::ParseError, "latency_model must be constant or uniform");
    }
    if (c.adversary_fraction < 0 || c.adversary_fraction > 0.5) {
        throw Error(ErrorCode::BadParameter, "adversary_fraction must lie in [0, 0.5]");
    }
    if (c.k_max == 0 || c.epoch_blocks == 0) throw Error(ErrorCode::BadParameter, "k_max and epoch_blocks must be positive");
    (void)scenarios::parse_capability(c.capability);
    (void)protocol::parse_feedback(c.feedback);
}

SimConfig config_from_json(const json& j, SimConfig c) {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
    for (const auto& [key, v] : j.items()) {
        if (key == "seed") c.seed = count(v, key);
        else if (key == "n_nodes") c.n_nodes = count(v, key);
        else if (key == "n_validators") c.n_validators = count(v, key);
        else if (key == "t_E") c.t_E = secs(v, key);
        else if (key == "t_V") c.t_V = secs(v, key);
        else if (key == "tau_prime") c.tau_prime = secs(v, key);
        else if (key == "latency_model") c.latency_model = str(v, key);
        else if (key == "latency") c.latency = secs(v, key);
        else if (key == "latency_high") c.latency_high = secs(v, key);
        else if (key == "epoch_blocks") c.epoch_blocks = count(v, key);
        else if (key == "k_max") c.k_max = count(v, key);
        else if (key == "adversary_fraction") {
            if (!v.is_number()) throw Error(ErrorCode::ParseError, "'adversary_fraction' must be a number");
            c.adversary_fraction = v.get<double>();
        } else if (key == "mode") c.mode = sharding::parse_mode(str(v, key));
        else if (key == "train_tickets") c.train_tickets = count(v, key);
        else if (key == "hotel_tickets") c.hotel_tickets = count(v, key);
        else if (key == "clients") c.clients = count(v, key);
        else if (key == "participants") c.participants = count(v, key);
        else if (key == "vdf_enabled") {
            if (!v.is_boolean()) throw Error(ErrorCode::ParseError, "'vdf_enabled' must be a boolean");
            c.vdf_enabled = v.get<bool>();
        } else if (key == "capability") c.capability = str(v, key);
        else if (key == "rounds") c.rounds = count(v, key);
        else if (key == "feedback") c.feedback = str(v, key);
        else throw Error(ErrorCode::ParseError, "unknown config key '" + key + "'");
    }
    if (c.latency_model == "constant") c.latency_high = c.latency;
    return c;
}

SimConfig load_config(const std::string& path, SimConfig base) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ParseError, "cannot read config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(j, std::move(base));
}

json to_json(const SimConfig& c) {
    return {{"seed", c.seed},
            {"n_nodes", c.n_nodes},
            {"n_validators", c.n_validators},
            {"t_E", sim::to_seconds(c.t_E)},
            {"t_V", sim::to_seconds(c.t_V)},
            {"tau_prime", sim::to_seconds(c.tau_prime)},
            {"latency_model", c.latency_model},
            {"latency", sim::to_seconds(c.latency)},
            {"latency_high", sim::to_seconds(c.latency_high)},
            {"epoch_blocks", c.epoch_blocks},
            {"k_max", c.k_max},
            {"adversary_fraction", c.adversary_fraction},
            {"mode", sharding::to_string(c.mode)},
            {"train_tickets", c.train_tickets},
            {"hotel_tickets", c.hotel_tickets},
            {"clients", c.clients},
            {"participants", c.participants},
            {"vdf_enabled", c.vdf_enabled},
            {"capability", c.capability},
            {"rounds", c.rounds},
            {"feedback", c.feedback}};
}

sim::LatencyModel latency_of(const SimConfig& c) {
    return c.latency_model == "uniform" ? sim::LatencyModel::uniform(c.latency, c.latency_high)
                                        : sim::LatencyModel::constant(c.latency);
}

scenarios::TrainHotelConfig train_hotel_config(const SimConfig& c) {
    scenarios::TrainHotelConfig t;
    t.train_tickets = c.train_tickets;
    t.hotel_tickets = c.hotel_tickets;
    t.clients = c.clients;
    t.participants = c.participants;
    t.vdf_enabled = c.vdf_enabled;
    t.t_eval = c.t_E;
    t.t_verify = c.t_V;
    t.tau_prime = c.tau_prime;
    t.latency = latency_of(c);
    t.adversary_fraction = c.adversary_fraction;
    t.capability = scenarios::parse_capability(c.capability);
    return t;
}

protocol::ProtocolConfig protocol_config(const SimConfig& c) {
    protocol::ProtocolConfig p;
    p.honest_nodes = c.n_nodes;
    p.rounds = c.rounds;
    p.t_eval = c.t_E;
    p.t_verify = c.t_V;
    p.tau_prime = c.tau_prime;
    p.latency = latency_of(c);
    p.k_max = c.k_max;
    p.ka_cap = c.k_max;
    p.epoch_blocks = c.epoch_blocks;
    p.round_time = std::max(p.round_time, c.t_E + c.t_V + c.latency_high + sim::seconds(1));
    p.feedback = protocol::parse_feedback(c.feedback);
    p.shard_mode = c.mode;
    if (c.adversary_fraction > 0) {
        // adversarial nodes out of the total, rounded to the nearest count
        const double total = static_cast<double>(c.n_nodes) / (1.0 - c.adversary_fraction);
        p.adversarial_nodes = static_cast<std::uint64_t>(total - static_cast<double>(c.n_nodes) + 0.5);
    }
    return p;
}

} // namespace reinshard
