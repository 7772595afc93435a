#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "diver/adversary.hpp"
#include "diver/recommend.hpp"

namespace diver {

/// Raised for malformed config text or values; the message names the key and line.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Flat `key = value` text. Keys are dotted (`recommend.n_src`); '#' starts a comment.
class KeyValues {
public:
    struct Entry {
        std::string value;
        std::string origin; ///< "file:line" or "flag"
    };

    static KeyValues parse(const std::string& text, const std::string& source);
    static KeyValues load(const std::filesystem::path& path);

    /// Later values win.
    void set(const std::string& key, std::string value, std::string origin);
    void merge(const KeyValues& other);

    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

enum class NetworkSource { generate, file };

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int threads = 0; ///< 0 = OpenMP default, 1 = serial bit-exact mode
    std::filesystem::path out_dir = "out";

    NetworkSource network = NetworkSource::generate;
    std::filesystem::path network_path;
    std::size_t n = 250;
    double gamma = -2.5;
    double self_loop_floor = 0.01;

    /// Initial opinions; uniform random in [0,1] when empty.
    std::filesystem::path opinions_path;
    /// Attacked opinions; the attack below is applied when empty.
    std::filesystem::path attacked_path;

    AttackSpec attack;
    std::filesystem::path attack_costs_path;

    RecommenderConfig recommender;
    std::filesystem::path theta_table_path;
    RunLimits limits;

    double mfpt_target_fraction = 0.05;
    bool figures = true;
    bool timings = true;

    std::vector<double> gadget_z{0.2, 0.3, 0.5};
    std::size_t gadget_k = 2;
    double gadget_s = 0.5;

    Exec exec() const { return threads == 1 ? Exec::serial : Exec::parallel; }

    /// Seed of a named component, derived from `seed`.
    std::uint64_t component_seed(const char* label) const;

    /// Every key in canonical order; parsing the text back yields an equal config.
    std::string to_text() const;
};

/// Applies `kv` over `base`. Unknown keys and malformed values raise ConfigError.
ExperimentConfig apply_config(ExperimentConfig base, const KeyValues& kv);

/// Reads `r c theta` lines.
std::map<std::pair<NodeId, NodeId>, double> read_theta_table(const std::filesystem::path& path);

} // namespace diver
