#include "diver/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "diver/seed.hpp"

namespace diver {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(const std::string& key, const KeyValues::Entry& e,
                            const std::string& expected) {
    throw ConfigError(e.origin + ": key '" + key + "': expected " + expected + ", got '" +
                      e.value + "'");
}

template <class T>
T parse_number(const std::string& key, const KeyValues::Entry& e, const char* what) {
    T v{};
    const char* first = e.value.data();
    const char* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        bad_value(key, e, what);
    }
    return v;
}

bool parse_bool(const std::string& key, const KeyValues::Entry& e) {
    if (e.value == "true" || e.value == "1") {
        return true;
    }
    if (e.value == "false" || e.value == "0") {
        return false;
    }
    bad_value(key, e, "true or false");
}

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class E>
struct EnumName {
    E value;
    const char* name;
};

template <class E, std::size_t N>
E parse_enum(const std::string& key, const KeyValues::Entry& e, const EnumName<E> (&names)[N]) {
    std::string expected;
    for (const auto& n : names) {
        if (e.value == n.name) {
            return n.value;
        }
        expected += expected.empty() ? "one of " : ", ";
        expected += n.name;
    }
    bad_value(key, e, expected);
}

template <class E, std::size_t N>
std::string enum_name(E v, const EnumName<E> (&names)[N]) {
    for (const auto& n : names) {
        if (n.value == v) {
            return n.name;
        }
    }
    return "?";
}

constexpr EnumName<NetworkSource> kSources[] = {{NetworkSource::generate, "generate"},
                                                {NetworkSource::file, "file"}};
constexpr EnumName<AttackKind> kAttacks[] = {{AttackKind::random_targets, "random"},
                                             {AttackKind::knapsack, "knapsack"}};
constexpr EnumName<DestinationScope> kScopes[] = {{DestinationScope::all_nodes, "all"},
                                                  {DestinationScope::two_hop, "two_hop"}};
constexpr EnumName<MfptSource> kMfpt[] = {{MfptSource::exact, "exact"}, {MfptSource::walk, "walk"}};
constexpr EnumName<OvershootPolicy> kOvershoot[] = {{OvershootPolicy::skip, "skip"},
                                                    {OvershootPolicy::closest_fit, "closest_fit"},
                                                    {OvershootPolicy::none, "none"}};

struct Key {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string&, const KeyValues::Entry&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

// helpers producing setter/getter pairs for common field shapes
template <class T>
Key unsigned_key(const char* name, T ExperimentConfig::*field) {
    return {name,
            [field](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
                c.*field = parse_number<T>(k, e, "a non-negative integer");
            },
            [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Key double_key(const char* name, double ExperimentConfig::*field) {
    return {name,
            [field](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
                c.*field = parse_number<double>(k, e, "a number");
            },
            [field](const ExperimentConfig& c) { return format_double(c.*field); }};
}

Key path_key(const char* name, std::filesystem::path ExperimentConfig::*field) {
    return {name,
            [field](ExperimentConfig& c, const std::string&, const KeyValues::Entry& e) {
                c.*field = e.value;
            },
            [field](const ExperimentConfig& c) { return (c.*field).string(); }};
}

Key bool_key(const char* name, bool ExperimentConfig::*field) {
    return {name,
            [field](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
                c.*field = parse_bool(k, e);
            },
            [field](const ExperimentConfig& c) { return std::string(c.*field ? "true" : "false"); }};
}

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        unsigned_key("seed", &ExperimentConfig::seed),
        {"threads",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.threads = parse_number<int>(k, e, "an integer");
             if (c.threads < 0) {
                 bad_value(k, e, "a non-negative integer");
             }
         },
         [](const ExperimentConfig& c) { return std::to_string(c.threads); }},
        path_key("out_dir", &ExperimentConfig::out_dir),

        {"network.source",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.network = parse_enum(k, e, kSources);
         },
         [](const ExperimentConfig& c) { return enum_name(c.network, kSources); }},
        path_key("network.path", &ExperimentConfig::network_path),
        unsigned_key("network.n", &ExperimentConfig::n),
        double_key("network.gamma", &ExperimentConfig::gamma),
        double_key("network.self_loop_floor", &ExperimentConfig::self_loop_floor),

        path_key("opinions.path", &ExperimentConfig::opinions_path),
        path_key("opinions.attacked_path", &ExperimentConfig::attacked_path),

        {"attack.kind",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.attack.kind = parse_enum(k, e, kAttacks);
         },
         [](const ExperimentConfig& c) { return enum_name(c.attack.kind, kAttacks); }},
        {"attack.n_targets",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.attack.n_targets = parse_number<std::size_t>(k, e, "a non-negative integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.attack.n_targets); }},
        {"attack.value",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.attack.target_value = parse_number<double>(k, e, "a number");
             if (!(c.attack.target_value >= 0.0 && c.attack.target_value <= 1.0)) {
                 bad_value(k, e, "an opinion in [0,1]");
             }
         },
         [](const ExperimentConfig& c) { return format_double(c.attack.target_value); }},
        {"attack.budget",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.attack.budget = parse_number<std::uint64_t>(k, e, "a non-negative integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.attack.budget); }},
        path_key("attack.costs_path", &ExperimentConfig::attack_costs_path),

        {"recommend.k",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.k = parse_number<std::size_t>(k, e, "a positive integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.recommender.k); }},
        {"recommend.n_src",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.n_src = parse_number<std::size_t>(k, e, "a positive integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.recommender.n_src); }},
        {"recommend.theta",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.theta = parse_number<double>(k, e, "a number");
             if (!(c.recommender.theta > 0.0 && c.recommender.theta <= 1.0)) {
                 bad_value(k, e, "a weight in (0,1]");
             }
         },
         [](const ExperimentConfig& c) { return format_double(c.recommender.theta); }},
        path_key("recommend.theta_table", &ExperimentConfig::theta_table_path),
        {"recommend.destinations",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.destinations = parse_enum(k, e, kScopes);
         },
         [](const ExperimentConfig& c) { return enum_name(c.recommender.destinations, kScopes); }},
        {"recommend.mfpt",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.mfpt = parse_enum(k, e, kMfpt);
         },
         [](const ExperimentConfig& c) { return enum_name(c.recommender.mfpt, kMfpt); }},
        {"recommend.walk_len",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.walk_len = parse_number<std::uint64_t>(k, e, "a non-negative integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.recommender.walk_len); }},
        {"recommend.score_subset_size",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.score_subset_size =
                 parse_number<std::size_t>(k, e, "a non-negative integer");
         },
         [](const ExperimentConfig& c) {
             return std::to_string(c.recommender.score_subset_size);
         }},
        {"recommend.overshoot",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.recommender.overshoot = parse_enum(k, e, kOvershoot);
         },
         [](const ExperimentConfig& c) { return enum_name(c.recommender.overshoot, kOvershoot); }},

        {"run.batch",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.limits.batch = parse_number<std::size_t>(k, e, "a positive integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.limits.batch); }},
        {"run.max_edges",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.limits.max_edges = parse_number<std::size_t>(k, e, "a non-negative integer");
         },
         [](const ExperimentConfig& c) { return std::to_string(c.limits.max_edges); }},
        {"run.stop_tol",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.limits.stop_tol = parse_number<double>(k, e, "a number");
         },
         [](const ExperimentConfig& c) { return format_double(c.limits.stop_tol); }},

        double_key("mfpt.target_fraction", &ExperimentConfig::mfpt_target_fraction),
        bool_key("output.figures", &ExperimentConfig::figures),
        bool_key("output.timings", &ExperimentConfig::timings),

        {"gadget.z",
         [](ExperimentConfig& c, const std::string& k, const KeyValues::Entry& e) {
             c.gadget_z.clear();
             std::stringstream ss(e.value);
             std::string item;
             while (std::getline(ss, item, ',')) {
                 KeyValues::Entry part{trim(item), e.origin};
                 c.gadget_z.push_back(parse_number<double>(k, part, "comma-separated numbers"));
             }
             if (c.gadget_z.empty()) {
                 bad_value(k, e, "comma-separated numbers");
             }
         },
         [](const ExperimentConfig& c) {
             std::string out;
             for (const double v : c.gadget_z) {
                 out += (out.empty() ? "" : ",") + format_double(v);
             }
             return out;
         }},
        unsigned_key("gadget.k", &ExperimentConfig::gadget_k),
        double_key("gadget.s", &ExperimentConfig::gadget_s),
    };
    return table;
}

} // namespace

KeyValues KeyValues::parse(const std::string& text, const std::string& source) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string origin = source + ":" + std::to_string(lineno);
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ": expected 'key = value'");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        if (key.empty()) {
            throw ConfigError(origin + ": missing key before '='");
        }
        if (kv.entries_.count(key) != 0) {
            throw ConfigError(origin + ": key '" + key + "' repeated (first at " +
                              kv.entries_[key].origin + ")");
        }
        kv.entries_[key] = {trim(std::string_view(body).substr(eq + 1)), origin};
    }
    return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void KeyValues::set(const std::string& key, std::string value, std::string origin) {
    entries_[key] = {std::move(value), std::move(origin)};
}

void KeyValues::merge(const KeyValues& other) {
    for (const auto& [k, e] : other.entries_) {
        entries_[k] = e;
    }
}

ExperimentConfig apply_config(ExperimentConfig base, const KeyValues& kv) {
    for (const auto& [name, entry] : kv.entries()) {
        const auto& table = keys();
        const auto it = std::find_if(table.begin(), table.end(),
                                     [&](const Key& k) { return name == k.name; });
        if (it == table.end()) {
            throw ConfigError(entry.origin + ": unknown key '" + name + "'");
        }
        it->set(base, name, entry);
    }
    return base;
}

std::uint64_t ExperimentConfig::component_seed(const char* label) const {
    return derive_seed(seed, label);
}

std::string ExperimentConfig::to_text() const {
    std::string out;
    for (const auto& k : keys()) {
        out += k.name;
        out += " = ";
        out += k.get(*this);
        out += '\n';
    }
    return out;
}

std::map<std::pair<NodeId, NodeId>, double> read_theta_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open theta table " + path.string());
    }
    std::map<std::pair<NodeId, NodeId>, double> table;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(line);
        if (body.empty() || body.front() == '#') {
            continue;
        }
        std::istringstream fields(body);
        NodeId r = 0;
        NodeId c = 0;
        double theta = 0.0;
        std::string extra;
        if (!(fields >> r >> c >> theta) || (fields >> extra)) {
            throw Error(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'src dst theta'");
        }
        if (!table.emplace(std::pair{r, c}, theta).second) {
            throw Error(path.string() + ":" + std::to_string(lineno) + ": duplicate edge");
        }
    }
    return table;
}

} // namespace diver
