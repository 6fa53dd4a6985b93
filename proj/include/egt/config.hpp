// Model configuration and the sectioned key-value file format.
//
//   # comment            ; comment
//   [section]
//   key = value
//
// Keys are unique across sections, so a key may also be addressed as
// "section.key". Unknown sections and keys are rejected.
#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "egt/dynamics.hpp"
#include "egt/games.hpp"
#include "egt/topology.hpp"

namespace egt {

/// What an opportunist in the networked public goods models conditions on:
/// the reputations of all its network neighbors, or the reputation of the
/// group member assigned to observe it in that game.
enum class OpportunistInfo { Neighbors, Observer };

enum class ModelFamily {
    PublicGoods,    // random groups, punishment and probabilistic reputation
    ThirdParty,     // pairwise dilemma on a small world with third-party punishment
    Threat,         // grid public goods with base pay, threat and fitness transform
    Ethnocentrism,  // grid Prisoner's Dilemma with group tags
};

struct ModelConfig {
    std::optional<ModelFamily> family;

    // population
    std::size_t population = 400;
    TopologyKind topology = TopologyKind::WellMixed;
    int width = 20;
    int height = 20;
    Neighborhood neighborhood = Neighborhood::VonNeumann4;
    bool wraparound = true;
    int mean_degree = 4;
    double rewire_prob = 0.1;
    bool regenerate_topology = true;
    std::uint64_t topology_seed = 1;

    // games
    PggParams pgg;
    std::vector<Cooperation> contribution_strategies;  // empty: family default
    std::vector<Punishment> punishment_strategies;     // empty: all four
    ThreatParams threat;
    double d = 0.1;  // carried through from configuration; no behavior attached
    int n_groups = 4;
    PdMatrix pd;
    int pd_rounds = 1;              // PD rounds per edge per generation
    bool tag_transmission = false;  // imitators also adopt the model's group tag
    bool tie_weighting = true;
    std::optional<OpportunistInfo> opportunist_info;  // unset: family default

    // dynamics
    double mu = 0.01;
    double s = 0.5;
    double m = 0.0;

    // run
    int generations = 1000;
    std::uint64_t seed = 1;

    std::size_t node_count() const {
        return topology == TopologyKind::Grid ? static_cast<std::size_t>(width) * static_cast<std::size_t>(height)
                                              : population;
    }
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto t = trim(item);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    // Accept simple fractions such as "1/2".
    if (auto slash = v.find('/'); slash != std::string::npos)
        return to_double(key, trim(v.substr(0, slash))) / to_double(key, trim(v.substr(slash + 1)));
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
}

template <class Int>
Int to_integer(const std::string& key, const std::string& v) {
    Int out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) {
        // Sweeps hand integers through as "%.17g" text, e.g. "8".
        const double d = to_double(key, v);
        if (d != static_cast<double>(static_cast<Int>(d)))
            throw ConfigError(key + ": expected an integer, got '" + v + "'");
        return static_cast<Int>(d);
    }
    return out;
}

inline bool to_bool(const std::string& key, const std::string& v) {
    auto l = lower(v);
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline Cooperation to_cooperation(const std::string& key, const std::string& v) {
    auto u = lower(v);
    if (u == "c" || u == "cooperate") return Cooperation::Cooperate;
    if (u == "d" || u == "defect") return Cooperation::Defect;
    if (u == "oc") return Cooperation::OpportunisticCooperate;
    if (u == "od") return Cooperation::OpportunisticDefect;
    if (u == "o" || u == "opportunist") return Cooperation::Opportunist;
    throw ConfigError(key + ": unknown contribution strategy '" + v + "'");
}

inline Punishment to_punishment(const std::string& key, const std::string& v) {
    auto u = lower(v);
    if (u == "r" || u == "responsible") return Punishment::Responsible;
    if (u == "a" || u == "antisocial") return Punishment::Antisocial;
    if (u == "s" || u == "spiteful") return Punishment::Spiteful;
    if (u == "n" || u == "nonpunisher" || u == "none") return Punishment::NonPunisher;
    throw ConfigError(key + ": unknown punishment strategy '" + v + "'");
}

struct KeyInfo {
    const char* section;
    const char* name;
};

inline constexpr KeyInfo kKeys[] = {
    {"model", "family"},
    {"population", "size"},         {"population", "topology"},      {"population", "width"},
    {"population", "height"},       {"population", "neighborhood"},  {"population", "wraparound"},
    {"population", "mean_degree"},  {"population", "rewire_prob"},   {"population", "regenerate_topology"},
    {"population", "topology_seed"},
    {"game", "k"},        {"game", "c"},          {"game", "b"},         {"game", "r"},
    {"game", "lambda"},   {"game", "rho"},        {"game", "iota"},      {"game", "tau"},
    {"game", "base_pay"}, {"game", "fitness_scale"}, {"game", "d"},      {"game", "n_groups"},
    {"game", "pd_matrix"}, {"game", "pd_rounds"}, {"game", "tag_transmission"}, {"game", "contribution_strategies"}, {"game", "punishment_strategies"},
    {"game", "tie_weighting"}, {"game", "opportunist_info"},
    {"dynamics", "mu"}, {"dynamics", "s"}, {"dynamics", "m"},
    {"run", "generations"}, {"run", "seed"},
};

inline const KeyInfo* find_key(std::string_view key) {
    std::string_view bare = key;
    std::string_view section;
    if (auto dot = key.find('.'); dot != std::string_view::npos) {
        section = key.substr(0, dot);
        bare = key.substr(dot + 1);
    }
    for (const auto& k : kKeys)
        if (bare == k.name && (section.empty() || section == k.section)) return &k;
    return nullptr;
}

}  // namespace detail

inline const char* family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::PublicGoods: return "public_goods";
        case ModelFamily::ThirdParty: return "third_party";
        case ModelFamily::Threat: return "threat";
        case ModelFamily::Ethnocentrism: return "ethnocentrism";
    }
    return "?";
}

/// True when `key` (bare or "section.key") names a configuration key.
inline bool is_config_key(std::string_view key) { return detail::find_key(key) != nullptr; }

/// Assign one key from its textual value. Throws ConfigError for unknown keys
/// and malformed values; range checks happen in validate().
inline void set_config_value(ModelConfig& cfg, std::string_view key_in, const std::string& raw) {
    using namespace detail;
    const KeyInfo* info = find_key(key_in);
    if (!info) throw ConfigError("unknown key '" + std::string(key_in) + "'");
    const std::string key = info->name;
    const std::string v = trim(raw);

    if (key == "family") {
        auto f = lower(v);
        if (f == "public_goods" || f == "pgg") cfg.family = ModelFamily::PublicGoods;
        else if (f == "third_party" || f == "3pp") cfg.family = ModelFamily::ThirdParty;
        else if (f == "threat") cfg.family = ModelFamily::Threat;
        else if (f == "ethnocentrism") cfg.family = ModelFamily::Ethnocentrism;
        else throw ConfigError("family: unknown model family '" + v + "'");
    } else if (key == "size") {
        cfg.population = to_integer<std::size_t>(key, v);
    } else if (key == "topology") {
        auto t = lower(v);
        if (t == "well_mixed") cfg.topology = TopologyKind::WellMixed;
        else if (t == "grid") cfg.topology = TopologyKind::Grid;
        else if (t == "small_world") cfg.topology = TopologyKind::SmallWorld;
        else throw ConfigError("topology: expected well_mixed, grid or small_world, got '" + v + "'");
    } else if (key == "width") {
        cfg.width = to_integer<int>(key, v);
    } else if (key == "height") {
        cfg.height = to_integer<int>(key, v);
    } else if (key == "neighborhood") {
        auto t = lower(v);
        if (t == "von_neumann" || t == "4") cfg.neighborhood = Neighborhood::VonNeumann4;
        else if (t == "moore" || t == "8") cfg.neighborhood = Neighborhood::Moore8;
        else throw ConfigError("neighborhood: expected von_neumann or moore, got '" + v + "'");
    } else if (key == "wraparound") {
        cfg.wraparound = to_bool(key, v);
    } else if (key == "mean_degree") {
        cfg.mean_degree = to_integer<int>(key, v);
    } else if (key == "rewire_prob") {
        cfg.rewire_prob = to_double(key, v);
    } else if (key == "regenerate_topology") {
        cfg.regenerate_topology = to_bool(key, v);
    } else if (key == "topology_seed") {
        cfg.topology_seed = to_integer<std::uint64_t>(key, v);
    } else if (key == "k") {
        cfg.pgg.group_size = to_integer<int>(key, v);
    } else if (key == "c") {
        cfg.pgg.contribution = to_double(key, v);
    } else if (key == "b" || key == "r") {
        cfg.pgg.benefit_factor = to_double(key, v);
    } else if (key == "lambda") {
        cfg.pgg.punish_cost = to_double(key, v);
    } else if (key == "rho") {
        cfg.pgg.punish_penalty = to_double(key, v);
    } else if (key == "iota") {
        cfg.pgg.reputation_prob = to_double(key, v);
    } else if (key == "tau") {
        cfg.threat.threat_level = to_double(key, v);
    } else if (key == "base_pay") {
        cfg.threat.base_pay = to_double(key, v);
    } else if (key == "fitness_scale") {
        cfg.threat.fitness_scale = to_double(key, v);
    } else if (key == "d") {
        cfg.d = to_double(key, v);
    } else if (key == "n_groups") {
        cfg.n_groups = to_integer<int>(key, v);
    } else if (key == "pd_matrix") {
        auto parts = split_list(v);
        if (parts.size() != 4) throw ConfigError("pd_matrix: expected four values T, R, P, S");
        cfg.pd = {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2]),
                  to_double(key, parts[3])};
    } else if (key == "pd_rounds") {
        cfg.pd_rounds = to_integer<int>(key, v);
    } else if (key == "tag_transmission") {
        cfg.tag_transmission = to_bool(key, v);
    } else if (key == "contribution_strategies") {
        cfg.contribution_strategies.clear();
        for (const auto& p : split_list(v)) cfg.contribution_strategies.push_back(to_cooperation(key, p));
    } else if (key == "punishment_strategies") {
        cfg.punishment_strategies.clear();
        for (const auto& p : split_list(v)) cfg.punishment_strategies.push_back(to_punishment(key, p));
    } else if (key == "tie_weighting") {
        cfg.tie_weighting = to_bool(key, v);
    } else if (key == "opportunist_info") {
        auto t = lower(v);
        if (t == "neighbors") cfg.opportunist_info = OpportunistInfo::Neighbors;
        else if (t == "observer") cfg.opportunist_info = OpportunistInfo::Observer;
        else throw ConfigError("opportunist_info: expected neighbors or observer, got '" + v + "'");
    } else if (key == "mu") {
        cfg.mu = to_double(key, v);
    } else if (key == "s") {
        cfg.s = to_double(key, v);
    } else if (key == "m") {
        cfg.m = to_double(key, v);
    } else if (key == "generations") {
        cfg.generations = to_integer<int>(key, v);
    } else if (key == "seed") {
        cfg.seed = to_integer<std::uint64_t>(key, v);
    }
}

/// Contribution strategies in effect: the configured list, or the family default.
inline std::vector<Cooperation> contribution_strategies(const ModelConfig& cfg) {
    if (!cfg.contribution_strategies.empty()) return cfg.contribution_strategies;
    if (cfg.family == ModelFamily::PublicGoods)
        return {Cooperation::Cooperate, Cooperation::Defect, Cooperation::OpportunisticCooperate,
                Cooperation::OpportunisticDefect};
    return {Cooperation::Cooperate, Cooperation::Defect, Cooperation::Opportunist};
}

/// Threat model: the observer's reputation; third-party model: all neighbors.
inline OpportunistInfo opportunist_info(const ModelConfig& cfg) {
    if (cfg.opportunist_info) return *cfg.opportunist_info;
    return cfg.family == ModelFamily::Threat ? OpportunistInfo::Observer : OpportunistInfo::Neighbors;
}

inline std::vector<Punishment> punishment_strategies(const ModelConfig& cfg) {
    if (!cfg.punishment_strategies.empty()) return cfg.punishment_strategies;
    return {kAllPunishments.begin(), kAllPunishments.end()};
}

/// Range and consistency checks; throws ConfigError naming the offending key.
inline void validate(const ModelConfig& cfg) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!cfg.family) fail("family: missing required key [model] family");
    const ModelFamily fam = *cfg.family;

    auto wrap = [&](auto&& check) {
        try {
            check();
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    };

    if (cfg.topology == TopologyKind::Grid) {
        if (cfg.width < 2) fail("width: must be at least 2");
        if (cfg.height < 2) fail("height: must be at least 2");
    } else if (cfg.population < 2) {
        fail("size: population must be at least 2");
    }
    if (cfg.topology == TopologyKind::SmallWorld) {
        if (cfg.mean_degree < 2 || cfg.mean_degree % 2 != 0) fail("mean_degree: must be an even integer >= 2");
        if (cfg.population <= static_cast<std::size_t>(cfg.mean_degree)) fail("mean_degree: must be below size");
        if (!(cfg.rewire_prob >= 0.0 && cfg.rewire_prob <= 1.0)) fail("rewire_prob: must lie in [0, 1]");
    }
    if (!(cfg.mu >= 0.0 && cfg.mu <= 1.0)) fail("mu: exploration rate must lie in [0, 1]");
    if (!(cfg.s >= 0.0)) fail("s: selection strength must be >= 0");
    if (!(cfg.m >= 0.0 && cfg.m <= 1.0)) fail("m: mobility must lie in [0, 1]");
    if (cfg.generations < 0) fail("generations: must be >= 0");

    if (fam == ModelFamily::Ethnocentrism) {
        wrap([&] { validate(cfg.pd); });
        if (cfg.n_groups < 1) fail("n_groups: must be at least 1");
        if (cfg.pd_rounds < 1) fail("pd_rounds: must be at least 1");
        if (cfg.topology == TopologyKind::WellMixed) fail("topology: ethnocentrism needs a grid or small_world");
        return;
    }

    wrap([&] { validate(cfg.pgg); });
    if (fam == ModelFamily::PublicGoods && static_cast<std::size_t>(cfg.pgg.group_size) > cfg.node_count())
        fail("k: group size exceeds population");
    if (fam == ModelFamily::Threat) {
        wrap([&] { validate(cfg.threat); });
        if (cfg.topology == TopologyKind::WellMixed) fail("topology: threat model needs a grid or small_world");
    }
    if (fam == ModelFamily::ThirdParty && cfg.topology == TopologyKind::WellMixed)
        fail("topology: third-party model needs a grid or small_world");

    const auto coop = contribution_strategies(cfg);
    for (auto c : coop) {
        const bool merged = c == Cooperation::Opportunist;
        const bool split = c == Cooperation::OpportunisticCooperate || c == Cooperation::OpportunisticDefect;
        if (fam == ModelFamily::PublicGoods && merged)
            fail("contribution_strategies: O needs always-visible reputations; use OC/OD in public_goods");
        if (fam != ModelFamily::PublicGoods && split)
            fail("contribution_strategies: OC/OD apply only to public_goods; use O");
    }
    if (punishment_strategies(cfg).empty()) fail("punishment_strategies: must not be empty");
}

struct IniEntry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
};

/// Syntax-only pass over a sectioned key-value document.
inline std::vector<IniEntry> read_ini(std::istream& in, const std::string& source = "<config>") {
    using namespace detail;
    std::vector<IniEntry> out;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno) + ": ";
        auto t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + "unterminated section header");
            section = lower(trim(std::string_view(t).substr(1, t.size() - 2)));
            if (section.empty()) throw ConfigError(where + "empty section name");
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        if (section.empty()) throw ConfigError(where + "key outside of any section");
        out.push_back({section, lower(trim(std::string_view(t).substr(0, eq))),
                       trim(std::string_view(t).substr(eq + 1)), lineno});
    }
    return out;
}

/// Build and validate a ModelConfig from parsed entries. Entries in
/// `passthrough` sections are left for other readers.
inline ModelConfig config_from_entries(const std::vector<IniEntry>& entries, const std::string& source,
                                       const std::vector<std::string>& passthrough = {"sweep"}) {
    using namespace detail;
    static const std::vector<std::string> sections{"model", "population", "game", "dynamics", "run"};
    ModelConfig cfg;
    std::map<std::string, int> seen;
    for (const auto& e : entries) {
        const std::string where = source + ":" + std::to_string(e.line) + ": ";
        if (std::find(passthrough.begin(), passthrough.end(), e.section) != passthrough.end()) continue;
        if (std::find(sections.begin(), sections.end(), e.section) == sections.end())
            throw ConfigError(where + "unknown section [" + e.section + "]");
        const KeyInfo* info = find_key(e.key);
        if (!info || e.section != info->section)
            throw ConfigError(where + "unknown key '" + e.key + "' in [" + e.section + "]");
        if (auto it = seen.find(info->name); it != seen.end())
            throw ConfigError(where + "duplicate key '" + e.key + "' (first set on line " +
                              std::to_string(it->second) + ")");
        seen[info->name] = e.line;
        // b and r name the same quantity.
        if ((e.key == "b" && seen.count("r")) || (e.key == "r" && seen.count("b")))
            throw ConfigError(where + "set only one of 'b' and 'r'");
        try {
            set_config_value(cfg, e.key, e.value);
        } catch (const ConfigError& err) {
            throw ConfigError(where + err.what());
        }
    }
    validate(cfg);
    return cfg;
}

inline ModelConfig parse_config(std::istream& in, const std::string& source = "<config>") {
    return config_from_entries(read_ini(in, source), source);
}

inline ModelConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

}  // namespace egt
