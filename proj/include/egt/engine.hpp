// Generation loop for the four model families.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "egt/config.hpp"
#include "egt/dynamics.hpp"
#include "egt/games.hpp"
#include "egt/rng.hpp"
#include "egt/topology.hpp"

namespace egt {

enum class Phase {
    MobilityShuffle,
    BasePayAndThreat,
    ContributionPhase,
    PunishmentPhase,
    PdRounds,
    FitnessTransform,
    MetricsSnapshot,
    ImitationUpdate,
};

using GenerationSchedule = std::vector<Phase>;

inline GenerationSchedule schedule_for(ModelFamily family, double mobility) {
    GenerationSchedule s;
    if (mobility > 0.0) s.push_back(Phase::MobilityShuffle);
    switch (family) {
        case ModelFamily::PublicGoods:
        case ModelFamily::ThirdParty:
            s.insert(s.end(), {Phase::ContributionPhase, Phase::PunishmentPhase});
            break;
        case ModelFamily::Threat:
            s.insert(s.end(), {Phase::BasePayAndThreat, Phase::ContributionPhase, Phase::PunishmentPhase,
                               Phase::FitnessTransform});
            break;
        case ModelFamily::Ethnocentrism:
            s.push_back(Phase::PdRounds);
            break;
    }
    s.insert(s.end(), {Phase::MetricsSnapshot, Phase::ImitationUpdate});
    return s;
}

struct Agent {
    std::size_t id = 0;
    std::size_t strategy = 0;  // index into the model's strategy universe
    int group_tag = 0;
    double payoff = 0.0;
};

struct MetricsRecord {
    int generation = 0;
    std::vector<double> strategy_proportions;
    double cooperation_rate = 0.0;
    double mean_payoff = 0.0;

    std::uint64_t cooperative_actions = 0;
    std::uint64_t total_actions = 0;
    // Ethnocentrism only: PD moves split by whether the two players share a tag.
    std::uint64_t ingroup_actions = 0;
    std::uint64_t ingroup_defections = 0;
    std::uint64_t outgroup_actions = 0;
    std::uint64_t outgroup_defections = 0;
};

/// The strategy universe of a configuration; exactly one of the two lists is
/// populated.
struct StrategyUniverse {
    std::vector<NormStrategy> norms;
    std::vector<EntitativeProgram> programs;

    std::size_t size() const { return norms.empty() ? programs.size() : norms.size(); }

    std::vector<std::string> labels() const {
        std::vector<std::string> out;
        for (const auto& s : norms) out.push_back(label(s));
        for (const auto& p : programs) out.push_back(label(p));
        return out;
    }
};

inline StrategyUniverse strategy_universe(const ModelConfig& cfg) {
    StrategyUniverse u;
    if (cfg.family == ModelFamily::Ethnocentrism) u.programs = entitative_universe();
    else u.norms = norm_universe(contribution_strategies(cfg), punishment_strategies(cfg));
    return u;
}

inline Topology build_topology(const ModelConfig& cfg, Rng& rng) {
    switch (cfg.topology) {
        case TopologyKind::WellMixed: return make_well_mixed(cfg.population);
        case TopologyKind::Grid: return make_grid(cfg.width, cfg.height, cfg.neighborhood, cfg.wraparound);
        case TopologyKind::SmallWorld: return make_small_world(cfg.population, cfg.mean_degree, cfg.rewire_prob, rng);
    }
    throw ConfigError("topology: unsupported kind");
}

/// One simulation execution: owns its agents, placement, and random stream.
class Simulation {
public:
    /// Validates `cfg`, builds the topology and draws the initial strategies
    /// (and group tags) uniformly.
    Simulation(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg)), rng_(seed) {
        validate(cfg_);
        if (cfg_.regenerate_topology) {
            topology_ = std::make_shared<const Topology>(build_topology(cfg_, rng_));
        } else {
            Rng topo_rng(cfg_.topology_seed);
            topology_ = std::make_shared<const Topology>(build_topology(cfg_, topo_rng));
        }
        init_population();
    }

    /// Use a prebuilt topology (shared between executions) instead of building one.
    Simulation(ModelConfig cfg, std::shared_ptr<const Topology> topology, std::uint64_t seed)
        : cfg_(std::move(cfg)), rng_(seed), topology_(std::move(topology)) {
        validate(cfg_);
        if (!topology_) throw std::invalid_argument("Simulation: null topology");
        init_population();
    }

    const ModelConfig& config() const { return cfg_; }
    const Topology& topology() const { return *topology_; }
    const Placement& placement() const { return placement_; }
    const std::vector<Agent>& agents() const { return agents_; }
    const StrategyUniverse& universe() const { return universe_; }
    const GenerationSchedule& schedule() const { return schedule_; }
    int generation() const { return generation_; }

    /// Scores compared by the last imitation step (payoffs, or fitness in the
    /// threat model).
    const std::vector<double>& last_scores() const { return scores_; }

    void set_strategies(std::span<const std::size_t> strategies) {
        if (strategies.size() != agents_.size()) throw std::invalid_argument("set_strategies: size mismatch");
        for (std::size_t i = 0; i < agents_.size(); ++i) {
            if (strategies[i] >= universe_.size()) throw std::out_of_range("set_strategies: not in universe");
            agents_[i].strategy = strategies[i];
        }
    }

    void set_group_tags(std::span<const int> tags) {
        if (tags.size() != agents_.size()) throw std::invalid_argument("set_group_tags: size mismatch");
        for (std::size_t i = 0; i < agents_.size(); ++i) agents_[i].group_tag = tags[i];
    }

    /// Advance one generation and return the metrics of the generation just played.
    MetricsRecord run_generation() {
        MetricsRecord rec;
        rec.generation = generation_;
        for (auto& a : agents_) a.payoff = 0.0;
        observations_.clear();

        for (Phase phase : schedule_) {
            switch (phase) {
                case Phase::MobilityShuffle: placement_ = mobility_shuffle(std::move(placement_), cfg_.m, rng_); break;
                case Phase::BasePayAndThreat:
                    for (auto& a : agents_) a.payoff += cfg_.threat.base_pay - cfg_.threat.threat_level;
                    break;
                case Phase::ContributionPhase: contribution_phase(rec); break;
                case Phase::PunishmentPhase: punishment_phase(); break;
                case Phase::PdRounds: pd_rounds(rec); break;
                case Phase::FitnessTransform: break;  // folded into score computation below
                case Phase::MetricsSnapshot: snapshot(rec); break;
                case Phase::ImitationUpdate: imitation(); break;
            }
        }
        ++generation_;
        return rec;
    }

private:
    struct Observation {
        std::size_t target;
        std::size_t observer;
        Action action;
        double target_weight;
        double observer_weight;
    };

    void init_population() {
        universe_ = strategy_universe(cfg_);
        schedule_ = schedule_for(*cfg_.family, cfg_.m);
        const std::size_t n = topology_->node_count();
        if (n != cfg_.node_count()) throw ConfigError("size: topology node count does not match configuration");
        for (std::size_t v = 0; v < n; ++v)
            if (topology_->degree(v) == 0)
                throw ConfigError("topology: node " + std::to_string(v) + " has no neighbors");
        edges_ = topology_->edges();
        placement_ = Placement(n);
        agents_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            agents_[i].id = i;
            agents_[i].strategy = rng_.below(universe_.size());
        }
        if (cfg_.family == ModelFamily::Ethnocentrism) {
            for (auto& a : agents_) a.group_tag = static_cast<int>(rng_.below(static_cast<std::size_t>(cfg_.n_groups)));
            individual_memory_.assign(n * n, 0);
            group_memory_.assign(n * static_cast<std::size_t>(cfg_.n_groups), 0);
        }
        scores_.assign(n, 0.0);
    }

    const NormStrategy& norm_of(std::size_t agent) const { return universe_.norms[agents_[agent].strategy]; }

    double tie_weight(std::size_t node) const {
        return cfg_.family == ModelFamily::ThirdParty && cfg_.tie_weighting ? strength_of_ties(*topology_, node) : 1.0;
    }

    /// Contribution of every agent when reputations of its network neighbors
    /// are always visible.
    std::vector<Action> neighborhood_actions() const {
        std::vector<Action> actions(agents_.size());
        std::vector<Punishment> reps;
        for (std::size_t a = 0; a < agents_.size(); ++a) {
            reps.clear();
            for (auto v : topology_->neighbors(placement_.node_of(a)))
                reps.push_back(norm_of(placement_.agent_at(v)).punishment);
            actions[a] = resolve_contribution(norm_of(a).cooperation, std::span<const Punishment>(reps), cfg_.pgg);
        }
        return actions;
    }

    /// Draw k - 1 co-participants for the group anchored at `node`: distinct
    /// members of its neighborhood, padded with random non-neighbors when the
    /// neighborhood is too small.
    void sample_group(std::size_t node, std::size_t k, std::vector<std::size_t>& nodes) {
        nodes.clear();
        nodes.push_back(node);
        const auto& nbrs = topology_->neighbors(node);
        const std::size_t want = k - 1;
        if (nbrs.size() <= want) {
            nodes.insert(nodes.end(), nbrs.begin(), nbrs.end());
            const std::size_t n = topology_->node_count();
            while (nodes.size() < k) {
                const std::size_t v = rng_.below(n);
                if (std::find(nodes.begin(), nodes.end(), v) == nodes.end()) nodes.push_back(v);
            }
            return;
        }
        // Floyd's sampling of `want` distinct positions.
        picked_.clear();
        const std::size_t d = nbrs.size();
        for (std::size_t j = d - want; j < d; ++j) {
            std::size_t t = rng_.below(j + 1);
            if (std::find(picked_.begin(), picked_.end(), t) != picked_.end()) t = j;
            picked_.push_back(t);
        }
        for (auto p : picked_) nodes.push_back(nbrs[p]);
    }

    /// Play one public goods game among `members` (agent ids) and queue the
    /// punishment observations. `observed` selects how each participant's
    /// observer is revealed and how the contribution is resolved.
    template <class Resolve>
    void play_group(std::span<const std::size_t> members, Resolve&& resolve, MetricsRecord& rec) {
        PggParams p = cfg_.pgg;
        p.group_size = static_cast<int>(members.size());
        const std::size_t k = members.size();
        actions_.resize(k);
        int contributors = 0;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t q = rng_.below(k - 1);
            if (q >= i) ++q;
            const std::size_t observer = members[q];
            actions_[i] = resolve(members[i], observer);
            contributors += actions_[i] == Action::Contribute;
            observations_.push_back({members[i], observer, actions_[i], 1.0, 1.0});
        }
        const auto pay = pgg_payoffs(contributors, p);
        for (std::size_t i = 0; i < k; ++i)
            agents_[members[i]].payoff += actions_[i] == Action::Contribute ? pay.cooperator : pay.defector;
        rec.cooperative_actions += static_cast<std::uint64_t>(contributors);
        rec.total_actions += k;
    }

    void contribution_phase(MetricsRecord& rec) {
        switch (*cfg_.family) {
            case ModelFamily::PublicGoods: {
                const auto k = static_cast<std::size_t>(cfg_.pgg.group_size);
                std::vector<std::size_t> nodes, members;
                for (std::size_t f = 0; f < agents_.size(); ++f) {
                    sample_group(placement_.node_of(f), k, nodes);
                    members.clear();
                    for (auto v : nodes) members.push_back(placement_.agent_at(v));
                    play_group(members, [&](std::size_t self, std::size_t observer) {
                        std::optional<Punishment> rep;
                        if (rng_.bernoulli(cfg_.pgg.reputation_prob)) rep = norm_of(observer).punishment;
                        return resolve_contribution(norm_of(self).cooperation, rep, cfg_.pgg);
                    }, rec);
                }
                break;
            }
            case ModelFamily::Threat: {
                const bool observer_info = opportunist_info(cfg_) == OpportunistInfo::Observer;
                const auto actions = observer_info ? std::vector<Action>{} : neighborhood_actions();
                std::vector<std::size_t> members;
                for (std::size_t v = 0; v < topology_->node_count(); ++v) {
                    members.clear();
                    members.push_back(placement_.agent_at(v));
                    for (auto u : topology_->neighbors(v)) members.push_back(placement_.agent_at(u));
                    if (observer_info)
                        play_group(members, [&](std::size_t self, std::size_t observer) {
                            return resolve_contribution(norm_of(self).cooperation,
                                                        std::optional<Punishment>(norm_of(observer).punishment), cfg_.pgg);
                        }, rec);
                    else
                        play_group(members, [&](std::size_t self, std::size_t) { return actions[self]; }, rec);
                }
                break;
            }
            case ModelFamily::ThirdParty: third_party_rounds(rec); break;
            case ModelFamily::Ethnocentrism: break;
        }
    }

    /// Pick a uniform neighbor of `node` other than `exclude`.
    std::optional<std::size_t> third_party_observer(std::size_t node, std::size_t exclude) {
        const auto& nbrs = topology_->neighbors(node);
        if (nbrs.size() < 2) return std::nullopt;
        std::size_t idx = rng_.below(nbrs.size() - 1);
        const auto pos = static_cast<std::size_t>(std::lower_bound(nbrs.begin(), nbrs.end(), exclude) - nbrs.begin());
        if (idx >= pos) ++idx;
        return nbrs[idx];
    }

    void third_party_rounds(MetricsRecord& rec) {
        const auto actions = neighborhood_actions();
        const bool observer_info = opportunist_info(cfg_) == OpportunistInfo::Observer;
        for (auto [u, v] : edges_) {
            PairwiseRound round;
            const std::array<std::size_t, 2> nodes{u, v};
            std::array<std::optional<std::size_t>, 2> observer_nodes;
            for (int i = 0; i < 2; ++i) {
                round.players[i] = placement_.agent_at(nodes[i]);
                round.actions[i] = actions[round.players[i]];
                observer_nodes[i] = third_party_observer(nodes[i], nodes[1 - i]);
                if (observer_nodes[i]) {
                    round.observers[i] = placement_.agent_at(*observer_nodes[i]);
                    round.observer_strategies[i] = norm_of(*round.observers[i]).punishment;
                    if (observer_info)
                        round.actions[i] = resolve_contribution(norm_of(round.players[i]).cooperation,
                                                                std::optional(round.observer_strategies[i]), cfg_.pgg);
                }
            }
            const auto out = pairwise_dilemma_round(round, cfg_.pgg);
            for (int i = 0; i < 2; ++i) {
                agents_[round.players[i]].payoff += out.player_delta[i] * tie_weight(nodes[i]);
                if (observer_nodes[i])
                    agents_[*round.observers[i]].payoff += out.observer_delta[i] * tie_weight(*observer_nodes[i]);
                rec.cooperative_actions += round.actions[i] == Action::Contribute;
            }
            rec.total_actions += 2;
        }
    }

    void punishment_phase() {
        for (const auto& o : observations_) {
            const auto d = apply_punishment(o.action, norm_of(o.observer).punishment, cfg_.pgg);
            agents_[o.target].payoff += d.target * o.target_weight;
            agents_[o.observer].payoff += d.punisher * o.observer_weight;
        }
    }

    std::uint8_t& individual_memory(std::size_t self, std::size_t other) {
        return individual_memory_[self * agents_.size() + other];
    }
    std::uint8_t& group_memory(std::size_t self, int tag) {
        return group_memory_[self * static_cast<std::size_t>(cfg_.n_groups) + static_cast<std::size_t>(tag)];
    }

    static std::optional<Move> decode(std::uint8_t m) {
        if (m == 0) return std::nullopt;
        return m == 1 ? Move::Cooperate : Move::Defect;
    }
    static std::uint8_t encode(Move m) { return m == Move::Cooperate ? 1 : 2; }

    Move choose_move(std::size_t self, std::size_t other) {
        const auto& prog = universe_.programs[agents_[self].strategy];
        const int tag = agents_[other].group_tag;
        const std::uint8_t mem = prog.entitativity == Entitativity::Group ? group_memory(self, tag)
                                                                          : individual_memory(self, other);
        return entitative_action(prog, agents_[self].group_tag, tag, decode(mem));
    }

    void pd_rounds(MetricsRecord& rec) {
        for (int round = 0; round < cfg_.pd_rounds; ++round) {
            for (auto [u, v] : edges_) {
                const std::size_t a = placement_.agent_at(u);
                const std::size_t b = placement_.agent_at(v);
                const Move ma = choose_move(a, b);
                const Move mb = choose_move(b, a);
                const auto [pa, pb] = pd_payoffs(ma, mb, cfg_.pd);
                agents_[a].payoff += pa;
                agents_[b].payoff += pb;
                individual_memory(a, b) = encode(mb);
                individual_memory(b, a) = encode(ma);
                group_memory(a, agents_[b].group_tag) = encode(mb);
                group_memory(b, agents_[a].group_tag) = encode(ma);

                const std::uint64_t defections = (ma == Move::Defect) + (mb == Move::Defect);
                rec.cooperative_actions += 2 - defections;
                rec.total_actions += 2;
                if (agents_[a].group_tag == agents_[b].group_tag) {
                    rec.ingroup_actions += 2;
                    rec.ingroup_defections += defections;
                } else {
                    rec.outgroup_actions += 2;
                    rec.outgroup_defections += defections;
                }
            }
        }
    }

    void snapshot(MetricsRecord& rec) {
        const double n = static_cast<double>(agents_.size());
        rec.strategy_proportions.assign(universe_.size(), 0.0);
        double payoff = 0.0;
        for (const auto& a : agents_) {
            rec.strategy_proportions[a.strategy] += 1.0;
            payoff += a.payoff;
        }
        for (auto& p : rec.strategy_proportions) p /= n;
        rec.mean_payoff = payoff / n;
        rec.cooperation_rate = rec.total_actions == 0
                                   ? 0.0
                                   : static_cast<double>(rec.cooperative_actions) / static_cast<double>(rec.total_actions);
    }

    void imitation() {
        const std::size_t n = agents_.size();
        std::vector<std::size_t> current(n), partner(n);
        for (std::size_t a = 0; a < n; ++a) {
            current[a] = agents_[a].strategy;
            scores_[a] = cfg_.family == ModelFamily::Threat ? fitness(agents_[a].payoff, cfg_.threat) : agents_[a].payoff;
            const auto& nbrs = topology_->neighbors(placement_.node_of(a));
            partner[a] = placement_.agent_at(nbrs[rng_.below(nbrs.size())]);
        }
        const auto next = imitation_step(current, scores_, partner, FermiParams{cfg_.s},
                                         ExplorationParams{cfg_.mu}, universe_.size(), rng_);
        const bool copy_tags = cfg_.family == ModelFamily::Ethnocentrism && cfg_.tag_transmission;
        std::vector<int> tags;
        if (copy_tags)
            for (const auto& a : agents_) tags.push_back(a.group_tag);
        for (std::size_t a = 0; a < n; ++a) {
            agents_[a].strategy = next[a].strategy;
            if (copy_tags && next[a].source != kNoSource) agents_[a].group_tag = tags[next[a].source];
        }
    }

    ModelConfig cfg_;
    Rng rng_;
    std::shared_ptr<const Topology> topology_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    Placement placement_;
    std::vector<Agent> agents_;
    StrategyUniverse universe_;
    GenerationSchedule schedule_;
    int generation_ = 0;

    std::vector<double> scores_;
    std::vector<Observation> observations_;
    std::vector<Action> actions_;
    std::vector<std::size_t> picked_;
    std::vector<std::uint8_t> individual_memory_;  // 0 unseen, 1 cooperate, 2 defect
    std::vector<std::uint8_t> group_memory_;
};

/// Run `cfg.generations` generations from a fresh population; one record per
/// generation. Identical (cfg, seed) pairs produce identical records.
inline std::vector<MetricsRecord> run_simulation(const ModelConfig& cfg, std::uint64_t seed) {
    Simulation sim(cfg, seed);
    std::vector<MetricsRecord> out;
    out.reserve(static_cast<std::size_t>(std::max(cfg.generations, 0)));
    for (int g = 0; g < cfg.generations; ++g) out.push_back(sim.run_generation());
    return out;
}

}  // namespace egt
