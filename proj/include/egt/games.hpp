// Payoff rules for the four model families: public goods with punishment and
// reputation, pairwise dilemma with third-party punishment, threat-modulated
// public goods, and the entitative iterated Prisoner's Dilemma.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace egt {

enum class Cooperation : std::uint8_t {
    Cooperate,
    Defect,
    OpportunisticCooperate,
    OpportunisticDefect,
    Opportunist,  // OC and OD merged; only where reputations are always visible
};

enum class Punishment : std::uint8_t { Responsible, Antisocial, Spiteful, NonPunisher };

enum class Action : std::uint8_t { Contribute, Withhold };

inline constexpr std::array kAllPunishments{Punishment::Responsible, Punishment::Antisocial,
                                            Punishment::Spiteful, Punishment::NonPunisher};

inline const char* code(Cooperation c) {
    switch (c) {
        case Cooperation::Cooperate: return "C";
        case Cooperation::Defect: return "D";
        case Cooperation::OpportunisticCooperate: return "OC";
        case Cooperation::OpportunisticDefect: return "OD";
        case Cooperation::Opportunist: return "O";
    }
    return "?";
}

inline const char* code(Punishment p) {
    switch (p) {
        case Punishment::Responsible: return "R";
        case Punishment::Antisocial: return "A";
        case Punishment::Spiteful: return "S";
        case Punishment::NonPunisher: return "N";
    }
    return "?";
}

struct PggParams {
    int group_size = 5;          // k
    double contribution = 1.0;   // c
    double benefit_factor = 3.0; // b (r in the threat model)
    double punish_cost = 1.0;    // lambda
    double punish_penalty = 3.0; // rho
    double reputation_prob = 1.0;  // iota
};

inline void validate(const PggParams& p) {
    if (p.group_size < 2) throw std::invalid_argument("k: group size must be at least 2");
    if (!(p.contribution > 0.0)) throw std::invalid_argument("c: contribution must be positive");
    if (!(p.benefit_factor > 1.0)) throw std::invalid_argument("b: benefit factor must exceed 1");
    if (!(p.punish_cost > 0.0 && p.punish_cost < p.punish_penalty))
        throw std::invalid_argument("lambda/rho: require 0 < lambda < rho");
    if (!(p.reputation_prob >= 0.0 && p.reputation_prob <= 1.0))
        throw std::invalid_argument("iota: reputation probability must lie in [0, 1]");
}

/// A cooperation choice paired with a punishment choice.
struct NormStrategy {
    Cooperation cooperation = Cooperation::Cooperate;
    Punishment punishment = Punishment::NonPunisher;

    friend bool operator==(const NormStrategy&, const NormStrategy&) = default;
};

inline std::string label(const NormStrategy& s) {
    return std::string(code(s.cooperation)) + "-" + code(s.punishment);
}

/// Cartesian product in the order given (cooperation-major).
inline std::vector<NormStrategy> norm_universe(std::span<const Cooperation> cooperation,
                                               std::span<const Punishment> punishment) {
    std::vector<NormStrategy> out;
    for (auto c : cooperation)
        for (auto p : punishment) out.push_back({c, p});
    return out;
}

/// Sixteen strategies of the reputation model.
inline std::vector<NormStrategy> reputation_universe() {
    constexpr std::array coop{Cooperation::Cooperate, Cooperation::Defect,
                              Cooperation::OpportunisticCooperate, Cooperation::OpportunisticDefect};
    return norm_universe(coop, kAllPunishments);
}

/// Twelve strategies of the networked models where reputations are always visible.
inline std::vector<NormStrategy> networked_universe() {
    constexpr std::array coop{Cooperation::Cooperate, Cooperation::Defect, Cooperation::Opportunist};
    return norm_universe(coop, kAllPunishments);
}

struct PggPayoffs {
    double cooperator = 0.0;
    double defector = 0.0;
};

inline PggPayoffs pgg_payoffs(int cooperator_count, const PggParams& p) {
    if (cooperator_count < 0 || cooperator_count > p.group_size)
        throw std::out_of_range("pgg_payoffs: cooperator count " + std::to_string(cooperator_count) +
                                " outside [0, " + std::to_string(p.group_size) + "]");
    const double share = p.benefit_factor * p.contribution * cooperator_count / p.group_size;
    return {share - p.contribution, share};
}

inline bool punishes(Punishment punisher, Action target) {
    switch (punisher) {
        case Punishment::Responsible: return target == Action::Withhold;
        case Punishment::Antisocial: return target == Action::Contribute;
        case Punishment::Spiteful: return true;
        case Punishment::NonPunisher: return false;
    }
    return false;
}

/// Contribute when the expected loss from being punished for withholding
/// outweighs the contribution plus the expected loss from being punished for
/// contributing. Reputations are weighted by their frequency in the set; ties
/// go to Withhold.
inline Action opportunistic_choice(std::span<const Punishment> reputations, const PggParams& p) {
    if (reputations.empty()) throw std::invalid_argument("opportunistic_choice: empty reputation set");
    std::size_t punish_contributors = 0;
    std::size_t punish_withholders = 0;
    for (auto r : reputations) {
        punish_contributors += punishes(r, Action::Contribute);
        punish_withholders += punishes(r, Action::Withhold);
    }
    const double n = static_cast<double>(reputations.size());
    const double contribute = -p.contribution - p.punish_penalty * (punish_contributors / n);
    const double withhold = -p.punish_penalty * (punish_withholders / n);
    return contribute > withhold ? Action::Contribute : Action::Withhold;
}

inline Action opportunistic_choice(Punishment reputation, const PggParams& p) {
    return opportunistic_choice(std::span<const Punishment>(&reputation, 1), p);
}

class ModelError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// `observer_reputations` is empty when no reputation information was revealed.
inline Action resolve_contribution(Cooperation strategy, std::span<const Punishment> observer_reputations,
                                   const PggParams& p) {
    const bool informed = !observer_reputations.empty();
    switch (strategy) {
        case Cooperation::Cooperate: return Action::Contribute;
        case Cooperation::Defect: return Action::Withhold;
        case Cooperation::OpportunisticCooperate:
            return informed ? opportunistic_choice(observer_reputations, p) : Action::Contribute;
        case Cooperation::OpportunisticDefect:
            return informed ? opportunistic_choice(observer_reputations, p) : Action::Withhold;
        case Cooperation::Opportunist:
            if (!informed)
                throw ModelError("Opportunist strategy requires reputation information");
            return opportunistic_choice(observer_reputations, p);
    }
    return Action::Withhold;
}

inline Action resolve_contribution(Cooperation strategy, std::optional<Punishment> observer,
                                   const PggParams& p) {
    if (observer) return resolve_contribution(strategy, std::span<const Punishment>(&*observer, 1), p);
    return resolve_contribution(strategy, std::span<const Punishment>{}, p);
}

struct PunishmentDelta {
    double punisher = 0.0;
    double target = 0.0;
};

inline PunishmentDelta apply_punishment(Action target_action, Punishment punisher, const PggParams& p) {
    if (!punishes(punisher, target_action)) return {};
    return {-p.punish_cost, -p.punish_penalty};
}

/// One pairwise cooperation dilemma (a two-player public goods game) with an
/// uninvolved observer per player.
struct PairwiseRound {
    std::array<std::size_t, 2> players{};
    std::array<Action, 2> actions{};
    /// Observer of each player's action; nullopt when the player has no
    /// candidate observer.
    std::array<std::optional<std::size_t>, 2> observers{};
    std::array<Punishment, 2> observer_strategies{};
};

struct PairwiseOutcome {
    std::array<double, 2> player_delta{};
    std::array<double, 2> observer_delta{};
};

inline PairwiseOutcome pairwise_dilemma_round(const PairwiseRound& round, PggParams p) {
    const auto& [a, b] = round.players;
    if (a == b) throw ModelError("pairwise_dilemma_round: a player cannot play itself");
    for (const auto& o : round.observers)
        if (o && (*o == a || *o == b))
            throw ModelError("pairwise_dilemma_round: observer must be distinct from both players");

    p.group_size = 2;
    const int contributors = (round.actions[0] == Action::Contribute) + (round.actions[1] == Action::Contribute);
    const auto pay = pgg_payoffs(contributors, p);

    PairwiseOutcome out;
    for (int i = 0; i < 2; ++i) {
        out.player_delta[i] = round.actions[i] == Action::Contribute ? pay.cooperator : pay.defector;
        if (!round.observers[i]) continue;
        const auto pd = apply_punishment(round.actions[i], round.observer_strategies[i], p);
        out.player_delta[i] += pd.target;
        out.observer_delta[i] = pd.punisher;
    }
    return out;
}

struct ThreatParams {
    double base_pay = 30.0;
    double threat_level = 0.0;   // tau
    double fitness_scale = 0.1;
};

inline void validate(const ThreatParams& t) {
    if (!(t.threat_level >= 0.0)) throw std::invalid_argument("tau: threat level must be >= 0");
    if (!(t.fitness_scale > 0.0)) throw std::invalid_argument("fitness_scale must be positive");
    if (!std::isfinite(t.base_pay)) throw std::invalid_argument("base_pay must be finite");
}

/// Diminishing-returns map from accumulated payoff to reproductive fitness.
inline double fitness(double total_payoff, const ThreatParams& t) {
    return -std::expm1(-t.fitness_scale * total_payoff);
}

// Entitative Prisoner's Dilemma.

enum class Move : std::uint8_t { Cooperate, Defect };

inline Move opposite(Move m) { return m == Move::Cooperate ? Move::Defect : Move::Cooperate; }

enum class Rule : std::uint8_t { AllC, AllD, TFT, OTFT };

inline constexpr std::array kAllRules{Rule::AllC, Rule::AllD, Rule::TFT, Rule::OTFT};

inline const char* code(Rule r) {
    switch (r) {
        case Rule::AllC: return "AllC";
        case Rule::AllD: return "AllD";
        case Rule::TFT: return "TFT";
        case Rule::OTFT: return "OTFT";
    }
    return "?";
}

enum class Entitativity : std::uint8_t { Group, Individual };

/// Group-entitative programs use `ingroup`/`outgroup`; individual-entitative
/// programs use `unified` and ignore the opponent's tag.
struct EntitativeProgram {
    Entitativity entitativity = Entitativity::Individual;
    Rule ingroup = Rule::AllC;
    Rule outgroup = Rule::AllC;
    Rule unified = Rule::AllC;

    static EntitativeProgram group(Rule in, Rule out) { return {Entitativity::Group, in, out, Rule::AllC}; }
    static EntitativeProgram individual(Rule r) { return {Entitativity::Individual, Rule::AllC, Rule::AllC, r}; }

    friend bool operator==(const EntitativeProgram&, const EntitativeProgram&) = default;
};

inline std::string label(const EntitativeProgram& p) {
    if (p.entitativity == Entitativity::Group)
        return std::string("G:") + code(p.ingroup) + "/" + code(p.outgroup);
    return std::string("I:") + code(p.unified);
}

/// All 16 group-entitative programs followed by the 4 individual-entitative ones.
inline std::vector<EntitativeProgram> entitative_universe() {
    std::vector<EntitativeProgram> out;
    for (auto in : kAllRules)
        for (auto outr : kAllRules) out.push_back(EntitativeProgram::group(in, outr));
    for (auto r : kAllRules) out.push_back(EntitativeProgram::individual(r));
    return out;
}

/// What `self` plays against an opponent. `remembered` is the last move
/// received from the opponent's group (group-entitative) or from the opponent
/// itself (individual-entitative); an unseen opponent counts as Cooperate.
inline Move entitative_action(const EntitativeProgram& program, int self_tag, int opponent_tag,
                              std::optional<Move> remembered) {
    Rule rule = program.unified;
    if (program.entitativity == Entitativity::Group)
        rule = self_tag == opponent_tag ? program.ingroup : program.outgroup;
    const Move last = remembered.value_or(Move::Cooperate);
    switch (rule) {
        case Rule::AllC: return Move::Cooperate;
        case Rule::AllD: return Move::Defect;
        case Rule::TFT: return last;
        case Rule::OTFT: return opposite(last);
    }
    return Move::Defect;
}

struct PdMatrix {
    double temptation = 5.0;
    double reward = 3.0;
    double punishment = 1.0;
    double sucker = 0.0;
};

inline void validate(const PdMatrix& m) {
    if (!(m.temptation > m.reward && m.reward > m.punishment && m.punishment > m.sucker))
        throw std::invalid_argument("pd_matrix: require temptation > reward > punishment > sucker");
}

inline std::pair<double, double> pd_payoffs(Move a, Move b, const PdMatrix& m) {
    if (a == Move::Cooperate) return b == Move::Cooperate ? std::pair{m.reward, m.reward} : std::pair{m.sucker, m.temptation};
    return b == Move::Cooperate ? std::pair{m.temptation, m.sucker} : std::pair{m.punishment, m.punishment};
}

}  // namespace egt
