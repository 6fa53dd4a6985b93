#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "egt/games.hpp"
#include "egt/rng.hpp"

using namespace egt;

namespace {

PggParams params(int k, double b, double c, double lambda, double rho) {
    PggParams p;
    p.group_size = k;
    p.benefit_factor = b;
    p.contribution = c;
    p.punish_cost = lambda;
    p.punish_penalty = rho;
    return p;
}

struct PunishEvent {
    int observer;
    int target;
    Punishment type;
};

// Independent accounting of one group: every contribution goes into a pot,
// the multiplied pot is split evenly, then each punishment event is checked
// against the target's action by a direct truth table.
std::vector<double> oracle_group(const std::vector<bool>& contributes, const std::vector<PunishEvent>& events,
                                 double b, double c, double lambda, double rho) {
    const int k = static_cast<int>(contributes.size());
    double pot = 0.0;
    for (bool x : contributes)
        if (x) pot += c;
    std::vector<double> pay(k);
    for (int i = 0; i < k; ++i) pay[i] = b * pot / k - (contributes[i] ? c : 0.0);
    for (const auto& e : events) {
        bool fires = false;
        if (e.type == Punishment::Spiteful) fires = true;
        if (e.type == Punishment::Responsible && !contributes[e.target]) fires = true;
        if (e.type == Punishment::Antisocial && contributes[e.target]) fires = true;
        if (fires) {
            pay[e.observer] -= lambda;
            pay[e.target] -= rho;
        }
    }
    return pay;
}

std::vector<double> library_group(const std::vector<bool>& contributes, const std::vector<PunishEvent>& events,
                                  const PggParams& p) {
    const int k = static_cast<int>(contributes.size());
    int m = 0;
    for (bool x : contributes) m += x;
    const auto pay = pgg_payoffs(m, p);
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = contributes[i] ? pay.cooperator : pay.defector;
    for (const auto& e : events) {
        const auto d = apply_punishment(contributes[e.target] ? Action::Contribute : Action::Withhold, e.type, p);
        out[e.observer] += d.punisher;
        out[e.target] += d.target;
    }
    return out;
}

}  // namespace

// --- pgg_payoffs -----------------------------------------------------------

TEST(Pgg, NobodyContributes) { EXPECT_EQ(pgg_payoffs(0, params(4, 3, 1, 1, 3)).defector, 0.0); }

TEST(Pgg, FullContribution) { EXPECT_DOUBLE_EQ(pgg_payoffs(4, params(4, 3, 1, 1, 3)).cooperator, 2.0); }

TEST(Pgg, HalfContribution) {
    const auto p = pgg_payoffs(2, params(4, 3, 1, 1, 3));
    EXPECT_DOUBLE_EQ(p.cooperator, 0.5);
    EXPECT_DOUBLE_EQ(p.defector, 1.5);
}

TEST(Pgg, CountOutOfRange) {
    EXPECT_THROW(pgg_payoffs(-1, params(4, 3, 1, 1, 3)), std::out_of_range);
    EXPECT_THROW(pgg_payoffs(5, params(4, 3, 1, 1, 3)), std::out_of_range);
}

TEST(Pgg, ParamValidation) {
    EXPECT_NO_THROW(validate(params(5, 3, 1, 1, 3)));
    EXPECT_THROW(validate(params(5, 1.0, 1, 1, 3)), std::invalid_argument);
    EXPECT_THROW(validate(params(5, 3, 1, 2, 1)), std::invalid_argument);
    EXPECT_THROW(validate(params(5, 3, 1, 0, 1)), std::invalid_argument);
    EXPECT_THROW(validate(params(5, 3, 0, 1, 3)), std::invalid_argument);
    auto p = params(5, 3, 1, 1, 3);
    p.reputation_prob = 1.2;
    EXPECT_THROW(validate(p), std::invalid_argument);
}

TEST(PggProperty, DominanceGapIsExactlyC) {
    Rng rng(1);
    for (int i = 0; i < 5000; ++i) {
        const int k = 2 + static_cast<int>(rng.below(20));
        const auto p = params(k, 1.0 + 1e-3 + rng.uniform() * 10, 0.01 + rng.uniform() * 5, 1, 3);
        const auto pay = pgg_payoffs(static_cast<int>(rng.below(k + 1)), p);
        ASSERT_NEAR(pay.defector - pay.cooperator, p.contribution, 1e-12 * std::max(1.0, pay.defector));
    }
}

TEST(PggProperty, AllCooperateSurplus) {
    Rng rng(2);
    for (int i = 0; i < 5000; ++i) {
        const int k = 2 + static_cast<int>(rng.below(20));
        const auto p = params(k, 1.0 + 1e-3 + rng.uniform() * 10, 0.01 + rng.uniform() * 5, 1, 3);
        const double coop = pgg_payoffs(k, p).cooperator;
        ASSERT_NEAR(coop, p.contribution * (p.benefit_factor - 1), 1e-12 * std::max(1.0, coop));
        ASSERT_GT(coop, 0.0);
    }
}

TEST(PggProperty, GroupTotalChangesByContributorSurplus) {
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        const int k = 2 + static_cast<int>(rng.below(20));
        const auto p = params(k, 1.0 + 1e-3 + rng.uniform() * 10, 0.01 + rng.uniform() * 5, 1, 3);
        const int m = static_cast<int>(rng.below(k + 1));
        const auto pay = pgg_payoffs(m, p);
        const double total = m * pay.cooperator + (k - m) * pay.defector;
        ASSERT_NEAR(total, m * p.contribution * (p.benefit_factor - 1), 1e-9 * std::max(1.0, std::abs(total)));
    }
}

// --- opportunistic_choice / resolve_contribution --------------------------

TEST(Opportunist, NonPunisherMeansWithhold) {
    EXPECT_EQ(opportunistic_choice(Punishment::NonPunisher, params(5, 3, 1, 1, 3)), Action::Withhold);
}

TEST(Opportunist, ResponsibleMeansContribute) {
    EXPECT_EQ(opportunistic_choice(Punishment::Responsible, params(5, 3, 1, 1, 3)), Action::Contribute);
}

TEST(Opportunist, AntisocialMeansWithhold) {
    EXPECT_EQ(opportunistic_choice(Punishment::Antisocial, params(5, 3, 1, 1, 3)), Action::Withhold);
}

TEST(Opportunist, SpitefulMeansWithhold) {
    EXPECT_EQ(opportunistic_choice(Punishment::Spiteful, params(5, 3, 1, 1, 3)), Action::Withhold);
}

TEST(Opportunist, TieGoesToWithhold) {
    // Half the neighbors responsible, rho = 2c: contribute -1, withhold -1.
    const std::array reps{Punishment::Responsible, Punishment::NonPunisher};
    EXPECT_EQ(opportunistic_choice(reps, params(5, 3, 1, 1, 2)), Action::Withhold);
}

TEST(Opportunist, FrequencyWeighting) {
    const auto p = params(5, 3, 1, 1, 3);
    const std::array mostly_resp{Punishment::Responsible, Punishment::Responsible, Punishment::NonPunisher};
    EXPECT_EQ(opportunistic_choice(mostly_resp, p), Action::Contribute);  // -1 vs -2
    const std::array few_resp{Punishment::Responsible, Punishment::NonPunisher, Punishment::NonPunisher,
                              Punishment::NonPunisher};
    EXPECT_EQ(opportunistic_choice(few_resp, p), Action::Withhold);  // -1 vs -0.75
}

TEST(Opportunist, EmptySetRejected) {
    EXPECT_THROW(opportunistic_choice(std::span<const Punishment>{}, params(5, 3, 1, 1, 3)), std::invalid_argument);
}

TEST(Resolve, UnconditionalStrategies) {
    const auto p = params(5, 3, 1, 1, 3);
    for (auto r : kAllPunishments) {
        EXPECT_EQ(resolve_contribution(Cooperation::Cooperate, std::optional{r}, p), Action::Contribute);
        EXPECT_EQ(resolve_contribution(Cooperation::Defect, std::optional{r}, p), Action::Withhold);
    }
    EXPECT_EQ(resolve_contribution(Cooperation::Cooperate, std::nullopt, p), Action::Contribute);
    EXPECT_EQ(resolve_contribution(Cooperation::Defect, std::nullopt, p), Action::Withhold);
}

TEST(Resolve, UninformedOpportunists) {
    const auto p = params(5, 3, 1, 1, 3);
    EXPECT_EQ(resolve_contribution(Cooperation::OpportunisticDefect, std::nullopt, p), Action::Withhold);
    EXPECT_EQ(resolve_contribution(Cooperation::OpportunisticCooperate, std::nullopt, p), Action::Contribute);
    EXPECT_THROW(resolve_contribution(Cooperation::Opportunist, std::nullopt, p), ModelError);
}

TEST(Resolve, InformedOpportunists) {
    const auto p = params(5, 3, 1, 1, 3);
    EXPECT_EQ(resolve_contribution(Cooperation::OpportunisticCooperate, std::optional{Punishment::Responsible}, p),
              Action::Contribute);
    EXPECT_EQ(resolve_contribution(Cooperation::OpportunisticDefect, std::optional{Punishment::Responsible}, p),
              Action::Contribute);
    EXPECT_EQ(resolve_contribution(Cooperation::OpportunisticCooperate, std::optional{Punishment::NonPunisher}, p),
              Action::Withhold);
    EXPECT_EQ(resolve_contribution(Cooperation::Opportunist, std::optional{Punishment::Responsible}, p),
              Action::Contribute);
}

// --- apply_punishment --------------------------------------------------------

TEST(Punish, ResponsiblePunishesWithholding) {
    const auto d = apply_punishment(Action::Withhold, Punishment::Responsible, params(5, 3, 1, 1, 3));
    EXPECT_EQ(d.punisher, -1.0);
    EXPECT_EQ(d.target, -3.0);
}

TEST(Punish, NonPunisherNeverFires) {
    const auto d = apply_punishment(Action::Contribute, Punishment::NonPunisher, params(5, 3, 1, 1, 3));
    EXPECT_EQ(d.punisher, 0.0);
    EXPECT_EQ(d.target, 0.0);
}

TEST(Punish, SpitefulPunishesContributors) {
    const auto d = apply_punishment(Action::Contribute, Punishment::Spiteful, params(5, 3, 1, 0.5, 1.5));
    EXPECT_EQ(d.punisher, -0.5);
    EXPECT_EQ(d.target, -1.5);
}

TEST(Punish, TruthTable) {
    EXPECT_TRUE(punishes(Punishment::Responsible, Action::Withhold));
    EXPECT_FALSE(punishes(Punishment::Responsible, Action::Contribute));
    EXPECT_TRUE(punishes(Punishment::Antisocial, Action::Contribute));
    EXPECT_FALSE(punishes(Punishment::Antisocial, Action::Withhold));
    EXPECT_TRUE(punishes(Punishment::Spiteful, Action::Contribute));
    EXPECT_TRUE(punishes(Punishment::Spiteful, Action::Withhold));
    EXPECT_FALSE(punishes(Punishment::NonPunisher, Action::Withhold));
}

TEST(PunishProperty, DeltasNonPositiveAndFromFixedSet) {
    Rng rng(4);
    for (int i = 0; i < 5000; ++i) {
        const double lambda = 0.01 + rng.uniform() * 5;
        const double rho = lambda + 0.01 + rng.uniform() * 5;
        const auto p = params(5, 3, 1, lambda, rho);
        const auto a = rng.bernoulli(0.5) ? Action::Contribute : Action::Withhold;
        const auto d = apply_punishment(a, kAllPunishments[rng.below(4)], p);
        ASSERT_LE(d.punisher, 0.0);
        ASSERT_LE(d.target, 0.0);
        ASSERT_TRUE(d.punisher == 0.0 || d.punisher == -lambda);
        ASSERT_TRUE(d.target == 0.0 || d.target == -rho);
        ASSERT_EQ(d.punisher == 0.0, d.target == 0.0);
        if (d.punisher != 0.0) {
            ASSERT_NEAR(d.punisher + d.target, -(lambda + rho), 1e-12);
        }
    }
}

// --- brute-force composition ---------------------------------------------

TEST(PggProperty, ComposedPhasesMatchExhaustiveOracle) {
    const std::array<double, 4> bs{1.5, 2.0, 3.0, 4.25};
    const std::array<double, 3> cs{0.5, 1.0, 2.0};
    const std::array<std::pair<double, double>, 3> punish{{{0.5, 1.5}, {1.0, 3.0}, {0.25, 2.0}}};
    long cases = 0;
    for (int k = 2; k <= 5; ++k) {
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            std::vector<bool> contributes(k);
            for (int i = 0; i < k; ++i) contributes[i] = (mask >> i) & 1u;
            for (int np = 0; np <= 3; ++np) {
                int combos = 1;
                for (int i = 0; i < np; ++i) combos *= 4;
                for (int t = 0; t < combos; ++t) {
                    std::vector<PunishEvent> events;
                    int code = t;
                    for (int e = 0; e < np; ++e) {
                        const int obs = e % k;
                        events.push_back({obs, (obs + 1 + e) % k == obs ? (obs + 1) % k : (obs + 1 + e) % k,
                                          kAllPunishments[code % 4]});
                        code /= 4;
                    }
                    const double b = bs[(mask + t) % bs.size()];
                    const double c = cs[(mask + np) % cs.size()];
                    const auto [lambda, rho] = punish[(t + k) % punish.size()];
                    const auto lib = library_group(contributes, events, params(k, b, c, lambda, rho));
                    const auto ora = oracle_group(contributes, events, b, c, lambda, rho);
                    for (int i = 0; i < k; ++i) ASSERT_EQ(lib[i], ora[i]) << "k=" << k << " mask=" << mask;
                    ++cases;
                }
            }
        }
    }
    EXPECT_GE(cases, 1000);
}

// --- pairwise_dilemma_round ------------------------------------------------

TEST(Pairwise, BothCooperateNoPunishers) {
    PairwiseRound r{{0, 1}, {Action::Contribute, Action::Contribute}, {2, 3},
                    {Punishment::NonPunisher, Punishment::NonPunisher}};
    const auto out = pairwise_dilemma_round(r, params(5, 3, 1, 1, 3));
    EXPECT_DOUBLE_EQ(out.player_delta[0], 2.0);
    EXPECT_DOUBLE_EQ(out.player_delta[1], 2.0);
    EXPECT_EQ(out.observer_delta[0], 0.0);
    EXPECT_EQ(out.observer_delta[1], 0.0);
}

TEST(Pairwise, BothDefectResponsibleObservers) {
    PairwiseRound r{{0, 1}, {Action::Withhold, Action::Withhold}, {2, 3},
                    {Punishment::Responsible, Punishment::Responsible}};
    const auto out = pairwise_dilemma_round(r, params(5, 3, 1, 1, 3));
    EXPECT_DOUBLE_EQ(out.player_delta[0], -3.0);
    EXPECT_DOUBLE_EQ(out.player_delta[1], -3.0);
    EXPECT_DOUBLE_EQ(out.observer_delta[0], -1.0);
    EXPECT_DOUBLE_EQ(out.observer_delta[1], -1.0);
}

TEST(Pairwise, CooperatorVersusDefector) {
    PairwiseRound r{{0, 1}, {Action::Contribute, Action::Withhold}, {2, 3},
                    {Punishment::NonPunisher, Punishment::NonPunisher}};
    const auto out = pairwise_dilemma_round(r, params(5, 3, 1, 1, 3));
    EXPECT_DOUBLE_EQ(out.player_delta[0], 0.5);
    EXPECT_DOUBLE_EQ(out.player_delta[1], 1.5);
}

TEST(Pairwise, ObserverMustBeUninvolved) {
    PairwiseRound r{{0, 1}, {Action::Contribute, Action::Withhold}, {1, 3},
                    {Punishment::NonPunisher, Punishment::NonPunisher}};
    EXPECT_THROW(pairwise_dilemma_round(r, params(5, 3, 1, 1, 3)), ModelError);
    PairwiseRound self{{0, 0}, {Action::Contribute, Action::Withhold}, {2, 3},
                       {Punishment::NonPunisher, Punishment::NonPunisher}};
    EXPECT_THROW(pairwise_dilemma_round(self, params(5, 3, 1, 1, 3)), ModelError);
}

TEST(Pairwise, MissingObserverMeansNoPunishment) {
    PairwiseRound r{{0, 1}, {Action::Withhold, Action::Withhold}, {std::nullopt, 3},
                    {Punishment::Responsible, Punishment::Responsible}};
    const auto out = pairwise_dilemma_round(r, params(5, 3, 1, 1, 3));
    EXPECT_DOUBLE_EQ(out.player_delta[0], 0.0);
    EXPECT_DOUBLE_EQ(out.player_delta[1], -3.0);
}

TEST(PairwiseProperty, PunishmentConservation) {
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const double lambda = 0.1 + rng.uniform(), rho = lambda + 0.1 + rng.uniform() * 3;
        const auto p = params(5, 1.1 + rng.uniform() * 3, 0.1 + rng.uniform(), lambda, rho);
        PairwiseRound r{{0, 1},
                        {rng.bernoulli(0.5) ? Action::Contribute : Action::Withhold,
                         rng.bernoulli(0.5) ? Action::Contribute : Action::Withhold},
                        {2, 3},
                        {kAllPunishments[rng.below(4)], kAllPunishments[rng.below(4)]}};
        const auto out = pairwise_dilemma_round(r, p);
        const int m = (r.actions[0] == Action::Contribute) + (r.actions[1] == Action::Contribute);
        int fired = 0;
        for (int j = 0; j < 2; ++j) fired += punishes(r.observer_strategies[j], r.actions[j]);
        const double total = out.player_delta[0] + out.player_delta[1] + out.observer_delta[0] + out.observer_delta[1];
        ASSERT_NEAR(total, m * p.contribution * (p.benefit_factor - 1) - fired * (lambda + rho), 1e-9);
    }
}

// --- universes -----------------------------------------------------------

TEST(Universe, Sizes) {
    EXPECT_EQ(reputation_universe().size(), 16u);
    EXPECT_EQ(networked_universe().size(), 12u);
    EXPECT_EQ(entitative_universe().size(), 20u);
}

TEST(Universe, LabelsAreDistinct) {
    std::set<std::string> seen;
    for (const auto& s : reputation_universe()) EXPECT_TRUE(seen.insert(label(s)).second);
    seen.clear();
    for (const auto& p : entitative_universe()) EXPECT_TRUE(seen.insert(label(p)).second);
    EXPECT_EQ(label(NormStrategy{Cooperation::OpportunisticCooperate, Punishment::Responsible}), "OC-R");
    EXPECT_EQ(label(EntitativeProgram::group(Rule::TFT, Rule::AllD)), "G:TFT/AllD");
    EXPECT_EQ(label(EntitativeProgram::individual(Rule::OTFT)), "I:OTFT");
}

TEST(Universe, EntitativeProgramsCarryTheRightRuleCount) {
    int group = 0, individual = 0;
    for (const auto& p : entitative_universe()) {
        if (p.entitativity == Entitativity::Group) ++group;
        else ++individual;
    }
    EXPECT_EQ(group, 16);
    EXPECT_EQ(individual, 4);
}

// --- fitness -----------------------------------------------------------------

TEST(Fitness, Examples) {
    ThreatParams t;
    EXPECT_EQ(fitness(0, t), 0.0);
    EXPECT_NEAR(fitness(30, t), 0.950212931632136, 1e-15);
    EXPECT_EQ(fitness(1000, t), 1.0);
    EXPECT_LT(fitness(1000, t), 1.0 + 1e-15);
    EXPECT_LT(fitness(-10, t), 0.0);
}

TEST(Fitness, Validation) {
    EXPECT_THROW(validate(ThreatParams{30, -1, 0.1}), std::invalid_argument);
    EXPECT_THROW(validate(ThreatParams{30, 0, 0}), std::invalid_argument);
    EXPECT_NO_THROW(validate(ThreatParams{30, 25, 0.1}));
}

TEST(FitnessProperty, StrictlyIncreasingAndConcave) {
    Rng rng(6);
    ThreatParams t;
    for (int i = 0; i < 5000; ++i) {
        double a = rng.uniform() * 100 - 20, b = rng.uniform() * 100 - 20;
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        ASSERT_LT(fitness(a, t), fitness(b, t));
        ASSERT_GE(fitness((a + b) / 2, t), (fitness(a, t) + fitness(b, t)) / 2 - 1e-15);
    }
}

// --- entitative PD -----------------------------------------------------------

TEST(Entitative, Examples) {
    EXPECT_EQ(entitative_action(EntitativeProgram::individual(Rule::AllC), 0, 1, Move::Defect), Move::Cooperate);
    EXPECT_EQ(entitative_action(EntitativeProgram::group(Rule::AllC, Rule::TFT), 0, 1, Move::Defect), Move::Defect);
    EXPECT_EQ(entitative_action(EntitativeProgram::group(Rule::AllC, Rule::TFT), 1, 1, Move::Defect), Move::Cooperate);
    EXPECT_EQ(entitative_action(EntitativeProgram::individual(Rule::OTFT), 0, 0, Move::Cooperate), Move::Defect);
    EXPECT_EQ(entitative_action(EntitativeProgram::individual(Rule::AllD), 0, 0, Move::Cooperate), Move::Defect);
}

TEST(Entitative, UnseenCountsAsCooperate) {
    EXPECT_EQ(entitative_action(EntitativeProgram::individual(Rule::TFT), 0, 0, std::nullopt), Move::Cooperate);
    EXPECT_EQ(entitative_action(EntitativeProgram::individual(Rule::OTFT), 0, 0, std::nullopt), Move::Defect);
}

TEST(EntitativeProperty, IndividualIgnoresOpponentTag) {
    Rng rng(7);
    for (int i = 0; i < 5000; ++i) {
        const auto prog = EntitativeProgram::individual(kAllRules[rng.below(4)]);
        const int self = static_cast<int>(rng.below(8));
        std::optional<Move> mem;
        if (rng.bernoulli(0.7)) mem = rng.bernoulli(0.5) ? Move::Cooperate : Move::Defect;
        const auto ref = entitative_action(prog, self, static_cast<int>(rng.below(8)), mem);
        ASSERT_EQ(entitative_action(prog, self, static_cast<int>(rng.below(8)), mem), ref);
    }
}

TEST(Pd, Lookups) {
    PdMatrix m;
    EXPECT_EQ(pd_payoffs(Move::Cooperate, Move::Cooperate, m), (std::pair{3.0, 3.0}));
    EXPECT_EQ(pd_payoffs(Move::Defect, Move::Cooperate, m), (std::pair{5.0, 0.0}));
    EXPECT_EQ(pd_payoffs(Move::Cooperate, Move::Defect, m), (std::pair{0.0, 5.0}));
    EXPECT_EQ(pd_payoffs(Move::Defect, Move::Defect, m), (std::pair{1.0, 1.0}));
}

TEST(Pd, Validation) {
    EXPECT_NO_THROW(validate(PdMatrix{}));
    EXPECT_THROW(validate(PdMatrix{3, 5, 1, 0}), std::invalid_argument);
}

TEST(PdProperty, SymmetricUnderSwap) {
    Rng rng(8);
    for (int i = 0; i < 2000; ++i) {
        PdMatrix m{0, 0, 0, 0};
        m.sucker = rng.uniform();
        m.punishment = m.sucker + rng.uniform();
        m.reward = m.punishment + rng.uniform();
        m.temptation = m.reward + rng.uniform();
        const Move a = rng.bernoulli(0.5) ? Move::Cooperate : Move::Defect;
        const Move b = rng.bernoulli(0.5) ? Move::Cooperate : Move::Defect;
        const auto ab = pd_payoffs(a, b, m), ba = pd_payoffs(b, a, m);
        ASSERT_EQ(ab.first, ba.second);
        ASSERT_EQ(ab.second, ba.first);
    }
}
