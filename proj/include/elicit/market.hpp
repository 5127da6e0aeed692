#pragma once

// Sequential market payment schemes: ledgers paying score differences against
// a closer (ground truth or a survey draw), survey pools, and the
// survey-paired deviation bound.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elicit/agents.hpp"
#include "elicit/analytics.hpp"
#include "elicit/model.hpp"
#include "elicit/scoring.hpp"

namespace elicit {

enum class CloserKind { ground_truth, survey };

struct MarketStep {
    std::string agent_label;
    double score_vs_closer;
    double payment;
};

// payment_t = score_t - score_{t-1}; payments telescope to final - initial.
struct MarketLedger {
    std::vector<MarketStep> steps;
    CloserKind closer_kind;
    double scale_lambda;
    double initial_score;

    double total_payment() const {
        double s = 0.0;
        for (const auto& step : steps) s += step.payment;
        return s;
    }

    double final_score() const {
        return steps.empty() ? initial_score : steps.back().score_vs_closer;
    }

    nlohmann::json budget_json() const {
        return {{"initial_score", initial_score},
                {"final_score", final_score()},
                {"total_payment", total_payment()},
                {"n_steps", steps.size()},
                {"closer", closer_kind == CloserKind::ground_truth ? "ground_truth"
                                                                   : "survey"},
                {"scale_lambda", scale_lambda}};
    }
};

// C independently elicited survey hypotheses over one task set.
struct SurveyPool {
    std::vector<PredictionTable> tables;
    double lambda;

    SurveyPool(std::vector<PredictionTable> t, double l)
        : tables(std::move(t)), lambda(l) {
        require(!tables.empty(), "SurveyPool: need at least one survey");
        require(lambda > 0.0, "SurveyPool: lambda must be positive");
        for (const auto& tbl : tables)
            require(tbl.num_tasks() == tables.front().num_tasks(),
                    "SurveyPool: tables must cover the same task set");
    }

    int size() const { return static_cast<int>(tables.size()); }
};

// Scores every entry against the closer with a shared pairing plan and pays
// per-task-mean score differences, seeded by the initial hypothesis.
inline MarketLedger run_market(const std::vector<PredictionTable>& entries,
                               const std::vector<std::string>& labels,
                               const PredictionTable& closer, const SignMatrix& sign,
                               const RewardStructure& reward, const PairingPlan& pairing,
                               const PredictionTable& initial,
                               CloserKind closer_kind = CloserKind::ground_truth,
                               double scale_lambda = 1.0) {
    require(labels.size() == entries.size(), "run_market: one label per entry");
    require(initial.num_tasks() == closer.num_tasks(),
            "run_market: initial table task count mismatch");
    MarketLedger ledger{{}, closer_kind, scale_lambda,
                        score_table(initial, closer, sign, reward, pairing).mean};
    double prev = ledger.initial_score;
    for (std::size_t t = 0; t < entries.size(); ++t) {
        require(entries[t].num_tasks() == closer.num_tasks(),
                "run_market: entry " + std::to_string(t + 1) + " task count mismatch");
        double score = score_table(entries[t], closer, sign, reward, pairing).mean;
        ledger.steps.push_back({labels[t], score, scale_lambda * (score - prev)});
        prev = score;
    }
    return ledger;
}

// Uniform draw among the pool's tables.
inline const PredictionTable& survey_close(const SurveyPool& pool, std::uint64_t seed) {
    Rng rng(seed);
    return pool.tables[rng.uniform_int(pool.size())];
}

// delta = lambda / ((1 - a' - b') (C + lambda (C - 1))): deviations at least
// this much less accurate than truthful reporting are unprofitable.
inline double deviation_bound(double lambda, int C, double alpha_p, double beta_p) {
    require(lambda > 0.0, "deviation_bound: lambda must be positive");
    require(C >= 1, "deviation_bound: need at least one survey");
    const double coeff = 1.0 - alpha_p - beta_p;
    require(coeff > 0.0, "deviation_bound: survey must be Bayesian informative");
    return lambda / (coeff * (C + lambda * (C - 1)));
}

struct SurveyPoolParams {
    int C;
    double lambda;
    double alpha_p;
    double beta_p;
};

struct ParticipationBounds {
    double deviation_loss_bound;  // (1 + lambda (C-1)/C) (1 - a' - b') delta
    double deviation_gain_bound;  // lambda / C
};

// Bounds from the joint survey+market participation analysis. Treats the
// remove-one survey aggregate as having the survey's error rates, which the
// bound's derivation adopts as a simplification; the evaluator does the same.
inline ParticipationBounds joint_participation_payoff(const Prior& prior,
                                                      const ConfusionChannel& survey_agent,
                                                      const ConfusionChannel& market_prev,
                                                      const SurveyPoolParams& pool,
                                                      double deviation_delta) {
    require(prior.num_classes() == 2 && survey_agent.num_classes() == 2 &&
                market_prev.num_classes() == 2,
            "joint_participation_payoff: binary classification only");
    require(std::abs(prior.probs[0] - 0.5) <= kStochasticTol,
            "joint_participation_payoff: requires the equal prior");
    require(pool.C >= 1 && pool.lambda > 0.0,
            "joint_participation_payoff: invalid pool parameters");
    const double coeff = 1.0 - pool.alpha_p - pool.beta_p;
    require(coeff > 0.0,
            "joint_participation_payoff: survey must be Bayesian informative");
    require(deviation_delta >= 0.0,
            "joint_participation_payoff: delta must be nonnegative");
    const double loss = (1.0 + pool.lambda * (pool.C - 1) / pool.C) * coeff *
                        deviation_delta;
    const double gain = pool.lambda / pool.C;
    return {loss, gain};
}

}  // namespace elicit
