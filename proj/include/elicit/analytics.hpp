#pragma once

// Exact expectation engine and brute-force truthfulness oracle: closed-form
// expected CA scores, the affine peer-score identity, accuracy rewards,
// robustness thresholds, and enumeration of deterministic misreport
// strategies.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elicit/model.hpp"

namespace elicit {

constexpr int kEnumerationCap = 6;  // L^L strategies; 6^6 = 46656
constexpr double kTruthfulnessTol = 1e-12;

// A deterministic reporting strategy r: [L] -> [L], one-hot rows.
struct StrategyMatrix {
    std::vector<int> report_for;  // report_for[k] = reported class for truthful k

    explicit StrategyMatrix(std::vector<int> r) : report_for(std::move(r)) {
        const int L = static_cast<int>(report_for.size());
        for (int v : report_for)
            require(v >= 0 && v < L, "StrategyMatrix: report out of range");
    }

    int num_classes() const { return static_cast<int>(report_for.size()); }

    bool is_identity() const {
        for (int k = 0; k < num_classes(); ++k)
            if (report_for[k] != k) return false;
        return true;
    }

    TransitionMatrix to_transition() const {
        const int L = num_classes();
        Mat m(L, std::vector<double>(L, 0.0));
        for (int k = 0; k < L; ++k) m[k][report_for[k]] = 1.0;
        return TransitionMatrix(std::move(m));
    }
};

struct TruthfulnessReport {
    double truthful_value;
    double best_value;
    std::vector<StrategyMatrix> best_strategies;
    bool is_truthful;        // informed truthfulness: ties allowed
    bool strictly_truthful;  // the maximum is unique and truthful

    nlohmann::json to_json() const {
        nlohmann::json strategies = nlohmann::json::array();
        for (const auto& s : best_strategies) {
            nlohmann::json reports = nlohmann::json::array();
            for (int v : s.report_for) reports.push_back(v + 1);
            strategies.push_back(reports);
        }
        return {{"truthful_value", truthful_value},
                {"best_value", best_value},
                {"is_truthful", is_truthful},
                {"strictly_truthful", strictly_truthful},
                {"best_strategies", strategies}};
    }
};

struct RobustnessAssessment {
    double gamma;
    double honest_coeff;     // 1 - alpha - beta
    double adversary_coeff;  // 1 - alpha_hat - beta_hat
    double combined;         // (1-gamma) honest + gamma adversary
    double threshold_gamma;  // worst-case bound from the Bayes-optimal channel
    bool truthful;

    nlohmann::json to_json() const {
        return {{"gamma", gamma},
                {"honest_coeff", honest_coeff},
                {"adversary_coeff", adversary_coeff},
                {"combined", combined},
                {"threshold_gamma", threshold_gamma},
                {"truthful", truthful}};
    }
};

// E[S] = sum_{k,l} Delta(k,l) sum_r P(report r | truthful k) Sgn(r,l). The
// penalty term's marginal product is already embedded in Delta.
inline double expected_ca_score(const JointDistribution& joint,
                                const TransitionMatrix& strategy,
                                const SignMatrix& sign) {
    const int L = joint.num_classes();
    require(strategy.num_classes() == L, "expected_ca_score: strategy dimension mismatch");
    require(sign.num_classes() == L, "expected_ca_score: sign dimension mismatch");
    const DeltaMatrix delta = compute_delta(joint);
    double e = 0.0;
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l) {
            double inner = 0.0;
            for (int r = 0; r < L; ++r) inner += strategy.rows[k][r] * sign.cells[r][l];
            e += delta.cells[k][l] * inner;
        }
    return e;
}

inline double expected_ca_score(const JointDistribution& joint,
                                const StrategyMatrix& strategy,
                                const SignMatrix& sign) {
    const int L = joint.num_classes();
    require(strategy.num_classes() == L, "expected_ca_score: strategy dimension mismatch");
    const DeltaMatrix delta = compute_delta(joint);
    double e = 0.0;
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            e += delta.cells[k][l] * sign.cells[strategy.report_for[k]][l];
    return e;
}

// Truthful payoff: sum of Delta cells whose sign entry is 1.
inline double truthful_value(const JointDistribution& joint, const SignMatrix& sign) {
    const int L = joint.num_classes();
    require(sign.num_classes() == L, "truthful_value: sign dimension mismatch");
    const DeltaMatrix delta = compute_delta(joint);
    double v = 0.0;
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            if (sign.cells[k][l] == 1.0) v += delta.cells[k][l];
    return v;
}

// Enumerates all L^L deterministic reporting strategies. The expected score
// is affine in the strategy rows, so the maximum over stochastic strategies
// is attained at a deterministic one and enumeration is a complete oracle.
inline TruthfulnessReport verify_truthfulness(const JointDistribution& joint,
                                              const SignMatrix& sign) {
    const int L = joint.num_classes();
    require(L <= kEnumerationCap,
            "verify_truthfulness: L exceeds enumeration cap of " +
                std::to_string(kEnumerationCap) + "; use sampling instead");
    require(sign.num_classes() == L, "verify_truthfulness: sign dimension mismatch");

    const DeltaMatrix delta = compute_delta(joint);
    // row_payoff[k][r]: contribution of reporting r on truthful k
    Mat row_payoff(L, std::vector<double>(L, 0.0));
    for (int k = 0; k < L; ++k)
        for (int r = 0; r < L; ++r)
            for (int l = 0; l < L; ++l)
                row_payoff[k][r] += delta.cells[k][l] * sign.cells[r][l];

    double best = -1e300;
    std::vector<StrategyMatrix> best_strategies;
    std::vector<int> reports(L, 0);
    long long count = 1;
    for (int k = 0; k < L; ++k) count *= L;
    for (long long idx = 0; idx < count; ++idx) {
        long long rem = idx;
        double v = 0.0;
        for (int k = 0; k < L; ++k) {
            reports[k] = static_cast<int>(rem % L);
            rem /= L;
            v += row_payoff[k][reports[k]];
        }
        if (v > best + kTruthfulnessTol) {
            best = v;
            best_strategies.clear();
            best_strategies.emplace_back(reports);
        } else if (v >= best - kTruthfulnessTol) {
            best = std::max(best, v);
            best_strategies.emplace_back(reports);
        }
    }

    const double truthful = truthful_value(joint, sign);
    TruthfulnessReport report{truthful, best, std::move(best_strategies),
                              truthful >= best - kTruthfulnessTol, false};
    report.strictly_truthful = report.is_truthful &&
                               report.best_strategies.size() == 1 &&
                               report.best_strategies.front().is_identity();
    return report;
}

// Binary equal-prior accuracy reward: accuracy - 0.5.
inline double expected_accuracy_score(const Prior& prior, const ConfusionChannel& channel) {
    require(prior.num_classes() == 2 && channel.num_classes() == 2,
            "expected_accuracy_score: binary classification only");
    require(std::abs(prior.probs[0] - 0.5) <= kStochasticTol,
            "expected_accuracy_score: requires the equal prior");
    return channel.accuracy(prior) - 0.5;
}

// Peer-score identity: E[S(f, f')] = (1 - a' - b') E[S(f, Y)] for
// conditionally independent binary channels. Returns both sides.
inline std::pair<double, double> affine_peer_identity(const Prior& prior,
                                                      const ConfusionChannel& agent,
                                                      const ConfusionChannel& reference) {
    require(prior.num_classes() == 2 && agent.num_classes() == 2 &&
                reference.num_classes() == 2,
            "affine_peer_identity: binary classification only");
    const SignMatrix id = SignMatrix::identity(2);
    const TransitionMatrix truthful = TransitionMatrix::identity(2);
    double lhs = expected_ca_score(joint_from_channels(prior, agent, reference),
                                   truthful, id);
    double coeff = 1.0 - reference.fnr() - reference.fpr();
    double rhs = coeff * expected_ca_score(joint_with_truth(prior, agent), truthful, id);
    return {lhs, rhs};
}

// Combined informativeness coefficient against a gamma-fraction adversary,
// plus the worst-case threshold implied by the Bayes-optimal channel:
// gamma* = (1-a-b) / ((1-a-b) + (1-a*-b*)).
inline RobustnessAssessment robustness_assess(double gamma, const ConfusionChannel& honest,
                                              const ConfusionChannel& adversary,
                                              const ConfusionChannel& bayes_opt) {
    require(honest.num_classes() == 2 && adversary.num_classes() == 2 &&
                bayes_opt.num_classes() == 2,
            "robustness_assess: binary classification only");
    require(gamma >= 0.0 && gamma <= 1.0, "robustness_assess: gamma outside [0,1]");
    const double honest_coeff = 1.0 - honest.fnr() - honest.fpr();
    require(honest_coeff > 0.0,
            "robustness_assess: honest channel must be Bayesian informative");
    const double adversary_coeff = 1.0 - adversary.fnr() - adversary.fpr();
    const double opt_coeff = 1.0 - bayes_opt.fnr() - bayes_opt.fpr();
    const double combined = (1.0 - gamma) * honest_coeff + gamma * adversary_coeff;
    const double threshold = honest_coeff / (honest_coeff + opt_coeff);
    return {gamma, honest_coeff, adversary_coeff, combined, threshold, combined > 0.0};
}

namespace detail {

// Expected CA score with cross-entropy reward for one-hot reports against a
// one-hot reference: -CE is 0 on a match and log(ce_clip) on a mismatch, so
// the expectation is log(ce_clip) * (P_joint(mismatch) - P_indep(mismatch)).
inline double expected_ce_score_onehot(const JointDistribution& joint, double ce_clip) {
    const int L = joint.num_classes();
    const auto rm = joint.row_marginal();
    const auto cm = joint.col_marginal();
    double match_joint = 0.0, match_indep = 0.0;
    for (int k = 0; k < L; ++k) {
        match_joint += joint.cells[k][k];
        match_indep += rm[k] * cm[k];
    }
    return std::log(ce_clip) * ((1.0 - match_joint) - (1.0 - match_indep));
}

}  // namespace detail

// Expected-score gap (deviant minus truthful) under the 0-1 CA score and the
// cross-entropy CA score, exact from the channels. Both gaps are <= 0 for any
// degradation of a truthful informative agent.
inline std::pair<double, double> calibration_gap(const Prior& prior,
                                                 const ConfusionChannel& agent,
                                                 const ConfusionChannel& deviant,
                                                 double ce_clip = kDefaultCeClip) {
    require(prior.num_classes() == 2 && agent.num_classes() == 2 &&
                deviant.num_classes() == 2,
            "calibration_gap: binary classification only");
    require(std::abs(prior.probs[0] - 0.5) <= kStochasticTol,
            "calibration_gap: requires the equal prior");
    const SignMatrix id = SignMatrix::identity(2);
    const TransitionMatrix truthful = TransitionMatrix::identity(2);
    const JointDistribution truthful_joint = joint_with_truth(prior, agent);
    const JointDistribution deviant_joint = joint_with_truth(prior, deviant);
    double ca_gap = expected_ca_score(deviant_joint, truthful, id) -
                    expected_ca_score(truthful_joint, truthful, id);
    double ce_gap = detail::expected_ce_score_onehot(deviant_joint, ce_clip) -
                    detail::expected_ce_score_onehot(truthful_joint, ce_clip);
    return {ca_gap, ce_gap};
}

// True iff the sign of the conditionally independent joint of the two
// channels is the identity.
inline bool delta_identity_check(const ConfusionChannel& channel_a,
                                 const ConfusionChannel& channel_b, const Prior& prior) {
    require(channel_a.num_classes() == 2 && channel_b.num_classes() == 2 &&
                prior.num_classes() == 2,
            "delta_identity_check: binary classification only");
    return sign_of(compute_delta(joint_from_channels(prior, channel_a, channel_b)))
        .is_identity();
}

}  // namespace elicit
