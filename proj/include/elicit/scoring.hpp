#pragma once

// The correlated-agreement scoring mechanism: random task pairing, 0-1
// sign-based scores, and the cross-entropy variant, applied to prediction
// tables against a reference (ground truth or a peer).

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elicit/agents.hpp"
#include "elicit/model.hpp"
#include "elicit/random.hpp"

namespace elicit {

// Per task n, a penalty pair (p1, p2) with p1 != p2, both different from n.
struct PairingPlan {
    std::vector<std::pair<int, int>> pairs;
    std::uint64_t seed;

    PairingPlan(std::vector<std::pair<int, int>> p, std::uint64_t s)
        : pairs(std::move(p)), seed(s) {
        const int N = static_cast<int>(pairs.size());
        require(N >= 3, "PairingPlan: need at least 3 tasks");
        for (int n = 0; n < N; ++n) {
            auto [p1, p2] = pairs[n];
            require(p1 != p2 && p1 != n && p2 != n && p1 >= 0 && p1 < N && p2 >= 0 && p2 < N,
                    "PairingPlan: invalid pair at task " + std::to_string(n + 1));
        }
    }

    int num_tasks() const { return static_cast<int>(pairs.size()); }
};

struct ScoreReport {
    std::vector<double> per_task;
    double total;
    double mean;

    explicit ScoreReport(std::vector<double> scores) : per_task(std::move(scores)) {
        total = std::accumulate(per_task.begin(), per_task.end(), 0.0);
        mean = total / static_cast<double>(per_task.size());
    }

    nlohmann::json summary_json() const {
        return {{"mean", mean}, {"total", total}, {"n_tasks", per_task.size()}};
    }
};

enum class RewardKind { zero_one, cross_entropy };

struct RewardStructure {
    RewardKind kind;
    double ce_clip;

    explicit RewardStructure(RewardKind k, double clip = kDefaultCeClip)
        : kind(k), ce_clip(clip) {
        require(clip > 0.0 && clip < 0.5, "RewardStructure: ce_clip outside (0, 0.5)");
    }
};

// Independent per-task draws, uniform over valid (p1, p2) without replacement.
inline PairingPlan make_pairing(int N, std::uint64_t seed) {
    require(N >= 3, "make_pairing: need at least 3 tasks");
    Rng rng(seed);
    std::vector<std::pair<int, int>> pairs(N);
    for (int n = 0; n < N; ++n) {
        int p1 = rng.uniform_int(N - 1);
        if (p1 >= n) ++p1;
        int p2 = rng.uniform_int(N - 2);
        // skip n and p1 in ascending order
        if (p2 >= std::min(n, p1)) ++p2;
        if (p2 >= std::max(n, p1)) ++p2;
        pairs[n] = {p1, p2};
    }
    return PairingPlan(std::move(pairs), seed);
}

// Sgn(report, reference) - Sgn(penalty_report, penalty_reference); labels 0-based.
inline double ca_task_score(int report, int reference, int penalty_report,
                            int penalty_reference, const SignMatrix& sign) {
    const int L = sign.num_classes();
    for (int lab : {report, reference, penalty_report, penalty_reference})
        require(lab >= 0 && lab < L, "ca_task_score: label out of range");
    return sign.cells[report][reference] - sign.cells[penalty_report][penalty_reference];
}

namespace detail {

// Cross-entropy against a one-hot reference with a probability floor.
inline double ce_against_onehot(const std::vector<double>& q, int ref_class,
                                double ce_clip) {
    return -std::log(std::max(q[ref_class], ce_clip));
}

inline int onehot_class(const std::vector<double>& v, const std::string& who) {
    int c = -1;
    for (std::size_t l = 0; l < v.size(); ++l) {
        if (v[l] == 1.0) {
            require(c < 0, who + ": reference row is not one-hot");
            c = static_cast<int>(l);
        } else {
            require(v[l] == 0.0, who + ": reference row is not one-hot");
        }
    }
    require(c >= 0, who + ": reference row is not one-hot");
    return c;
}

}  // namespace detail

// -CE(report, reference) + CE(penalty_report, penalty_reference). References
// must be one-hot.
inline double ce_task_score(const std::vector<double>& report,
                            const std::vector<double>& reference,
                            const std::vector<double>& penalty_report,
                            const std::vector<double>& penalty_reference,
                            double ce_clip = kDefaultCeClip) {
    auto check_normalized = [](const std::vector<double>& v) {
        double s = std::accumulate(v.begin(), v.end(), 0.0);
        require(std::abs(s - 1.0) <= 1e-9, "ce_task_score: vector not normalized");
    };
    check_normalized(report);
    check_normalized(penalty_report);
    int ref = detail::onehot_class(reference, "ce_task_score");
    int pref = detail::onehot_class(penalty_reference, "ce_task_score");
    return -detail::ce_against_onehot(report, ref, ce_clip) +
           detail::ce_against_onehot(penalty_report, pref, ce_clip);
}

// Scores a full table against a reference under a shared pairing plan.
// Reference rows are one-hot encoded first; reported rows stay soft for the
// cross-entropy reward.
inline ScoreReport score_table(const PredictionTable& reports,
                               const PredictionTable& reference,
                               const SignMatrix& sign, const RewardStructure& reward,
                               const PairingPlan& pairing) {
    const int N = reports.num_tasks();
    require(reference.num_tasks() == N, "score_table: reference task count mismatch");
    require(pairing.num_tasks() == N, "score_table: pairing task count mismatch");
    require(reports.num_classes() == reference.num_classes() &&
                reports.num_classes() == sign.num_classes(),
            "score_table: class count mismatch");

    std::vector<int> ref_labels = reference.hard_labels();
    std::vector<double> scores(N);
    if (reward.kind == RewardKind::zero_one) {
        std::vector<int> rep_labels = reports.hard_labels();
        for (int n = 0; n < N; ++n) {
            auto [p1, p2] = pairing.pairs[n];
            scores[n] = ca_task_score(rep_labels[n], ref_labels[n], rep_labels[p1],
                                      ref_labels[p2], sign);
        }
    } else {
        for (int n = 0; n < N; ++n) {
            auto [p1, p2] = pairing.pairs[n];
            scores[n] = -detail::ce_against_onehot(reports.rows[n], ref_labels[n],
                                                   reward.ce_clip) +
                        detail::ce_against_onehot(reports.rows[p1], ref_labels[p2],
                                                  reward.ce_clip);
        }
    }
    return ScoreReport(std::move(scores));
}

}  // namespace elicit
