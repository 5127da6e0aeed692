#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "elicit/analytics.hpp"
#include "elicit/agents.hpp"
#include "elicit/scoring.hpp"

using namespace elicit;

namespace {

const Prior kHalf({0.5, 0.5});

ConfusionChannel random_channel(Rng& rng, int L) {
    Mat m(L, std::vector<double>(L));
    for (int j = 0; j < L; ++j) {
        double s = 0.0;
        for (int k = 0; k < L; ++k) {
            m[j][k] = rng.uniform() + 1e-3;
            s += m[j][k];
        }
        for (int k = 0; k < L; ++k) m[j][k] /= s;
    }
    return ConfusionChannel(std::move(m));
}

JointDistribution binary_truth_joint(double fnr, double fpr) {
    return joint_with_truth(kHalf, ConfusionChannel::binary(fnr, fpr));
}

}  // namespace

TEST_CASE("expected_ca_score") {
    auto joint = binary_truth_joint(0.2, 0.1);
    auto sign = SignMatrix::identity(2);

    SECTION("identity strategy recovers the positive delta mass") {
        CHECK(expected_ca_score(joint, TransitionMatrix::identity(2), sign) ==
              Catch::Approx(0.35));
    }
    SECTION("constant reporting earns zero") {
        TransitionMatrix const1({{1.0, 0.0}, {1.0, 0.0}});
        CHECK(expected_ca_score(joint, const1, sign) == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("zero delta kills every strategy") {
        JointDistribution indep({{0.25, 0.25}, {0.25, 0.25}});
        Rng rng(1);
        for (int rep = 0; rep < 20; ++rep) {
            auto t = uniform_transition(2, rng.uniform() * 0.5);
            CHECK(expected_ca_score(indep, t, sign) == Catch::Approx(0.0).margin(1e-15));
        }
    }
    SECTION("deterministic overload agrees with the transition overload") {
        StrategyMatrix swap({1, 0});
        CHECK(expected_ca_score(joint, swap, sign) ==
              Catch::Approx(expected_ca_score(joint, swap.to_transition(), sign)));
    }
}

TEST_CASE("truthful_value") {
    auto sign = SignMatrix::identity(2);
    CHECK(truthful_value(binary_truth_joint(0.2, 0.1), sign) == Catch::Approx(0.35));
    CHECK(truthful_value(JointDistribution({{0.25, 0.25}, {0.25, 0.25}}), sign) ==
          Catch::Approx(0.0).margin(1e-15));
    CHECK(truthful_value(JointDistribution({{0.5, 0.0}, {0.0, 0.5}}), sign) ==
          Catch::Approx(0.5));
    // equals the identity-strategy expectation
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        auto joint = joint_from_channels(kHalf, random_channel(rng, 2),
                                         random_channel(rng, 2));
        auto s = sign_of(compute_delta(joint));
        CHECK(truthful_value(joint, s) ==
              Catch::Approx(expected_ca_score(joint, TransitionMatrix::identity(2), s))
                  .margin(1e-15));
    }
}

TEST_CASE("verify_truthfulness") {
    SECTION("informative binary channels are truthful") {
        auto joint = binary_truth_joint(0.2, 0.1);
        auto report = verify_truthfulness(joint, sign_of(compute_delta(joint)));
        CHECK(report.is_truthful);
        CHECK(report.best_value == Catch::Approx(0.35));
        CHECK(report.strictly_truthful);
    }
    SECTION("zero delta ties everything at zero") {
        JointDistribution indep({{0.25, 0.25}, {0.25, 0.25}});
        auto report = verify_truthfulness(indep, sign_of(compute_delta(indep)));
        CHECK(report.is_truthful);
        CHECK(report.best_value == Catch::Approx(0.0).margin(1e-15));
        CHECK_FALSE(report.strictly_truthful);
    }
    SECTION("random joints are always informed-truthful") {
        Rng rng(6);
        for (int L : {2, 3, 4}) {
            for (int rep = 0; rep < 500; ++rep) {
                auto prior = Prior::uniform(L);
                auto joint = joint_from_channels(prior, random_channel(rng, L),
                                                 random_channel(rng, L));
                auto report = verify_truthfulness(joint, sign_of(compute_delta(joint)));
                REQUIRE(report.best_value - report.truthful_value <= 1e-12);
            }
        }
    }
    SECTION("enumeration cap") {
        auto prior = Prior::uniform(7);
        Rng rng(8);
        auto joint = joint_from_channels(prior, random_channel(rng, 7),
                                         random_channel(rng, 7));
        CHECK_THROWS_WITH(verify_truthfulness(joint, sign_of(compute_delta(joint))),
                          Catch::Matchers::ContainsSubstring("sampling"));
    }
    SECTION("report JSON uses 1-based strategy labels") {
        auto joint = binary_truth_joint(0.1, 0.1);
        auto j = verify_truthfulness(joint, SignMatrix::identity(2)).to_json();
        CHECK(j["is_truthful"] == true);
        CHECK(j["best_strategies"][0] == nlohmann::json::array({1, 2}));
    }
}

TEST_CASE("expected_accuracy_score") {
    CHECK(expected_accuracy_score(kHalf, ConfusionChannel::identity(2)) ==
          Catch::Approx(0.5));
    CHECK(expected_accuracy_score(kHalf, ConfusionChannel::binary(0.5, 0.5)) ==
          Catch::Approx(0.0).margin(1e-15));
    SECTION("cross-check against the exact CA expectation") {
        auto c = ConfusionChannel::binary(0.2, 0.1);
        CHECK(expected_accuracy_score(kHalf, c) == Catch::Approx(0.35));
        CHECK(expected_accuracy_score(kHalf, c) ==
              Catch::Approx(truthful_value(joint_with_truth(kHalf, c),
                                           SignMatrix::identity(2))));
    }
    SECTION("scope is enforced") {
        CHECK_THROWS_AS(expected_accuracy_score(Prior({0.3, 0.7}),
                                                ConfusionChannel::identity(2)),
                        std::invalid_argument);
        CHECK_THROWS_AS(expected_accuracy_score(Prior::uniform(3),
                                                ConfusionChannel::identity(3)),
                        std::invalid_argument);
    }
    SECTION("strictly increasing in accuracy") {
        double prev = -1.0;
        for (double e = 0.45; e >= 0.0; e -= 0.05) {
            double s = expected_accuracy_score(kHalf, ConfusionChannel::binary(e, e));
            REQUIRE(s > prev);
            prev = s;
        }
    }
}

TEST_CASE("affine_peer_identity") {
    SECTION("identity reference reduces to the truth score") {
        auto [lhs, rhs] = affine_peer_identity(kHalf, ConfusionChannel::binary(0.2, 0.1),
                                               ConfusionChannel::identity(2));
        CHECK(lhs == Catch::Approx(0.35));
        CHECK(lhs == Catch::Approx(rhs).margin(1e-15));
    }
    SECTION("hand value at reference error 0.1/0.1") {
        auto [lhs, rhs] = affine_peer_identity(kHalf, ConfusionChannel::binary(0.15, 0.15),
                                               ConfusionChannel::binary(0.1, 0.1));
        CHECK(rhs == Catch::Approx(0.8 * 0.35));
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
    SECTION("uninformative reference vanishes") {
        auto [lhs, rhs] = affine_peer_identity(kHalf, ConfusionChannel::binary(0.2, 0.1),
                                               ConfusionChannel::binary(0.5, 0.5));
        CHECK(lhs == Catch::Approx(0.0).margin(1e-12));
        CHECK(rhs == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("identity holds on a 20x20 channel grid") {
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) {
                auto agent = ConfusionChannel::binary(0.025 * i, 0.02 * i);
                auto ref = ConfusionChannel::binary(0.025 * j, 0.045 * j);
                auto [lhs, rhs] = affine_peer_identity(kHalf, agent, ref);
                REQUIRE(std::abs(lhs - rhs) <= 1e-12);
            }
    }
    SECTION("peer scores preserve the accuracy ordering") {
        auto ref = ConfusionChannel::binary(0.15, 0.1);
        Rng rng(9);
        for (int rep = 0; rep < 100; ++rep) {
            double e1 = rng.uniform() * 0.49, e2 = rng.uniform() * 0.49;
            auto a = ConfusionChannel::binary(e1, e1);
            auto b = ConfusionChannel::binary(e2, e2);
            double sa = affine_peer_identity(kHalf, a, ref).first;
            double sb = affine_peer_identity(kHalf, b, ref).first;
            if (a.accuracy(kHalf) > b.accuracy(kHalf)) REQUIRE(sa > sb);
        }
    }
}

TEST_CASE("robustness_assess") {
    auto opt = ConfusionChannel::binary(0.1, 0.1);
    auto worst_adv = ConfusionChannel::binary(0.9, 0.9);  // reversed optimum

    SECTION("honest equals Bayes optimal: threshold one half") {
        auto r = robustness_assess(0.3, opt, worst_adv, opt);
        CHECK(r.threshold_gamma == Catch::Approx(0.5));
        CHECK(r.truthful);
    }
    SECTION("hand-solved threshold at ratio two") {
        auto honest = ConfusionChannel::binary(0.3, 0.3);  // alpha+beta = 0.6
        auto r = robustness_assess(0.1, honest, worst_adv, opt);  // alpha*+beta* = 0.2
        CHECK(r.threshold_gamma == Catch::Approx(1.0 / 3.0));
    }
    SECTION("gamma zero is always truthful") {
        auto r = robustness_assess(0.0, ConfusionChannel::binary(0.2, 0.2), worst_adv, opt);
        CHECK(r.combined == Catch::Approx(r.honest_coeff));
        CHECK(r.truthful);
    }
    SECTION("truthful flag flips at the threshold against the worst adversary") {
        auto honest = ConfusionChannel::binary(0.25, 0.15);
        auto r0 = robustness_assess(0.0, honest, worst_adv, opt);
        double g = r0.threshold_gamma;
        CHECK(robustness_assess(g - 1e-6, honest, worst_adv, opt).truthful);
        CHECK_FALSE(robustness_assess(g + 1e-6, honest, worst_adv, opt).truthful);
    }
    SECTION("combined is the stated convex combination") {
        auto honest = ConfusionChannel::binary(0.2, 0.1);
        auto adv = ConfusionChannel::binary(0.6, 0.7);
        auto r = robustness_assess(0.4, honest, adv, opt);
        CHECK(r.combined ==
              Catch::Approx(0.6 * r.honest_coeff + 0.4 * r.adversary_coeff));
    }
    CHECK_THROWS_AS(robustness_assess(0.2, ConfusionChannel::binary(0.5, 0.5), worst_adv, opt),
                    std::invalid_argument);
}

TEST_CASE("calibration_gap") {
    auto agent = ConfusionChannel::binary(0.15, 0.15);  // accuracy 0.85

    SECTION("no deviation, no gap") {
        auto [ca, ce] = calibration_gap(kHalf, agent, agent);
        CHECK(ca == 0.0);
        CHECK(ce == 0.0);
    }
    SECTION("uniform degradation at rate 0.2") {
        auto deviant = apply_transition(agent, uniform_transition(2, 0.2));
        auto [ca, ce] = calibration_gap(kHalf, agent, deviant);
        CHECK(ca == Catch::Approx(-0.14));
        CHECK(ce < 0.0);
    }
    SECTION("label swap flips the truthful value") {
        auto deviant = apply_transition(agent, TransitionMatrix({{0.0, 1.0}, {1.0, 0.0}}));
        auto [ca, ce] = calibration_gap(kHalf, agent, deviant);
        CHECK(ca == Catch::Approx(-0.70));
        CHECK(ce < 0.0);
    }
    SECTION("both gaps nonpositive across the rate grid") {
        for (double r = 0.05; r <= 0.501; r += 0.05) {
            auto u = calibration_gap(kHalf, agent,
                                     apply_transition(agent, uniform_transition(2, r)));
            REQUIRE(u.first <= 1e-15);
            REQUIRE(u.second <= 1e-15);
            auto s = calibration_gap(
                kHalf, agent,
                apply_transition(agent, sparse_transition(2, {{1, 2}}, r)));
            REQUIRE(s.first <= 1e-15);
            REQUIRE(s.second <= 1e-15);
        }
    }
}

TEST_CASE("delta_identity_check") {
    CHECK(delta_identity_check(ConfusionChannel::binary(0.2, 0.1),
                               ConfusionChannel::binary(0.3, 0.2), kHalf));
    CHECK_FALSE(delta_identity_check(ConfusionChannel::binary(0.2, 0.1),
                                     ConfusionChannel::binary(0.5, 0.5), kHalf));
    // anti-informative reference flips the sign structure
    CHECK_FALSE(delta_identity_check(ConfusionChannel::binary(0.2, 0.1),
                                     ConfusionChannel::binary(0.7, 0.6), kHalf));
}

TEST_CASE("Monte Carlo scoring matches the exact expectation") {
    const int N = 100000;
    Rng rng(17);
    auto id_sign = SignMatrix::identity(2);
    RewardStructure zo(RewardKind::zero_one);
    for (int rep = 0; rep < 20; ++rep) {
        double fnr = rng.uniform() * 0.45, fpr = rng.uniform() * 0.45;
        auto channel = ConfusionChannel::binary(fnr, fpr);
        auto joint = joint_with_truth(kHalf, channel);
        double expected = expected_ca_score(joint, TransitionMatrix::identity(2), id_sign);

        auto tasks = sample_truth(kHalf, N, 1000 + rep);
        auto truth_table = PredictionTable::from_hard_labels(*tasks.truth, 2);
        auto table = predict(AnalyticAgent(channel, "a"), tasks, 2000 + rep);
        double mean = score_table(table, truth_table, id_sign, zo,
                                  make_pairing(N, 3000 + rep))
                          .mean;
        // three standard errors; per-task score bounded by 1 in absolute value
        REQUIRE(std::abs(mean - expected) < 3.0 / std::sqrt(static_cast<double>(N)) * 1.0 +
                                                1e-12);
    }
}
