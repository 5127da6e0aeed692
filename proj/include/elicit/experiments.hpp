#pragma once

// Desk-scale sweep harness: misreport-rate sweeps under uniform/sparse
// transitions, ground-truth / peer / adversarial-reference verification,
// 0-1 and cross-entropy rewards, with deviation-interval statistics and
// deterministic CSV output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "elicit/agents.hpp"
#include "elicit/analytics.hpp"
#include "elicit/model.hpp"
#include "elicit/random.hpp"
#include "elicit/scoring.hpp"

namespace elicit {

enum class TransitionFamily { uniform, sparse };
enum class VerificationMode { ground_truth, peer, peer_adversarial };

inline std::string to_string(TransitionFamily f) {
    return f == TransitionFamily::uniform ? "uniform" : "sparse";
}
inline std::string to_string(VerificationMode m) {
    switch (m) {
        case VerificationMode::ground_truth: return "ground_truth";
        case VerificationMode::peer: return "peer";
        default: return "peer_adversarial";
    }
}
inline std::string to_string(RewardKind k) {
    return k == RewardKind::zero_one ? "zero_one" : "cross_entropy";
}

struct SweepConfig {
    Prior prior;
    std::vector<AnalyticAgent> agents;  // typically weak and strong
    TransitionFamily family = TransitionFamily::uniform;
    std::vector<std::pair<int, int>> sparse_pairs;  // 1-based, sparse family only
    std::vector<double> rate_grid;
    std::vector<RewardKind> rewards;
    VerificationMode mode = VerificationMode::ground_truth;
    double gamma = 0.3;          // adversary fraction, reported alongside
    double honest_weight = 0.7;  // reference mixing weight, adversarial mode
    std::optional<ConfusionChannel> adversary_channel;
    int num_tasks = 10000;
    int runs = 5;
    std::uint64_t base_seed = 1;
    double ce_clip = kDefaultCeClip;

    int num_classes() const { return prior.num_classes(); }

    void validate() const {
        require(!agents.empty(), "SweepConfig: need at least one agent");
        for (const auto& a : agents)
            require(a.channel.num_classes() == num_classes(),
                    "SweepConfig: agent '" + a.label + "' dimension mismatch");
        require(!rate_grid.empty(), "SweepConfig: empty rate grid");
        for (std::size_t i = 0; i < rate_grid.size(); ++i) {
            require(rate_grid[i] >= 0.0 && rate_grid[i] <= 0.5,
                    "SweepConfig: rates must lie in [0, 0.5]");
            require(i == 0 || rate_grid[i] > rate_grid[i - 1],
                    "SweepConfig: rate grid must be ascending");
        }
        require(!rewards.empty(), "SweepConfig: no reward kinds");
        require(runs >= 1, "SweepConfig: runs must be >= 1");
        require(num_tasks >= 3, "SweepConfig: need at least 3 tasks");
        if (mode != VerificationMode::ground_truth)
            require(agents.size() >= 2, "SweepConfig: peer modes need two agents");
        if (mode == VerificationMode::peer_adversarial) {
            require(adversary_channel.has_value(),
                    "SweepConfig: adversarial mode needs an adversary channel");
            require(adversary_channel->num_classes() == num_classes(),
                    "SweepConfig: adversary channel dimension mismatch");
            require(gamma >= 0.0 && gamma <= 1.0, "SweepConfig: gamma outside [0,1]");
            require(honest_weight >= 0.0 && honest_weight <= 1.0,
                    "SweepConfig: honest weight outside [0,1]");
        }
        if (family == TransitionFamily::sparse)
            require(!sparse_pairs.empty(), "SweepConfig: sparse family needs pairs");
    }

    TransitionMatrix transition(double rate) const {
        return family == TransitionFamily::uniform
                   ? uniform_transition(num_classes(), rate)
                   : sparse_transition(num_classes(), sparse_pairs, rate);
    }
};

struct SweepPoint {
    double rate;
    double mean_score;
    double deviation;  // max |run - mean|
    std::vector<double> per_run;
};

struct SweepSeries {
    std::string setting;  // transition family
    std::string agent;
    RewardKind reward;
    std::string mode;
    std::vector<SweepPoint> points;
};

namespace detail {

inline std::uint64_t sub_seed(std::uint64_t base, std::uint64_t salt) {
    return base * 0x9E3779B97F4A7C15ULL + salt;
}

inline SweepPoint aggregate_point(double rate, std::vector<double> per_run) {
    double mean = std::accumulate(per_run.begin(), per_run.end(), 0.0) /
                  static_cast<double>(per_run.size());
    double dev = 0.0;
    for (double v : per_run) dev = std::max(dev, std::abs(v - mean));
    return {rate, mean, dev, std::move(per_run)};
}

// One-hot reference channel: argmax of the convex honest/adversary mixture,
// evaluated per true class. This is the analytic counterpart of mixing soft
// references before one-hot encoding.
inline ConfusionChannel mixed_reference_channel(const ConfusionChannel& honest,
                                                const ConfusionChannel& adversary,
                                                double honest_weight) {
    const int L = honest.num_classes();
    Mat rows(L, std::vector<double>(L, 0.0));
    for (int y = 0; y < L; ++y) {
        int best = 0;
        double best_v = -1.0;
        for (int l = 0; l < L; ++l) {
            double v = honest_weight * honest.rows[y][l] +
                       (1.0 - honest_weight) * adversary.rows[y][l];
            if (v > best_v) {
                best_v = v;
                best = l;
            }
        }
        rows[y][best] = 1.0;
    }
    return ConfusionChannel(std::move(rows));
}

// Reference channel seen by agent `i` under the configured verification mode.
inline ConfusionChannel reference_channel(const SweepConfig& config, std::size_t i) {
    switch (config.mode) {
        case VerificationMode::ground_truth:
            return ConfusionChannel::identity(config.num_classes());
        case VerificationMode::peer:
            return config.agents[i == 0 ? 1 : 0].channel;
        default:
            return mixed_reference_channel(config.agents[i == 0 ? 1 : 0].channel,
                                           *config.adversary_channel,
                                           config.honest_weight);
    }
}

inline SignMatrix truthful_sign(const SweepConfig& config, std::size_t i) {
    const JointDistribution joint = joint_from_channels(
        config.prior, config.agents[i].channel, reference_channel(config, i));
    return sign_of(compute_delta(joint));
}

}  // namespace detail

// Exact expected mean score per rate for an analytic agent; the oracle band
// for run_sweep output.
inline std::vector<std::pair<double, double>> expected_sweep_curve(
    const SweepConfig& config, std::size_t agent_index, RewardKind reward) {
    config.validate();
    require(agent_index < config.agents.size(), "expected_sweep_curve: bad agent index");
    const ConfusionChannel ref = detail::reference_channel(config, agent_index);
    const SignMatrix sign = detail::truthful_sign(config, agent_index);
    const TransitionMatrix truthful = TransitionMatrix::identity(config.num_classes());
    std::vector<std::pair<double, double>> curve;
    for (double rate : config.rate_grid) {
        const ConfusionChannel composed =
            apply_transition(config.agents[agent_index].channel, config.transition(rate));
        const JointDistribution joint = joint_from_channels(config.prior, composed, ref);
        double e = reward == RewardKind::zero_one
                       ? expected_ca_score(joint, truthful, sign)
                       : detail::expected_ce_score_onehot(joint, config.ce_clip);
        curve.emplace_back(rate, e);
    }
    return curve;
}

// Exact per-task mean and variance of the CA score under a joint; used for
// standard-error bands around empirical sweep means.
inline std::pair<double, double> expected_score_moments(const JointDistribution& joint,
                                                        const SignMatrix& sign,
                                                        RewardKind reward,
                                                        double ce_clip = kDefaultCeClip) {
    const int L = joint.num_classes();
    const auto rm = joint.row_marginal();
    const auto cm = joint.col_marginal();
    double pa = 0.0, pb = 0.0;  // reward-event probability: scored pair, penalty pair
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l) {
            double hit = reward == RewardKind::zero_one ? sign.cells[k][l]
                                                        : (k == l ? 1.0 : 0.0);
            pa += joint.cells[k][l] * hit;
            pb += rm[k] * cm[l] * hit;
        }
    const double scale = reward == RewardKind::zero_one ? 1.0 : -std::log(ce_clip);
    const double mean = scale * (pa - pb);
    const double second = scale * scale * (pa + pb - 2.0 * pa * pb);
    return {mean, second - mean * mean};
}

// Full empirical sweep. Deterministic for a fixed base seed: run seeds are
// derived as base_seed + run index, with fixed salts for the truth sample,
// the pairing plan, agent predictions, and per-rate misreport draws.
inline std::vector<SweepSeries> run_sweep(const SweepConfig& config) {
    config.validate();
    const int L = config.num_classes();
    const RewardStructure ce(RewardKind::cross_entropy, config.ce_clip);
    const RewardStructure zo(RewardKind::zero_one);

    std::vector<SignMatrix> signs;
    for (std::size_t i = 0; i < config.agents.size(); ++i)
        signs.push_back(detail::truthful_sign(config, i));

    // per (agent, reward, rate): run scores
    std::vector<std::vector<std::vector<std::vector<double>>>> scores(
        config.agents.size(),
        std::vector<std::vector<std::vector<double>>>(
            config.rewards.size(),
            std::vector<std::vector<double>>(config.rate_grid.size())));

    for (int run = 0; run < config.runs; ++run) {
        const std::uint64_t run_seed = config.base_seed + static_cast<std::uint64_t>(run);
        const TaskSet tasks =
            sample_truth(config.prior, config.num_tasks, detail::sub_seed(run_seed, 1));
        const PairingPlan pairing =
            make_pairing(config.num_tasks, detail::sub_seed(run_seed, 2));

        std::vector<PredictionTable> truthful;
        for (std::size_t i = 0; i < config.agents.size(); ++i)
            truthful.push_back(
                predict(config.agents[i], tasks, detail::sub_seed(run_seed, 10 + i)));

        for (std::size_t i = 0; i < config.agents.size(); ++i) {
            PredictionTable reference = [&] {
                switch (config.mode) {
                    case VerificationMode::ground_truth:
                        return PredictionTable::from_hard_labels(*tasks.truth, L);
                    case VerificationMode::peer:
                        return truthful[i == 0 ? 1 : 0];
                    default:
                        return mix_reference(
                            AdversaryMix(config.honest_weight,
                                         config.agents[i == 0 ? 1 : 0],
                                         AnalyticAgent(*config.adversary_channel,
                                                       "adversary")),
                            tasks, detail::sub_seed(run_seed, 3));
                }
            }();

            for (std::size_t ri = 0; ri < config.rate_grid.size(); ++ri) {
                const PredictionTable reported =
                    misreport(truthful[i], config.transition(config.rate_grid[ri]),
                              detail::sub_seed(run_seed, 100 + 10 * ri + i));
                for (std::size_t w = 0; w < config.rewards.size(); ++w) {
                    const RewardStructure& reward =
                        config.rewards[w] == RewardKind::zero_one ? zo : ce;
                    scores[i][w][ri].push_back(
                        score_table(reported, reference, signs[i], reward, pairing).mean);
                }
            }
        }
    }

    std::vector<SweepSeries> out;
    for (std::size_t i = 0; i < config.agents.size(); ++i)
        for (std::size_t w = 0; w < config.rewards.size(); ++w) {
            SweepSeries series{to_string(config.family), config.agents[i].label,
                               config.rewards[w], to_string(config.mode), {}};
            for (std::size_t ri = 0; ri < config.rate_grid.size(); ++ri)
                series.points.push_back(detail::aggregate_point(
                    config.rate_grid[ri], std::move(scores[i][w][ri])));
            out.push_back(std::move(series));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Config JSON (field names mirror SweepConfig).

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    SweepConfig cfg{Prior(j.at("prior").get<std::vector<double>>()), {}};
    require(j.at("num_classes").get<int>() == cfg.num_classes(),
            "config: num_classes disagrees with prior length");
    for (const auto& a : j.at("agents"))
        cfg.agents.emplace_back(ConfusionChannel(a.at("channel").get<Mat>()),
                                a.at("label").get<std::string>());
    const std::string family = j.value("transition_family", "uniform");
    require(family == "uniform" || family == "sparse",
            "config: unknown transition_family '" + family + "'");
    cfg.family = family == "uniform" ? TransitionFamily::uniform : TransitionFamily::sparse;
    if (j.contains("sparse_pairs"))
        for (const auto& p : j.at("sparse_pairs"))
            cfg.sparse_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    else if (cfg.family == TransitionFamily::sparse && cfg.num_classes() == 10)
        cfg.sparse_pairs = default_sparse_pairs();
    cfg.rate_grid = j.at("rate_grid").get<std::vector<double>>();
    for (const auto& r : j.at("rewards")) {
        const std::string name = r.get<std::string>();
        require(name == "zero_one" || name == "cross_entropy",
                "config: unknown reward '" + name + "'");
        cfg.rewards.push_back(name == "zero_one" ? RewardKind::zero_one
                                                 : RewardKind::cross_entropy);
    }
    const std::string mode = j.value("mode", "ground_truth");
    if (mode == "ground_truth") cfg.mode = VerificationMode::ground_truth;
    else if (mode == "peer") cfg.mode = VerificationMode::peer;
    else if (mode == "peer_adversarial") cfg.mode = VerificationMode::peer_adversarial;
    else throw std::invalid_argument("config: unknown mode '" + mode + "'");
    cfg.gamma = j.value("gamma", 0.3);
    cfg.honest_weight = j.value("honest_weight", 0.7);
    if (j.contains("adversary_channel"))
        cfg.adversary_channel = ConfusionChannel(j.at("adversary_channel").get<Mat>());
    cfg.num_tasks = j.value("num_tasks", 10000);
    cfg.runs = j.value("runs", 5);
    cfg.base_seed = j.value("base_seed", std::uint64_t{1});
    cfg.ce_clip = j.value("ce_clip", kDefaultCeClip);
    cfg.validate();
    return cfg;
}

inline nlohmann::json sweep_config_to_json(const SweepConfig& cfg) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : cfg.agents)
        agents.push_back({{"label", a.label}, {"channel", a.channel.rows}});
    nlohmann::json rewards = nlohmann::json::array();
    for (RewardKind k : cfg.rewards) rewards.push_back(to_string(k));
    nlohmann::json pairs = nlohmann::json::array();
    for (auto [a, b] : cfg.sparse_pairs) pairs.push_back({a, b});
    nlohmann::json j = {{"num_classes", cfg.num_classes()},
                        {"prior", cfg.prior.probs},
                        {"agents", agents},
                        {"transition_family", to_string(cfg.family)},
                        {"rate_grid", cfg.rate_grid},
                        {"rewards", rewards},
                        {"mode", to_string(cfg.mode)},
                        {"num_tasks", cfg.num_tasks},
                        {"runs", cfg.runs},
                        {"base_seed", cfg.base_seed},
                        {"ce_clip", cfg.ce_clip}};
    if (cfg.family == TransitionFamily::sparse) j["sparse_pairs"] = pairs;
    if (cfg.mode == VerificationMode::peer_adversarial) {
        j["gamma"] = cfg.gamma;
        j["honest_weight"] = cfg.honest_weight;
        j["adversary_channel"] = cfg.adversary_channel->rows;
    }
    return j;
}

// ---------------------------------------------------------------------------
// CSV emission and parsing. The header comment line records the resolved
// config, seed, and generator algorithm.

inline void emit_csv(const std::vector<SweepSeries>& series, std::ostream& os,
                     const std::optional<SweepConfig>& config = std::nullopt) {
    if (config)
        os << "# config=" << sweep_config_to_json(*config).dump()
           << " seed=" << config->base_seed << " rng=" << Rng::kAlgorithm << '\n';
    os << "setting,agent,reward,mode,rate,mean_score,deviation,run_scores\n";
    os.precision(17);
    for (const auto& s : series)
        for (const auto& p : s.points) {
            os << s.setting << ',' << s.agent << ',' << to_string(s.reward) << ','
               << s.mode << ',' << p.rate << ',' << p.mean_score << ','
               << p.deviation << ',';
            for (std::size_t i = 0; i < p.per_run.size(); ++i)
                os << (i ? ";" : "") << p.per_run[i];
            os << '\n';
        }
}

inline void emit_csv(const std::vector<SweepSeries>& series, const std::string& path,
                     const std::optional<SweepConfig>& config = std::nullopt) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    emit_csv(series, os, config);
    require(os.good(), "write failed: " + path);
}

inline std::vector<SweepSeries> parse_csv(std::istream& is) {
    std::vector<SweepSeries> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("setting,", 0) == 0) continue;
        std::istringstream ls(line);
        std::string setting, agent, reward, mode, cell;
        std::getline(ls, setting, ',');
        std::getline(ls, agent, ',');
        std::getline(ls, reward, ',');
        std::getline(ls, mode, ',');
        SweepPoint p;
        std::getline(ls, cell, ',');
        p.rate = std::stod(cell);
        std::getline(ls, cell, ',');
        p.mean_score = std::stod(cell);
        std::getline(ls, cell, ',');
        p.deviation = std::stod(cell);
        std::getline(ls, cell, ',');
        std::istringstream rs(cell);
        std::string v;
        while (std::getline(rs, v, ';')) p.per_run.push_back(std::stod(v));
        RewardKind rk = reward == "zero_one" ? RewardKind::zero_one
                                             : RewardKind::cross_entropy;
        if (out.empty() || out.back().setting != setting || out.back().agent != agent ||
            out.back().reward != rk || out.back().mode != mode)
            out.push_back({setting, agent, rk, mode, {}});
        out.back().points.push_back(std::move(p));
    }
    return out;
}

inline std::string emit_summary(const std::vector<SweepSeries>& series) {
    std::ostringstream os;
    os << std::left << std::setw(9) << "setting" << std::setw(8) << "agent"
       << std::setw(15) << "reward" << std::setw(18) << "mode" << std::right
       << std::setw(7) << "rate" << std::setw(12) << "mean" << std::setw(12)
       << "median" << std::setw(12) << "deviation" << '\n';
    os << std::fixed << std::setprecision(4);
    for (const auto& s : series)
        for (const auto& p : s.points) {
            std::vector<double> sorted = p.per_run;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t n = sorted.size();
            double median = n % 2 ? sorted[n / 2]
                                  : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
            os << std::left << std::setw(9) << s.setting << std::setw(8) << s.agent
               << std::setw(15) << to_string(s.reward) << std::setw(18) << s.mode
               << std::right << std::setw(7) << p.rate << std::setw(12)
               << p.mean_score << std::setw(12) << median << std::setw(12)
               << p.deviation << '\n';
        }
    return os.str();
}

}  // namespace elicit
