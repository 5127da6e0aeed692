#pragma once

// Simulated hypothesis holders: analytic agents backed by confusion channels,
// per-task prediction tables, misreport strategies, and adversarial reference
// mixing. Sampling takes explicit seeds; parallel callers should allocate
// disjoint seeds.

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "elicit/model.hpp"
#include "elicit/random.hpp"

namespace elicit {

// A shared task set; truth labels are 0-based internally.
struct TaskSet {
    int num_tasks;
    std::optional<std::vector<int>> truth;

    explicit TaskSet(int N, std::optional<std::vector<int>> t = std::nullopt)
        : num_tasks(N), truth(std::move(t)) {
        require(N >= 3, "TaskSet: pairing needs at least 3 tasks");
        if (truth)
            require(static_cast<int>(truth->size()) == N,
                    "TaskSet: truth length must equal num_tasks");
    }
};

// Per-task soft predictions; hard labels are the lowest-index argmax.
struct PredictionTable {
    Mat rows;

    explicit PredictionTable(Mat m) : rows(std::move(m)) {
        require(!rows.empty(), "PredictionTable: no rows");
        for (const auto& row : rows) {
            double s = 0.0;
            for (double v : row) {
                require(v >= 0.0, "PredictionTable: negative probability");
                s += v;
            }
            require(std::abs(s - 1.0) <= 1e-9,
                    "PredictionTable: row does not sum to 1");
        }
    }

    int num_tasks() const { return static_cast<int>(rows.size()); }
    int num_classes() const { return static_cast<int>(rows.front().size()); }

    int hard_label(int n) const {
        const auto& row = rows[n];
        return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }

    std::vector<int> hard_labels() const {
        std::vector<int> out(rows.size());
        for (int n = 0; n < num_tasks(); ++n) out[n] = hard_label(n);
        return out;
    }

    static PredictionTable from_hard_labels(const std::vector<int>& labels, int L) {
        Mat m(labels.size(), std::vector<double>(L, 0.0));
        for (std::size_t n = 0; n < labels.size(); ++n) {
            require(labels[n] >= 0 && labels[n] < L,
                    "PredictionTable: label out of range");
            m[n][labels[n]] = 1.0;
        }
        return PredictionTable(std::move(m));
    }

    PredictionTable one_hot() const {
        return from_hard_labels(hard_labels(), num_classes());
    }
};

struct AnalyticAgent {
    ConfusionChannel channel;
    std::string label;

    AnalyticAgent(ConfusionChannel c, std::string name)
        : channel(std::move(c)), label(std::move(name)) {}
};

// Convex mixture of an honest and an adversarial reference.
struct AdversaryMix {
    double honest_weight;
    AnalyticAgent honest;
    AnalyticAgent adversary;

    AdversaryMix(double w, AnalyticAgent h, AnalyticAgent a)
        : honest_weight(w), honest(std::move(h)), adversary(std::move(a)) {
        require(w >= 0.0 && w <= 1.0, "AdversaryMix: weight outside [0,1]");
        require(honest.channel.num_classes() == adversary.channel.num_classes(),
                "AdversaryMix: channel dimension mismatch");
    }
};

inline TaskSet sample_truth(const Prior& prior, int N, std::uint64_t seed) {
    require(N >= 3, "sample_truth: need at least 3 tasks");
    Rng rng(seed);
    std::vector<int> truth(N);
    for (int n = 0; n < N; ++n) truth[n] = rng.categorical(prior.probs);
    return TaskSet(N, std::move(truth));
}

// One-hot reports sampled from the agent's channel row for each true label.
inline PredictionTable predict(const AnalyticAgent& agent, const TaskSet& tasks,
                               std::uint64_t seed) {
    require(tasks.truth.has_value(), "predict: task set has no truth labels");
    Rng rng(seed);
    const int L = agent.channel.num_classes();
    std::vector<int> labels(tasks.num_tasks);
    for (int n = 0; n < tasks.num_tasks; ++n) {
        int y = (*tasks.truth)[n];
        require(y >= 0 && y < L, "predict: truth label out of channel range");
        labels[n] = rng.categorical(agent.channel.rows[y]);
    }
    return PredictionTable::from_hard_labels(labels, L);
}

// Soft reports: row n is the channel's conditional distribution given truth.
inline PredictionTable predict_soft(const AnalyticAgent& agent, const TaskSet& tasks) {
    require(tasks.truth.has_value(), "predict_soft: task set has no truth labels");
    const int L = agent.channel.num_classes();
    Mat rows(tasks.num_tasks);
    for (int n = 0; n < tasks.num_tasks; ++n) {
        int y = (*tasks.truth)[n];
        require(y >= 0 && y < L, "predict_soft: truth label out of channel range");
        rows[n] = agent.channel.rows[y];
    }
    return PredictionTable(std::move(rows));
}

// Resamples each hard label j to k with probability t[j][k]; output one-hot.
inline PredictionTable misreport(const PredictionTable& table,
                                 const TransitionMatrix& t, std::uint64_t seed) {
    require(table.num_classes() == t.num_classes(),
            "misreport: transition dimension mismatch");
    Rng rng(seed);
    const int L = t.num_classes();
    std::vector<int> labels(table.num_tasks());
    for (int n = 0; n < table.num_tasks(); ++n)
        labels[n] = rng.categorical(t.rows[table.hard_label(n)]);
    return PredictionTable::from_hard_labels(labels, L);
}

// Soft honest and adversary predictions combined convexly, then one-hot
// encoded at the argmax (ties break to the lowest class index).
inline PredictionTable mix_reference(const AdversaryMix& mix, const TaskSet& tasks,
                                     std::uint64_t /*seed*/) {
    PredictionTable h = predict_soft(mix.honest, tasks);
    PredictionTable a = predict_soft(mix.adversary, tasks);
    const int L = h.num_classes();
    Mat rows(tasks.num_tasks, std::vector<double>(L, 0.0));
    for (int n = 0; n < tasks.num_tasks; ++n)
        for (int l = 0; l < L; ++l)
            rows[n][l] = mix.honest_weight * h.rows[n][l] +
                         (1.0 - mix.honest_weight) * a.rows[n][l];
    return PredictionTable(std::move(rows)).one_hot();
}

// Empirical joint over hard labels.
inline JointDistribution empirical_joint(const PredictionTable& a,
                                         const PredictionTable& b) {
    require(a.num_tasks() == b.num_tasks(), "empirical_joint: table length mismatch");
    require(a.num_classes() == b.num_classes(),
            "empirical_joint: class count mismatch");
    const int L = a.num_classes();
    const int N = a.num_tasks();
    Mat cells(L, std::vector<double>(L, 0.0));
    for (int n = 0; n < N; ++n) cells[a.hard_label(n)][b.hard_label(n)] += 1.0 / N;
    return JointDistribution(std::move(cells));
}

// ---------------------------------------------------------------------------
// CSV I/O. Soft tables: task_id,p1,...,pL. Hard labels / truth: task_id,label
// with 1-based labels.

inline void write_prediction_csv(const PredictionTable& table, std::ostream& os) {
    const int L = table.num_classes();
    os << "task_id";
    for (int l = 1; l <= L; ++l) os << ",p" << l;
    os << '\n';
    os.precision(17);
    for (int n = 0; n < table.num_tasks(); ++n) {
        os << (n + 1);
        for (int l = 0; l < L; ++l) os << ',' << table.rows[n][l];
        os << '\n';
    }
}

inline void write_prediction_csv(const PredictionTable& table, const std::string& path) {
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    write_prediction_csv(table, os);
}

inline PredictionTable read_prediction_csv(std::istream& is, const std::string& where) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), where + ": empty file");
    Mat rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');  // task_id, positional
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        require(!row.empty(), where + ": row with no probabilities");
        rows.push_back(std::move(row));
    }
    return PredictionTable(std::move(rows));
}

inline PredictionTable read_prediction_csv(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open: " + path);
    return read_prediction_csv(is, path);
}

inline void write_labels_csv(const std::vector<int>& labels, std::ostream& os) {
    os << "task_id,label\n";
    for (std::size_t n = 0; n < labels.size(); ++n)
        os << (n + 1) << ',' << (labels[n] + 1) << '\n';
}

inline void write_truth_csv(const TaskSet& tasks, const std::string& path) {
    require(tasks.truth.has_value(), "write_truth_csv: task set has no truth labels");
    std::ofstream os(path);
    require(os.good(), "cannot open for writing: " + path);
    write_labels_csv(*tasks.truth, os);
}

inline std::vector<int> read_labels_csv(std::istream& is, const std::string& where) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), where + ": empty file");
    std::vector<int> labels;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        std::getline(ls, cell, ',');
        int lab = std::stoi(cell);
        require(lab >= 1, where + ": labels are 1-based");
        labels.push_back(lab - 1);
    }
    return labels;
}

inline std::vector<int> read_labels_csv(const std::string& path) {
    std::ifstream is(path);
    require(is.good(), "cannot open: " + path);
    return read_labels_csv(is, path);
}

}  // namespace elicit
