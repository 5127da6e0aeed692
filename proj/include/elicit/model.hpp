#pragma once

// Probabilistic primitives for correlated-agreement scoring: label priors,
// confusion channels, joint distributions, delta (marginal-correlation)
// matrices, sign matrices, and misreport transition matrices.
//
// All types are immutable values after construction and every operation is a
// pure function, so everything here is safe to share across threads.

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace elicit {

using Mat = std::vector<std::vector<double>>;

constexpr double kStochasticTol = 1e-12;
constexpr double kMarginalTol = 1e-10;
constexpr double kDefaultSignTol = 1e-12;
constexpr double kDefaultCeClip = 1e-12;

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

namespace detail {

inline void check_square(const Mat& m, const std::string& name) {
    require(!m.empty(), name + ": matrix must be non-empty");
    for (const auto& row : m)
        require(row.size() == m.size(), name + ": matrix must be square");
}

inline void check_rows_stochastic(const Mat& m, const std::string& name) {
    for (std::size_t j = 0; j < m.size(); ++j) {
        double s = 0.0;
        for (double v : m[j]) {
            require(v >= -kStochasticTol && v <= 1.0 + kStochasticTol,
                    name + ": entry outside [0,1]");
            s += v;
        }
        require(std::abs(s - 1.0) <= 1e-9,
                name + ": row " + std::to_string(j + 1) + " does not sum to 1");
    }
}

}  // namespace detail

// Label space {1,...,L}; 0-based indices internally, 1-based in all I/O.
struct LabelSpace {
    int num_classes;

    explicit LabelSpace(int L) : num_classes(L) {
        require(L >= 2, "LabelSpace: need at least 2 classes");
    }
};

// Distribution over the L classes, P(Y = l).
struct Prior {
    std::vector<double> probs;

    explicit Prior(std::vector<double> p) : probs(std::move(p)) {
        require(probs.size() >= 2, "Prior: need at least 2 classes");
        double s = 0.0;
        for (double v : probs) {
            require(v >= 0.0 && v <= 1.0, "Prior: entry outside [0,1]");
            s += v;
        }
        require(std::abs(s - 1.0) <= kStochasticTol, "Prior: entries must sum to 1");
    }

    int num_classes() const { return static_cast<int>(probs.size()); }

    static Prior uniform(int L) {
        return Prior(std::vector<double>(L, 1.0 / L));
    }
};

// rows[true_label][predicted_label] = P(f(X) = k | Y = j). Row-stochastic.
struct ConfusionChannel {
    Mat rows;

    explicit ConfusionChannel(Mat m) : rows(std::move(m)) {
        detail::check_square(rows, "ConfusionChannel");
        detail::check_rows_stochastic(rows, "ConfusionChannel");
    }

    int num_classes() const { return static_cast<int>(rows.size()); }

    static ConfusionChannel identity(int L) {
        Mat m(L, std::vector<double>(L, 0.0));
        for (int j = 0; j < L; ++j) m[j][j] = 1.0;
        return ConfusionChannel(std::move(m));
    }

    // Binary channel from error rates: fnr = P(f=2|Y=1), fpr = P(f=1|Y=2).
    static ConfusionChannel binary(double fnr, double fpr) {
        require(fnr >= 0.0 && fnr <= 1.0 && fpr >= 0.0 && fpr <= 1.0,
                "ConfusionChannel::binary: rates outside [0,1]");
        return ConfusionChannel({{1.0 - fnr, fnr}, {fpr, 1.0 - fpr}});
    }

    double fnr() const {
        require(num_classes() == 2, "fnr: binary channels only");
        return rows[0][1];
    }
    double fpr() const {
        require(num_classes() == 2, "fpr: binary channels only");
        return rows[1][0];
    }

    double accuracy(const Prior& prior) const {
        require(prior.num_classes() == num_classes(),
                "accuracy: prior dimension mismatch");
        double a = 0.0;
        for (int j = 0; j < num_classes(); ++j) a += prior.probs[j] * rows[j][j];
        return a;
    }
};

// cells[k][l] = P(A = k, B = l) for two label sources A, B.
struct JointDistribution {
    Mat cells;

    explicit JointDistribution(Mat m) : cells(std::move(m)) {
        detail::check_square(cells, "JointDistribution");
        double s = 0.0;
        for (const auto& row : cells)
            for (double v : row) {
                require(v >= -kStochasticTol, "JointDistribution: negative cell");
                s += v;
            }
        require(std::abs(s - 1.0) <= 1e-9, "JointDistribution: cells must sum to 1");
    }

    int num_classes() const { return static_cast<int>(cells.size()); }

    std::vector<double> row_marginal() const {
        std::vector<double> m(cells.size(), 0.0);
        for (std::size_t k = 0; k < cells.size(); ++k)
            for (double v : cells[k]) m[k] += v;
        return m;
    }

    std::vector<double> col_marginal() const {
        std::vector<double> m(cells.size(), 0.0);
        for (const auto& row : cells)
            for (std::size_t l = 0; l < row.size(); ++l) m[l] += row[l];
        return m;
    }
};

// cells[k][l] = P(A=k, B=l) - P(A=k) P(B=l). Rows and columns sum to 0.
struct DeltaMatrix {
    Mat cells;

    explicit DeltaMatrix(Mat m) : cells(std::move(m)) {
        detail::check_square(cells, "DeltaMatrix");
        const int L = static_cast<int>(cells.size());
        for (int k = 0; k < L; ++k) {
            double rs = 0.0, cs = 0.0;
            for (int l = 0; l < L; ++l) {
                rs += cells[k][l];
                cs += cells[l][k];
            }
            require(std::abs(rs) <= kMarginalTol && std::abs(cs) <= kMarginalTol,
                    "DeltaMatrix: rows/columns must sum to 0");
        }
    }

    int num_classes() const { return static_cast<int>(cells.size()); }
};

// 0/1 indicator of strictly positive delta cells.
struct SignMatrix {
    Mat cells;

    explicit SignMatrix(Mat m) : cells(std::move(m)) {
        detail::check_square(cells, "SignMatrix");
        for (const auto& row : cells)
            for (double v : row)
                require(v == 0.0 || v == 1.0, "SignMatrix: entries must be 0 or 1");
    }

    int num_classes() const { return static_cast<int>(cells.size()); }

    bool is_identity() const {
        for (std::size_t k = 0; k < cells.size(); ++k)
            for (std::size_t l = 0; l < cells.size(); ++l)
                if (cells[k][l] != (k == l ? 1.0 : 0.0)) return false;
        return true;
    }

    bool is_anti_identity() const {
        for (std::size_t k = 0; k < cells.size(); ++k)
            for (std::size_t l = 0; l < cells.size(); ++l)
                if (cells[k][l] != (k == l ? 0.0 : 1.0)) return false;
        return true;
    }

    static SignMatrix identity(int L) {
        Mat m(L, std::vector<double>(L, 0.0));
        for (int k = 0; k < L; ++k) m[k][k] = 1.0;
        return SignMatrix(std::move(m));
    }
};

// rows[j][k] = P(report k | truthful label j). Row-stochastic.
struct TransitionMatrix {
    Mat rows;

    explicit TransitionMatrix(Mat m) : rows(std::move(m)) {
        detail::check_square(rows, "TransitionMatrix");
        detail::check_rows_stochastic(rows, "TransitionMatrix");
    }

    int num_classes() const { return static_cast<int>(rows.size()); }

    static TransitionMatrix identity(int L) {
        Mat m(L, std::vector<double>(L, 0.0));
        for (int j = 0; j < L; ++j) m[j][j] = 1.0;
        return TransitionMatrix(std::move(m));
    }
};

// P(A=k, B=l) = sum_y P(Y=y) a[y][k] b[y][l], sources conditionally
// independent given Y.
inline JointDistribution joint_from_channels(const Prior& prior,
                                             const ConfusionChannel& a,
                                             const ConfusionChannel& b) {
    const int L = prior.num_classes();
    require(a.num_classes() == L, "joint_from_channels: channel a dimension mismatch");
    require(b.num_classes() == L, "joint_from_channels: channel b dimension mismatch");
    Mat cells(L, std::vector<double>(L, 0.0));
    for (int y = 0; y < L; ++y)
        for (int k = 0; k < L; ++k)
            for (int l = 0; l < L; ++l)
                cells[k][l] += prior.probs[y] * a.rows[y][k] * b.rows[y][l];
    return JointDistribution(std::move(cells));
}

// Joint against ground truth: cells[k][l] = P(Y=l) a[l][k].
inline JointDistribution joint_with_truth(const Prior& prior,
                                          const ConfusionChannel& a) {
    const int L = prior.num_classes();
    require(a.num_classes() == L, "joint_with_truth: channel dimension mismatch");
    Mat cells(L, std::vector<double>(L, 0.0));
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            cells[k][l] = prior.probs[l] * a.rows[l][k];
    return JointDistribution(std::move(cells));
}

inline DeltaMatrix compute_delta(const JointDistribution& joint) {
    const int L = joint.num_classes();
    const auto rm = joint.row_marginal();
    const auto cm = joint.col_marginal();
    Mat cells(L, std::vector<double>(L, 0.0));
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            cells[k][l] = joint.cells[k][l] - rm[k] * cm[l];
    return DeltaMatrix(std::move(cells));
}

inline SignMatrix sign_of(const DeltaMatrix& delta,
                          double sign_tolerance = kDefaultSignTol) {
    require(sign_tolerance >= 0.0, "sign_of: tolerance must be nonnegative");
    const int L = delta.num_classes();
    Mat cells(L, std::vector<double>(L, 0.0));
    for (int k = 0; k < L; ++k)
        for (int l = 0; l < L; ++l)
            cells[k][l] = delta.cells[k][l] > sign_tolerance ? 1.0 : 0.0;
    return SignMatrix(std::move(cells));
}

// Uniform misreport channel parameterized by total misreport rate
// m = (L-1) e: diagonal 1-m, every off-diagonal entry m/(L-1).
inline TransitionMatrix uniform_transition(int L, double rate) {
    require(L >= 2, "uniform_transition: need at least 2 classes");
    require(rate >= 0.0 && rate <= 1.0 - 1.0 / L,
            "uniform_transition: rate outside [0, 1-1/L]");
    const double e = rate / (L - 1);
    Mat m(L, std::vector<double>(L, e));
    for (int j = 0; j < L; ++j) m[j][j] = 1.0 - rate;
    return TransitionMatrix(std::move(m));
}

// Pairwise-swap misreport channel: each listed pair (i,j) flips with
// probability `rate`; unpaired classes stay put. Pairs are 1-based and must
// form a matching.
inline TransitionMatrix sparse_transition(int L,
                                          const std::vector<std::pair<int, int>>& pairs,
                                          double rate) {
    require(L >= 2, "sparse_transition: need at least 2 classes");
    require(rate >= 0.0 && rate <= 1.0, "sparse_transition: rate outside [0,1]");
    std::vector<bool> used(L, false);
    Mat m(L, std::vector<double>(L, 0.0));
    for (int j = 0; j < L; ++j) m[j][j] = 1.0;
    for (auto [i, j] : pairs) {
        require(i >= 1 && i <= L && j >= 1 && j <= L && i != j,
                "sparse_transition: pair labels must be distinct and in [1..L]");
        require(!used[i - 1] && !used[j - 1],
                "sparse_transition: class appears in more than one pair");
        used[i - 1] = used[j - 1] = true;
        m[i - 1][i - 1] = m[j - 1][j - 1] = 1.0 - rate;
        m[i - 1][j - 1] = m[j - 1][i - 1] = rate;
    }
    return TransitionMatrix(std::move(m));
}

// The five confusable pairs used with L = 10 sweeps.
inline std::vector<std::pair<int, int>> default_sparse_pairs() {
    return {{1, 3}, {2, 10}, {4, 6}, {5, 8}, {7, 9}};
}

// Reported channel = channel * t (right-multiplication).
inline ConfusionChannel apply_transition(const ConfusionChannel& channel,
                                         const TransitionMatrix& t) {
    const int L = channel.num_classes();
    require(t.num_classes() == L, "apply_transition: transition dimension mismatch");
    Mat out(L, std::vector<double>(L, 0.0));
    for (int j = 0; j < L; ++j)
        for (int r = 0; r < L; ++r)
            for (int k = 0; k < L; ++k)
                out[j][k] += channel.rows[j][r] * t.rows[r][k];
    return ConfusionChannel(std::move(out));
}

inline TransitionMatrix compose(const TransitionMatrix& t1,
                                const TransitionMatrix& t2) {
    const int L = t1.num_classes();
    require(t2.num_classes() == L, "compose: transition dimension mismatch");
    Mat out(L, std::vector<double>(L, 0.0));
    for (int j = 0; j < L; ++j)
        for (int r = 0; r < L; ++r)
            for (int k = 0; k < L; ++k)
                out[j][k] += t1.rows[j][r] * t2.rows[r][k];
    return TransitionMatrix(std::move(out));
}

// Proportion of misreported labels: sum_j marginal[j] (1 - t[j][j]).
inline double misreport_rate(const TransitionMatrix& t, const Prior& marginal) {
    require(t.num_classes() == marginal.num_classes(),
            "misreport_rate: dimension mismatch");
    double r = 0.0;
    for (int j = 0; j < t.num_classes(); ++j)
        r += marginal.probs[j] * (1.0 - t.rows[j][j]);
    return r;
}

// ---------------------------------------------------------------------------
// JSON serialization: row-major arrays of arrays plus a "num_classes" field.

inline nlohmann::json matrix_to_json(const Mat& m) {
    nlohmann::json j;
    j["num_classes"] = m.size();
    j["rows"] = m;
    return j;
}

inline Mat matrix_from_json(const nlohmann::json& j) {
    Mat m = j.at("rows").get<Mat>();
    require(j.at("num_classes").get<std::size_t>() == m.size(),
            "matrix_from_json: num_classes disagrees with row count");
    return m;
}

inline std::string pretty_matrix(const Mat& m, int precision = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision);
    for (const auto& row : m) {
        for (std::size_t l = 0; l < row.size(); ++l)
            os << (l ? " " : "") << std::setw(precision + 4) << row[l];
        os << '\n';
    }
    return os.str();
}

}  // namespace elicit
