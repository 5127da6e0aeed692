// elicit: correlated-agreement scoring toolkit.
//
// Subcommands:
//   sweep       misreport-rate sweep from a JSON config, CSV output
//   score       score a prediction CSV against a reference or truth labels
//   verify      brute-force truthfulness check for a channel pair
//   robustness  adversarial-fraction informativeness assessment
//   market      sequential market ledger over an ordered entry manifest
//   delta       print the delta and sign matrices for a channel pair
//
// Exit codes: 0 success, 2 configuration/validation error, 1 runtime error.
// The ELICIT_SEED environment variable overrides any configured seed.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "elicit/experiments.hpp"
#include "elicit/market.hpp"

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream is(path);
    elicit::require(is.good(), "cannot open: " + path);
    return json::parse(is);
}

// Channel files hold a matrix as {"num_classes": L, "rows": [[...]]}.
elicit::ConfusionChannel load_channel(const std::string& path) {
    return elicit::ConfusionChannel(elicit::matrix_from_json(load_json(path)));
}

// Prior files hold either a bare probability array or {"probs": [...]}.
elicit::Prior load_prior(const std::string& path) {
    json j = load_json(path);
    if (j.is_array()) return elicit::Prior(j.get<std::vector<double>>());
    return elicit::Prior(j.at("probs").get<std::vector<double>>());
}

elicit::SignMatrix load_sign(const std::string& spec, int L) {
    if (spec == "identity") return elicit::SignMatrix::identity(L);
    return elicit::SignMatrix(elicit::matrix_from_json(load_json(spec)));
}

elicit::RewardStructure parse_reward(const std::string& name, double ce_clip) {
    if (name == "zero-one" || name == "zero_one")
        return elicit::RewardStructure(elicit::RewardKind::zero_one);
    if (name == "ce" || name == "cross_entropy")
        return elicit::RewardStructure(elicit::RewardKind::cross_entropy, ce_clip);
    throw std::invalid_argument("unknown reward '" + name + "' (use zero-one or ce)");
}

std::uint64_t seed_override(std::uint64_t configured) {
    if (const char* env = std::getenv("ELICIT_SEED")) return std::stoull(env);
    return configured;
}

// ---------------------------------------------------------------------------

int cmd_sweep(const std::string& config_path, const std::string& out_path) {
    auto cfg = elicit::sweep_config_from_json(load_json(config_path));
    cfg.base_seed = seed_override(cfg.base_seed);
    auto series = elicit::run_sweep(cfg);
    elicit::emit_csv(series, out_path, cfg);
    std::cout << elicit::emit_summary(series);
    return 0;
}

int cmd_score(const std::string& reports_path, const std::string& reference_path,
              const std::string& truth_path, const std::string& sign_spec,
              const std::string& reward_name, double ce_clip, std::uint64_t seed) {
    auto reports = elicit::read_prediction_csv(reports_path);
    elicit::require(reference_path.empty() != truth_path.empty(),
                    "score: give exactly one of --reference and --truth");
    auto reference = truth_path.empty()
                         ? elicit::read_prediction_csv(reference_path)
                         : elicit::PredictionTable::from_hard_labels(
                               elicit::read_labels_csv(truth_path),
                               reports.num_classes());
    auto sign = load_sign(sign_spec, reports.num_classes());
    auto reward = parse_reward(reward_name, ce_clip);
    auto pairing = elicit::make_pairing(reports.num_tasks(), seed_override(seed));
    auto result = elicit::score_table(reports, reference, sign, reward, pairing);
    json out = result.summary_json();
    out["seed"] = pairing.seed;
    out["rng"] = elicit::Rng::kAlgorithm;
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_verify(const std::string& agent_path, const std::string& reference_spec,
               const std::string& prior_path, double sign_tolerance) {
    auto agent = load_channel(agent_path);
    auto prior = prior_path.empty() ? elicit::Prior::uniform(agent.num_classes())
                                    : load_prior(prior_path);
    auto joint = reference_spec == "truth"
                     ? elicit::joint_with_truth(prior, agent)
                     : elicit::joint_from_channels(prior, agent,
                                                   load_channel(reference_spec));
    auto sign = elicit::sign_of(elicit::compute_delta(joint), sign_tolerance);
    auto report = elicit::verify_truthfulness(joint, sign);
    std::cout << report.to_json().dump(2) << '\n';
    return 0;
}

int cmd_robustness(const std::string& honest_path, const std::string& adversary_path,
                   const std::string& bayes_opt_path, double gamma) {
    auto assessment = elicit::robustness_assess(gamma, load_channel(honest_path),
                                                load_channel(adversary_path),
                                                load_channel(bayes_opt_path));
    std::cout << assessment.to_json().dump(2) << '\n';
    return 0;
}

int cmd_market(const std::string& manifest_path, const std::string& truth_path,
               const std::string& survey_dir, const std::string& initial_path,
               const std::string& sign_spec, const std::string& reward_name,
               double ce_clip, double lambda, std::uint64_t seed,
               const std::string& out_path) {
    // manifest: one entry per line, "label,path" or a bare path
    std::ifstream mf(manifest_path);
    elicit::require(mf.good(), "cannot open: " + manifest_path);
    std::vector<elicit::PredictionTable> entries;
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(mf, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        std::string label = comma == std::string::npos
                                ? "entry" + std::to_string(entries.size() + 1)
                                : line.substr(0, comma);
        std::string path = comma == std::string::npos ? line : line.substr(comma + 1);
        entries.push_back(elicit::read_prediction_csv(path));
        labels.push_back(label);
    }
    elicit::require(!entries.empty(), "market: manifest lists no entries");
    const int L = entries.front().num_classes();
    const std::uint64_t s = seed_override(seed);

    elicit::require(truth_path.empty() != survey_dir.empty(),
                    "market: give exactly one of --truth and --survey-dir");
    elicit::CloserKind kind = truth_path.empty() ? elicit::CloserKind::survey
                                                 : elicit::CloserKind::ground_truth;
    std::optional<elicit::PredictionTable> closer;
    if (kind == elicit::CloserKind::ground_truth) {
        closer = elicit::PredictionTable::from_hard_labels(
            elicit::read_labels_csv(truth_path), L);
    } else {
        std::vector<std::string> files;
        for (const auto& e : std::filesystem::directory_iterator(survey_dir))
            if (e.path().extension() == ".csv") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        elicit::require(!files.empty(), "market: no survey CSVs in " + survey_dir);
        std::vector<elicit::PredictionTable> pool_tables;
        for (const auto& f : files) pool_tables.push_back(elicit::read_prediction_csv(f));
        elicit::SurveyPool pool(std::move(pool_tables), lambda);
        closer = elicit::survey_close(pool, elicit::detail::sub_seed(s, 1));
    }

    auto initial = elicit::read_prediction_csv(initial_path);
    auto sign = load_sign(sign_spec, L);
    auto reward = parse_reward(reward_name, ce_clip);
    auto pairing = elicit::make_pairing(initial.num_tasks(),
                                        elicit::detail::sub_seed(s, 2));
    auto ledger = elicit::run_market(entries, labels, *closer, sign, reward, pairing,
                                     initial, kind, lambda);

    std::ofstream os(out_path);
    elicit::require(os.good(), "cannot open for writing: " + out_path);
    os << "step,agent,score,payment\n";
    os.precision(17);
    for (std::size_t t = 0; t < ledger.steps.size(); ++t)
        os << (t + 1) << ',' << ledger.steps[t].agent_label << ','
           << ledger.steps[t].score_vs_closer << ',' << ledger.steps[t].payment << '\n';
    elicit::require(os.good(), "write failed: " + out_path);

    json budget = ledger.budget_json();
    budget["seed"] = s;
    budget["rng"] = elicit::Rng::kAlgorithm;
    std::cout << budget.dump(2) << '\n';
    return 0;
}

int cmd_delta(const std::string& agent_path, const std::string& reference_spec,
              const std::string& prior_path, double sign_tolerance) {
    auto agent = load_channel(agent_path);
    auto prior = prior_path.empty() ? elicit::Prior::uniform(agent.num_classes())
                                    : load_prior(prior_path);
    auto joint = reference_spec == "truth"
                     ? elicit::joint_with_truth(prior, agent)
                     : elicit::joint_from_channels(prior, agent,
                                                   load_channel(reference_spec));
    auto delta = elicit::compute_delta(joint);
    auto sign = elicit::sign_of(delta, sign_tolerance);
    json out = {{"delta", elicit::matrix_to_json(delta.cells)},
                {"sign", elicit::matrix_to_json(sign.cells)},
                {"is_identity", sign.is_identity()},
                {"is_anti_identity", sign.is_anti_identity()}};
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"correlated-agreement elicitation toolkit"};
    app.require_subcommand(1);

    // sweep
    std::string sweep_config, sweep_out;
    auto* sweep = app.add_subcommand("sweep", "run a misreport-rate sweep");
    sweep->add_option("--config", sweep_config, "sweep config JSON")->required();
    sweep->add_option("--out", sweep_out, "output CSV path")->required();

    // score
    std::string sc_reports, sc_reference, sc_truth, sc_sign = "identity";
    std::string sc_reward = "zero-one";
    double sc_clip = elicit::kDefaultCeClip;
    std::uint64_t sc_seed = 1;
    auto* score = app.add_subcommand("score", "score predictions against a reference");
    score->add_option("--reports", sc_reports, "prediction CSV to score")->required();
    score->add_option("--reference", sc_reference, "reference prediction CSV");
    score->add_option("--truth", sc_truth, "truth labels CSV");
    score->add_option("--sign", sc_sign, "sign matrix JSON or 'identity'");
    score->add_option("--reward", sc_reward, "zero-one or ce");
    score->add_option("--ce-clip", sc_clip, "CE probability floor");
    score->add_option("--seed", sc_seed, "pairing seed");

    // verify
    std::string vf_agent, vf_reference, vf_prior;
    double vf_tol = elicit::kDefaultSignTol;
    auto* verify = app.add_subcommand("verify", "brute-force truthfulness check");
    verify->add_option("--agent", vf_agent, "agent channel JSON")->required();
    verify->add_option("--reference", vf_reference, "reference channel JSON or 'truth'")
        ->required();
    verify->add_option("--prior", vf_prior, "prior JSON (default uniform)");
    verify->add_option("--sign-tolerance", vf_tol, "sign threshold");

    // robustness
    std::string rb_honest, rb_adversary, rb_opt;
    double rb_gamma = 0.0;
    auto* robustness = app.add_subcommand("robustness", "adversarial-fraction check");
    robustness->add_option("--honest", rb_honest, "honest channel JSON")->required();
    robustness->add_option("--adversary", rb_adversary, "adversary channel JSON")
        ->required();
    robustness->add_option("--bayes-opt", rb_opt, "Bayes-optimal channel JSON")
        ->required();
    robustness->add_option("--gamma", rb_gamma, "adversary fraction")->required();

    // market
    std::string mk_manifest, mk_truth, mk_survey, mk_initial, mk_out;
    std::string mk_sign = "identity", mk_reward = "zero-one";
    double mk_clip = elicit::kDefaultCeClip, mk_lambda = 1.0;
    std::uint64_t mk_seed = 1;
    auto* market = app.add_subcommand("market", "sequential market ledger");
    market->add_option("--manifest", mk_manifest, "ordered entry manifest")->required();
    market->add_option("--truth", mk_truth, "truth labels CSV closer");
    market->add_option("--survey-dir", mk_survey, "directory of survey CSVs");
    market->add_option("--initial", mk_initial, "initial hypothesis CSV")->required();
    market->add_option("--sign", mk_sign, "sign matrix JSON or 'identity'");
    market->add_option("--reward", mk_reward, "zero-one or ce");
    market->add_option("--ce-clip", mk_clip, "CE probability floor");
    market->add_option("--lambda", mk_lambda, "payment scale");
    market->add_option("--seed", mk_seed, "survey draw / pairing seed");
    market->add_option("--out", mk_out, "ledger CSV path")->required();

    // delta
    std::string dl_agent, dl_reference, dl_prior;
    double dl_tol = elicit::kDefaultSignTol;
    auto* delta = app.add_subcommand("delta", "print delta and sign matrices");
    delta->add_option("--agent", dl_agent, "agent channel JSON")->required();
    delta->add_option("--reference", dl_reference, "reference channel JSON or 'truth'")
        ->required();
    delta->add_option("--prior", dl_prior, "prior JSON (default uniform)");
    delta->add_option("--sign-tolerance", dl_tol, "sign threshold");

    try {
        app.parse(argc, argv);
        if (*sweep) return cmd_sweep(sweep_config, sweep_out);
        if (*score)
            return cmd_score(sc_reports, sc_reference, sc_truth, sc_sign, sc_reward,
                             sc_clip, sc_seed);
        if (*verify) return cmd_verify(vf_agent, vf_reference, vf_prior, vf_tol);
        if (*robustness) return cmd_robustness(rb_honest, rb_adversary, rb_opt, rb_gamma);
        if (*market)
            return cmd_market(mk_manifest, mk_truth, mk_survey, mk_initial, mk_sign,
                              mk_reward, mk_clip, mk_lambda, mk_seed, mk_out);
        if (*delta) return cmd_delta(dl_agent, dl_reference, dl_prior, dl_tol);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
