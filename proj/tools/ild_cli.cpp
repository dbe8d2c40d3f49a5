// ild: performance limits of categorical binary-classification datasets.
//
//   ild aggregate  --input data.csv --schema data.schema [--out buckets.csv] [--format csv|json]
//   ild limits     --input data.csv --schema data.schema [--out report.json] [--roc-out curve.csv]
//   ild roc        --input data.csv --schema data.schema [--out curve.csv] [--random-flip-curves K --seed S]
//   ild nb         --input data.csv --schema data.schema [--alpha A] [--train-fraction F] [--seed S]
//   ild experiment --input data.csv --schema data.schema [--trials N] [--seed S] [--out results.csv]
//
// Artifacts go to --out when given (written atomically), otherwise to stdout;
// summaries go to stdout, or to stderr when stdout carries the artifact.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ild/ild.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 2;

struct Common {
    std::string input;
    std::string schema;
    std::string out;
    std::string format;
    std::uint64_t seed = 0;
};

/// Writes `body` to `path` via a temporary file and rename, or to stdout when
/// `path` is empty.
void emit(const std::string& path, const std::string& body) {
    if (path.empty()) {
        std::cout << body << std::flush;
        return;
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ild::IoError("cannot open '" + path + "' for writing");
        out << body;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw ild::IoError("failed writing '" + path + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw ild::IoError("cannot move output into place at '" + path + "': " + ec.message());
    }
}

std::ostream& info(const Common& c) { return c.out.empty() ? std::cerr : std::cout; }

std::string fmt(double v) { return ild::csv::format_double(v); }

ild::ObservationTable load(const Common& c, const ild::FeatureSchema& schema) {
    if (!std::filesystem::exists(c.input)) throw ild::IoError("input file '" + c.input + "' does not exist");
    return ild::load_csv(c.input, schema);
}

void add_common(CLI::App* cmd, Common& c, bool with_format) {
    cmd->add_option("--input", c.input, "Input CSV (header row, comma separated)")->required();
    cmd->add_option("--schema", c.schema, "Schema file describing features and target")->required();
    cmd->add_option("--out", c.out, "Output file (default: stdout)");
    if (with_format) {
        cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    }
}

int cmd_aggregate(const Common& c, const std::string& encoded_out) {
    const auto schema = ild::FeatureSchema::from_file(c.schema);
    const auto table = load(c, schema);
    const auto data = ild::aggregate(table);

    std::ostringstream body;
    if (c.format == "json") {
        body << ild::buckets_to_json(data, &schema).dump(2) << '\n';
    } else {
        ild::write_buckets_csv(body, data, &schema);
    }
    if (!encoded_out.empty()) {
        std::ostringstream enc;
        ild::write_encoded_csv(enc, table, schema);
        emit(encoded_out, enc.str());
    }
    emit(c.out, body.str());

    const auto part = ild::classify_buckets(data);
    info(c) << "N_B=" << data.size() << " M=" << data.total() << " M0=" << data.total0() << " M1=" << data.total1()
            << " perfect_buckets=" << part.n_perfect() << '\n';
    return kExitOk;
}

int cmd_limits(const Common& c, const std::string& roc_out) {
    const auto schema = ild::FeatureSchema::from_file(c.schema);
    const auto data = ild::aggregate(load(c, schema));
    const auto report = ild::limit_report(data);
    if (!report.max_auc) {
        std::cerr << "warning: dataset has a single class; max_auc is undefined\n";
    }
    if (!roc_out.empty()) {
        if (report.max_auc) {
            std::ostringstream curve;
            ild::write_curve_csv(curve, ild::ild_curve(data));
            emit(roc_out, curve.str());
        } else {
            std::cerr << "warning: no ROC curve written for a single-class dataset\n";
        }
    }
    emit(c.out, report_to_json(report).dump(2) + "\n");
    info(c) << "max_auc=" << (report.max_auc ? fmt(*report.max_auc) : "undefined")
            << " max_accuracy=" << fmt(report.max_accuracy) << " min_accuracy=" << fmt(report.min_accuracy)
            << " perfection_index=" << fmt(report.perfection_index) << '\n';
    return kExitOk;
}

int cmd_roc(const Common& c, std::size_t random_curves) {
    const auto schema = ild::FeatureSchema::from_file(c.schema);
    const auto data = ild::aggregate(load(c, schema));
    const auto best = ild::ild_curve(data);
    std::vector<ild::RocCurve> randoms;
    for (std::size_t k = 0; k < random_curves; ++k) randoms.push_back(ild::roc_of_random_flips(data, c.seed + k));

    std::ostringstream body;
    if (c.format == "json") {
        nlohmann::ordered_json j;
        j["ild"] = ild::curve_to_json(best);
        auto arr = nlohmann::ordered_json::array();
        for (std::size_t k = 0; k < randoms.size(); ++k) {
            auto r = ild::curve_to_json(randoms[k]);
            r["seed"] = c.seed + k;
            arr.push_back(std::move(r));
        }
        j["random_flips"] = std::move(arr);
        body << j.dump(2) << '\n';
    } else if (randoms.empty()) {
        ild::write_curve_csv(body, best);
    } else {
        // Long format when several curves share the file.
        ild::csv::write_record(body, {"curve", "fpr", "tpr"});
        const auto rows = [&](const std::string& name, const ild::RocCurve& curve) {
            for (const auto& p : curve.points) ild::csv::write_record(body, {name, fmt(p.fpr), fmt(p.tpr)});
        };
        rows("ild", best);
        for (std::size_t k = 0; k < randoms.size(); ++k) rows("random_seed_" + std::to_string(c.seed + k), randoms[k]);
    }
    emit(c.out, body.str());
    info(c) << "ild_auc=" << fmt(best.auc);
    for (std::size_t k = 0; k < randoms.size(); ++k) info(c) << " random_auc[" << c.seed + k << "]=" << fmt(randoms[k].auc);
    info(c) << '\n';
    return kExitOk;
}

int cmd_nb(const Common& c, double alpha, double train_fraction, const std::string& roc_out) {
    const auto schema = ild::FeatureSchema::from_file(c.schema);
    const auto table = load(c, schema);
    const auto parts = ild::split(table, {train_fraction, c.seed, false});
    const auto model = ild::fit(parts.train, schema, alpha);
    const auto choice = ild::best_threshold(model, parts.train);

    std::string auc_text = "undefined";
    try {
        const auto curve = ild::nb_roc(model, parts.valid);
        auc_text = fmt(curve.auc);
        if (!roc_out.empty()) {
            std::ostringstream os;
            ild::write_curve_csv(os, curve);
            emit(roc_out, os.str());
        }
    } catch (const ild::DegenerateClassError&) {
        std::cerr << "warning: validation split has a single class; NB AUC is undefined\n";
    }
    emit(c.out, ild::model_to_json(model).dump(2) + "\n");
    const double acc = parts.valid.empty() ? 0.0 : ild::accuracy_at_threshold(model, parts.valid, choice.threshold);
    info(c) << "train=" << parts.train.size() << " valid=" << parts.valid.size() << " nb_auc_valid=" << auc_text
            << " threshold=" << fmt(choice.threshold) << " train_accuracy=" << fmt(choice.accuracy)
            << " valid_accuracy=" << fmt(acc) << '\n';
    return kExitOk;
}

int cmd_experiment(const Common& c, std::size_t trials, double alpha, double train_fraction, bool stratified) {
    const auto schema = ild::FeatureSchema::from_file(c.schema);
    const auto table = load(c, schema);
    const auto full = ild::aggregate(table);
    const auto results = ild::run_trials(table, schema, trials, c.seed, {train_fraction, alpha, stratified});

    std::ostringstream body;
    ild::write_trials_csv(body, results);
    emit(c.out, body.str());

    for (const auto& r : results) {
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
    }
    using Field = std::function<const std::optional<double>&(const ild::TrialResult&)>;
    const std::pair<const char*, Field> fields[] = {
        {"auc_ild", [](const ild::TrialResult& r) -> const std::optional<double>& { return r.auc_ild; }},
        {"auc_nb", [](const ild::TrialResult& r) -> const std::optional<double>& { return r.auc_nb; }},
        {"auc_diff", [](const ild::TrialResult& r) -> const std::optional<double>& { return r.auc_diff; }},
        {"acc_ild", [](const ild::TrialResult& r) -> const std::optional<double>& { return r.acc_ild; }},
        {"acc_nb", [](const ild::TrialResult& r) -> const std::optional<double>& { return r.acc_nb; }},
    };
    auto& os = info(c);
    os << "trials=" << results.size() << " full_dataset_buckets=" << full.size() << '\n';
    for (const auto& [name, field] : fields) {
        const auto s = ild::summarize(results, field);
        os << name << ": n=" << s.n << " mean=" << fmt(s.mean) << " min=" << fmt(s.min) << " max=" << fmt(s.max) << '\n';
    }
    std::size_t positive = 0;
    for (const auto& r : results) positive += r.auc_diff && *r.auc_diff > 0 ? 1 : 0;
    os << "auc_diff_positive=" << positive << '/' << results.size() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-independent performance limits for categorical binary classification"};
    app.require_subcommand(1);

    Common agg, lim, roc, nb, exp;
    std::string encoded_out, lim_roc_out, nb_roc_out;
    std::size_t random_curves = 0;
    std::size_t trials = 100;
    double nb_alpha = ild::kDefaultAlpha, exp_alpha = ild::kDefaultAlpha;
    double nb_fraction = 0.8, exp_fraction = 0.8;
    bool stratified = false;

    auto* a = app.add_subcommand("aggregate", "Aggregate observations into feature buckets");
    add_common(a, agg, true);
    a->add_option("--encoded-out", encoded_out, "Also dump the encoded observation table as CSV");

    auto* l = app.add_subcommand("limits", "Max AUC, max/min accuracy and perfection index");
    add_common(l, lim, false);
    l->add_option("--roc-out", lim_roc_out, "Also write the optimal ROC curve as CSV");

    auto* r = app.add_subcommand("roc", "Optimal ROC curve, optionally with random-flip curves");
    add_common(r, roc, true);
    r->add_option("--seed", roc.seed, "Seed of the first random-flip curve");
    r->add_option("--random-flip-curves", random_curves, "Number of random-flip curves to add");

    auto* n = app.add_subcommand("nb", "Fit and evaluate the Naive Bayes baseline on one split");
    add_common(n, nb, false);
    n->add_option("--seed", nb.seed, "Split seed");
    n->add_option("--alpha", nb_alpha, "Additive smoothing pseudo-count")->check(CLI::NonNegativeNumber);
    n->add_option("--train-fraction", nb_fraction, "Training share of the rows")->check(CLI::Range(0.0, 1.0));
    n->add_option("--roc-out", nb_roc_out, "Also write the validation ROC curve as CSV");

    auto* e = app.add_subcommand("experiment", "Repeated train/validation comparison");
    add_common(e, exp, false);
    e->add_option("--seed", exp.seed, "Seed of the first trial; trial i uses seed+i");
    e->add_option("--trials", trials, "Number of splits")->check(CLI::PositiveNumber);
    e->add_option("--alpha", exp_alpha, "Naive Bayes smoothing pseudo-count")->check(CLI::NonNegativeNumber);
    e->add_option("--train-fraction", exp_fraction, "Training share of the rows")->check(CLI::Range(0.0, 1.0));
    e->add_flag("--stratified", stratified, "Split each class separately");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*a) return cmd_aggregate(agg, encoded_out);
        if (*l) return cmd_limits(lim, lim_roc_out);
        if (*r) return cmd_roc(roc, random_curves);
        if (*n) return cmd_nb(nb, nb_alpha, nb_fraction, nb_roc_out);
        if (*e) return cmd_experiment(exp, trials, exp_alpha, exp_fraction, stratified);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
