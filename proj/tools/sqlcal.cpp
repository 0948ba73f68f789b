// sqlcal: calibrate text-to-SQL confidence scores from candidate pools.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "sqlcal/errors.hpp"
#include "sqlcal/pipeline/commands.hpp"

namespace {

using namespace sqlcal;
using namespace sqlcal::pipeline;

struct Args {
    std::string input, output, input_b, model, sql;
    std::string schema = "mps-nb";
    std::string scope = "union";
    std::string method = "mps";
    double penalty = 1.0;
    std::vector<std::string> mask;
    int bins = metrics::kDefaultBins;
    std::string group_by;
    std::vector<double> fractions = kDefaultFractions;
    double subsample_fraction = 0.0;
    std::size_t subsample_count = 0;
    std::uint64_t seed = 0;
    bool temperature = false;
    std::size_t pool_size = 0;
    unsigned threads = 0;
    std::string mode = "calibrated";
    std::size_t n = 1000;
};

void print_metrics(const metrics::MetricsReport& r) {
    std::printf("%-10s n=%-7zu brier=%.4f ece=%.4f ace=%.4f auc=%s\n", r.group ? r.group->c_str() : "overall", r.n,
                r.brier, r.ece, r.ace, r.auc ? std::to_string(*r.auc).c_str() : "n/a");
}

int run(CLI::App& app, Args& a) {
    if (app.got_subcommand("parse")) {
        std::string text = a.sql;
        if (text.empty()) {
            if (a.input.empty() || a.input == "-") {
                text.assign(std::istreambuf_iterator<char>(std::cin), {});
            } else {
                std::ifstream in(a.input);
                if (!in) throw IoError("cannot open '" + a.input + "'");
                text.assign(std::istreambuf_iterator<char>(in), {});
            }
        }
        std::cout << parse_command(text).dump(2) << '\n';
        return 0;
    }
    if (app.got_subcommand("featurize")) {
        FeaturizeOptions o;
        o.input = a.input;
        o.output = a.output;
        o.schema = a.schema;
        o.scope = a.scope;
        o.pool_size = a.pool_size;
        o.threads = a.threads;
        const auto s = featurize_command(o);
        for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
        for (const auto& f : s.failures)
            std::cerr << "line " << f.line << (f.id.empty() ? "" : " (" + f.id + ")") << ": " << f.error << '\n';
        std::printf("records=%zu used=%zu unusable=%zu failed=%zu candidates=%zu unparseable=%zu\n", s.lines, s.used,
                    s.unusable, s.failed, s.candidates, s.unparseable_candidates);
        return 0;
    }
    if (app.got_subcommand("fit")) {
        FitCommandOptions o;
        o.input = a.input;
        o.output = a.output;
        o.method = a.method;
        o.penalty = a.penalty;
        o.mask = a.mask;
        o.seed = a.seed;
        o.temperature = a.temperature;
        if (app.get_subcommand("fit")->count("--subsample-fraction")) o.subsample_fraction = a.subsample_fraction;
        if (app.get_subcommand("fit")->count("--subsample-count")) o.subsample_count = a.subsample_count;
        const auto model = fit_command(o);
        for (const auto& w : model.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
        std::printf("fitted on %s: %d iterations, |grad|=%.3g\n", a.input.c_str(), model.diagnostics.iterations,
                    model.diagnostics.gradient_inf_norm);
        std::cout << weight_table(model);
        return 0;
    }
    if (app.got_subcommand("evaluate")) {
        EvaluateOptions o;
        o.input = a.input;
        o.output = a.output;
        o.bins = a.bins;
        if (!a.model.empty()) o.model = a.model;
        if (!a.group_by.empty()) o.group_by = a.group_by;
        const auto res = evaluate_command(o);
        print_metrics(res.overall);
        for (const auto& g : res.groups) print_metrics(g);
        return 0;
    }
    if (app.got_subcommand("apply")) {
        const auto scored = apply_command(a.input, a.model, a.output);
        std::printf("scored %zu records\n", scored.size());
        return 0;
    }
    if (app.got_subcommand("compare")) {
        const auto res = compare_command(a.input, a.input_b, a.output, a.fractions);
        std::printf("%-7s %-9s %-6s %-11s %s\n", "side", "fraction", "count", "mean_delta", "accuracy");
        for (const auto& s : res.strata)
            std::printf("%-7s %-9.2f %-6zu %+-11.4f %.4f\n", s.side.c_str(), s.fraction, s.count, s.mean_delta,
                        s.accuracy);
        return 0;
    }
    if (app.got_subcommand("synth")) {
        SynthOptions o;
        o.mode = a.mode;
        o.n = a.n;
        o.seed = a.seed;
        o.output = a.output;
        synth_command(o);
        return 0;
    }
    throw UsageError("no subcommand given");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence calibration for text-to-SQL candidate pools"};
    app.set_config("--config", "", "TOML config file; command-line flags take precedence");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(sqlcal::kToolkitVersion));
    Args a;

    auto* parse = app.add_subcommand("parse", "Parse SQL and print its canonical form and clause decomposition");
    parse->add_option("--sql", a.sql, "SQL text");
    parse->add_option("--input", a.input, "File holding one SQL query ('-' for stdin)");

    auto* feat = app.add_subcommand("featurize", "Build feature vectors from candidate pools");
    feat->add_option("--input", a.input, "Candidate JSONL")->required();
    feat->add_option("--output", a.output, "Feature JSONL")->required();
    feat->add_option("--schema", a.schema, "ps | mps-nucleus | mps-beam | mps-nb, optionally +extra suffixes")
        ->capture_default_str();
    feat->add_option("--scope", a.scope, "Primary selection scope: nucleus | beam | union")->capture_default_str();
    feat->add_option("--pool-size", a.pool_size, "Keep only the first k samples per source (0 = all)");
    feat->add_option("--threads", a.threads, "Worker threads (0 = all cores)");

    auto* fit = app.add_subcommand("fit", "Fit a calibrator on a calibration split");
    fit->add_option("--input", a.input, "Feature JSONL")->required();
    fit->add_option("--output", a.output, "Model JSON")->required();
    fit->add_option("--method", a.method, "ps | mps")->check(CLI::IsMember({"ps", "mps"}))->capture_default_str();
    fit->add_option("--penalty", a.penalty, "Inverse L2 penalty strength C (larger = weaker penalty)")->check(CLI::PositiveNumber)->capture_default_str();
    fit->add_option("--mask", a.mask, "Feature selectors; '*' wildcards, '!' excludes")->delimiter(',');
    fit->add_option("--subsample-fraction", a.subsample_fraction, "Fit on this fraction of the records")
        ->check(CLI::Range(0.0, 1.0));
    fit->add_option("--subsample-count", a.subsample_count, "Fit on this many records");
    fit->add_option("--seed", a.seed, "Subsampling seed")->capture_default_str();
    fit->add_flag("--temperature", a.temperature, "Temperature scaling (ps without intercept)");

    auto* eval = app.add_subcommand("evaluate", "Score features and write calibration metrics");
    eval->add_option("--input", a.input, "Feature JSONL")->required();
    eval->add_option("--model", a.model, "Model JSON; omit to evaluate raw probabilities");
    eval->add_option("--output", a.output, "Report directory")->required();
    eval->add_option("--bins", a.bins, "Number of bins")->check(CLI::PositiveNumber)->capture_default_str();
    eval->add_option("--group-by", a.group_by, "Record field to group by (group)");

    auto* apply = app.add_subcommand("apply", "Score features with a model, writing scored JSONL only");
    apply->add_option("--input", a.input, "Feature JSONL")->required();
    apply->add_option("--model", a.model, "Model JSON")->required();
    apply->add_option("--output", a.output, "Scored JSONL")->required();

    auto* cmp = app.add_subcommand("compare", "Compare two scored files on their largest probability shifts");
    cmp->add_option("--input", a.input, "Baseline scored JSONL")->required();
    cmp->add_option("--input-b", a.input_b, "Candidate scored JSONL")->required();
    cmp->add_option("--output", a.output, "Shift report JSON")->required();
    cmp->add_option("--fractions", a.fractions, "Stratum fractions")->delimiter(',');

    auto* syn = app.add_subcommand("synth", "Generate synthetic data with known ground truth");
    syn->add_option("--mode", a.mode, "calibrated | platt | mps-signal | candidates")
        ->check(CLI::IsMember({"calibrated", "platt", "mps-signal", "candidates"}))
        ->capture_default_str();
    syn->add_option("--n", a.n, "Number of records")->check(CLI::PositiveNumber)->capture_default_str();
    syn->add_option("--seed", a.seed, "Seed")->capture_default_str();
    syn->add_option("--output", a.output, "Output JSONL")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        return run(app, a);
    } catch (const sqlcal::UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const sqlcal::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
