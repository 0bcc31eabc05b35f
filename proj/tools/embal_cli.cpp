// embal: embedding-space rebalancing toolkit.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "embal/errors.hpp"
#include "embal/gengap.hpp"
#include "embal/metrics.hpp"
#include "embal/oversamplers.hpp"
#include "embal/pipeline.hpp"
#include "embal/serialization.hpp"

namespace {

using namespace embal;

struct Options {
    std::string train;
    std::string test;
    std::string out;
    std::string report;
    std::string format;
    std::string method = "eos";
    std::string eos_direction = "toward-enemy";
    std::string provenance;
    std::string synthetic_out;
    std::string head;
    std::string init_head;
    std::string loss = "softmax_ce";
    std::string k_list = "5,10,20,50";
    std::string csv;
    std::size_t k = 10;
    std::size_t epochs = 10;
    double lr = 0.1;
    std::size_t batch_size = 128;
    double weight_decay = 2e-4;
    std::uint64_t seed = 0;
    bool cold_start = false;
    SynthConfig synth;
};

std::optional<FileFormat> chosen_format(const Options& o) {
    if (o.format.empty()) return std::nullopt;
    return parse_format(o.format);
}

FileFormat format_for(const Options& o, const std::string& path) {
    return chosen_format(o).value_or(format_from_extension(path));
}

TrainConfig train_config(const Options& o) {
    TrainConfig c;
    c.epochs = o.epochs;
    c.learning_rate = o.lr;
    c.batch_size = o.batch_size;
    c.weight_decay = o.weight_decay;
    c.seed = o.seed;
    c.validate();
    return c;
}

OversampleConfig oversample_config(const Options& o) {
    OversampleConfig c;
    c.k = o.k;
    c.seed = o.seed;
    c.eos_direction = parse_eos_direction(o.eos_direction);
    return c;
}

PipelineConfig pipeline_config(const Options& o) {
    PipelineConfig c;
    c.train_path = o.train;
    c.test_path = o.test;
    c.report_path = o.report;
    c.format = chosen_format(o);
    c.experiment.method = parse_method(o.method);
    c.experiment.oversample = oversample_config(o);
    c.experiment.train = train_config(o);
    c.experiment.cold_start = o.cold_start;
    c.experiment.seed = o.seed;
    return c;
}

void emit(const nlohmann::json& doc, const std::string& path) {
    if (path.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        write_json_file(doc, path);
    }
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size() || v < 1) throw std::invalid_argument(item);
            out.push_back(static_cast<std::size_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("invalid K list entry '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty K list");
    return out;
}

int cmd_synth(const Options& o) {
    generate_synthetic(o.synth, o.train, o.test, chosen_format(o).value_or(format_from_extension(o.train)));
    return 0;
}

int cmd_gap(const Options& o) {
    const auto train = load(o.train, format_for(o, o.train));
    const auto test = load(o.test, format_for(o, o.test));
    emit(to_json(generalization_gap(feature_ranges(train), feature_ranges(test))), o.report);
    return 0;
}

int cmd_resample(const Options& o) {
    const auto train = load(o.train, format_for(o, o.train));
    const auto method = parse_method(o.method);
    const auto result = resample(method, train, oversample_config(o), default_svm_config(o.seed));
    save(result.balanced, o.out, format_for(o, o.out));
    if (!o.synthetic_out.empty() && result.synthetic.size() > 0) {
        std::ofstream bin(o.synthetic_out, std::ios::binary | std::ios::trunc);
        if (!bin) throw DataError("cannot open " + o.synthetic_out);
        write_binary(result.synthetic.as_set(train.class_count()), bin);
    }
    if (!o.provenance.empty()) {
        std::ofstream csv(o.provenance, std::ios::trunc);
        if (!csv) throw DataError("cannot open " + o.provenance);
        write_provenance_csv(result.synthetic, csv);
    }
    nlohmann::json summary = {{"method", to_string(method)},
                              {"histogram_before", train.histogram()},
                              {"histogram_after", result.balanced.histogram()},
                              {"synthetic_count", result.synthetic.size()},
                              {"relabeled", result.relabeled}};
    nlohmann::json fallbacks = nlohmann::json::array();
    for (const auto& f : result.fallbacks) fallbacks.push_back({{"class", f.class_id}, {"reason", f.reason}});
    summary["fallbacks"] = std::move(fallbacks);
    emit(summary, o.report);
    return 0;
}

int cmd_train(const Options& o) {
    const auto train = load(o.train, format_for(o, o.train));
    const auto config = train_config(o);
    LinearHead head;
    if (!o.init_head.empty()) {
        head = fine_tune(load_head(o.init_head), train, config);
    } else if (parse_loss_kind(o.loss) == LossKind::hinge_ovr) {
        head = train_svm(train, config);
    } else {
        head = train_head(train, config);
    }
    save_head(head, o.out);
    return 0;
}

int cmd_eval(const Options& o) {
    const auto head = load_head(o.head);
    const auto test = load(o.test, format_for(o, o.test));
    const auto predicted = predict(head, test.features()).labels;
    nlohmann::json doc = {{"test", to_json(evaluate(confusion(test.labels(), predicted, test.class_count())))},
                          {"weight_norms", weight_norms(head)}};
    if (!o.train.empty()) {
        const auto train = load(o.train, format_for(o, o.train));
        const auto outcome = gap_by_outcome(train, test, predicted);
        doc["gap_by_outcome"] = {{"tp", to_json(outcome.gap_tp)}, {"fp", to_json(outcome.gap_fp)}};
    }
    emit(doc, o.report);
    return 0;
}

int cmd_pipeline(const Options& o) {
    const auto config = pipeline_config(o);
    const auto report = run_pipeline(config);
    if (o.report.empty()) std::cout << to_json(report).dump(2) << '\n';
    return 0;
}

int cmd_sweep(const Options& o) {
    auto config = pipeline_config(o);
    config.report_path.clear();
    const auto reports = sweep_k(config, parse_k_list(o.k_list));
    const auto table = sweep_csv(reports);
    if (o.csv.empty()) {
        std::cout << table;
    } else {
        std::ofstream out(o.csv, std::ios::trunc);
        if (!out) throw DataError("cannot open " + o.csv);
        out << table;
    }
    if (!o.report.empty()) {
        nlohmann::json all = nlohmann::json::array();
        for (const auto& r : reports) all.push_back(to_json(r));
        write_json_file(all, o.report);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rebalance imbalanced classification problems in embedding space"};
    app.require_subcommand(1);
    Options o;

    auto add_train_flags = [&](CLI::App* cmd) {
        cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
        cmd->add_option("--lr", o.lr, "SGD learning rate")->capture_default_str();
        cmd->add_option("--batch-size", o.batch_size, "Mini-batch size")->capture_default_str();
        cmd->add_option("--weight-decay", o.weight_decay, "L2 weight decay")->capture_default_str();
    };
    auto add_sampler_flags = [&](CLI::App* cmd) {
        cmd->add_option("--method", o.method, "none|smote|borderline_smote|balanced_svm|eos")->capture_default_str();
        cmd->add_option("--k", o.k, "Nearest neighbors")->capture_default_str();
        cmd->add_option("--eos-direction", o.eos_direction, "toward-enemy|away-from-enemy")->capture_default_str();
    };
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
        cmd->add_option("--format", o.format, "csv|bin (default: by extension)");
    };

    auto* synth = app.add_subcommand("synth", "Generate Gaussian-mixture train/test embedding files");
    synth->add_option("--train", o.train, "Train output path")->required();
    synth->add_option("--test", o.test, "Test output path")->required();
    synth->add_option("--classes", o.synth.class_count)->capture_default_str();
    synth->add_option("--dim", o.synth.dim)->capture_default_str();
    synth->add_option("--n-max", o.synth.n_max, "Majority class train count")->capture_default_str();
    synth->add_option("--rho", o.synth.rho, "Imbalance ratio")->capture_default_str();
    synth->add_option("--test-per-class", o.synth.test_per_class)->capture_default_str();
    synth->add_option("--radius", o.synth.mean_radius, "Class-mean sphere radius")->capture_default_str();
    synth->add_option("--sigma", o.synth.sigma, "Within-class deviation")->capture_default_str();
    add_common(synth);

    auto* gap = app.add_subcommand("gap", "Generalization gap between train and test embeddings");
    gap->add_option("--train", o.train)->required();
    gap->add_option("--test", o.test)->required();
    gap->add_option("--report", o.report, "JSON output (default stdout)");
    add_common(gap);

    auto* resample_cmd = app.add_subcommand("resample", "Balance a training set");
    resample_cmd->add_option("--train", o.train)->required();
    resample_cmd->add_option("--out", o.out, "Balanced set output")->required();
    resample_cmd->add_option("--synthetic-out", o.synthetic_out, "Synthetic rows, binary format");
    resample_cmd->add_option("--provenance", o.provenance, "Provenance CSV output");
    resample_cmd->add_option("--report", o.report, "Summary JSON (default stdout)");
    add_sampler_flags(resample_cmd);
    add_common(resample_cmd);

    auto* train = app.add_subcommand("train", "Train or fine-tune a linear head");
    train->add_option("--train", o.train)->required();
    train->add_option("--out", o.out, "Head JSON output")->required();
    train->add_option("--loss", o.loss, "softmax_ce|hinge_ovr")->capture_default_str();
    train->add_option("--init", o.init_head, "Warm-start from this head JSON");
    add_train_flags(train);
    add_common(train);

    auto* eval = app.add_subcommand("eval", "Evaluate a head on a test set");
    eval->add_option("--head", o.head)->required();
    eval->add_option("--test", o.test)->required();
    eval->add_option("--train", o.train, "Train set, enables TP/FP gap analysis");
    eval->add_option("--report", o.report, "JSON output (default stdout)");
    add_common(eval);

    auto* pipeline = app.add_subcommand("pipeline", "Baseline head, resample, fine-tune, evaluate");
    pipeline->add_option("--train", o.train)->required();
    pipeline->add_option("--test", o.test)->required();
    pipeline->add_option("--report", o.report, "Report JSON (default stdout)");
    pipeline->add_flag("--cold-start", o.cold_start, "Re-initialize the head before fine-tuning");
    add_sampler_flags(pipeline);
    add_train_flags(pipeline);
    add_common(pipeline);

    auto* sweep = app.add_subcommand("sweep", "Pipeline once per neighbor count");
    sweep->add_option("--train", o.train)->required();
    sweep->add_option("--test", o.test)->required();
    sweep->add_option("--k-list", o.k_list, "Comma-separated K values")->capture_default_str();
    sweep->add_option("--csv", o.csv, "K,BAC,GM,FM table (default stdout)");
    sweep->add_option("--report", o.report, "JSON array of reports");
    sweep->add_flag("--cold-start", o.cold_start);
    add_sampler_flags(sweep);
    add_train_flags(sweep);
    add_common(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) return cmd_synth(o);
        if (*gap) return cmd_gap(o);
        if (*resample_cmd) return cmd_resample(o);
        if (*train) return cmd_train(o);
        if (*eval) return cmd_eval(o);
        if (*pipeline) return cmd_pipeline(o);
        if (*sweep) return cmd_sweep(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
