#include "embal/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "embal/errors.hpp"
#include "embal/serialization.hpp"

namespace embal {

using nlohmann::json;

PhaseSeeds phase_seeds(Seed seed) {
    return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3), derive_seed(seed, 4)};
}

namespace {

class PhaseTimer {
public:
    PhaseTimer(Report& report, std::string phase)
        : report_(report), phase_(std::move(phase)), start_(std::chrono::steady_clock::now()) {
        report_.phase_log.push_back(phase_);
    }
    ~PhaseTimer() {
        const auto elapsed = std::chrono::steady_clock::now() - start_;
        report_.timings_ms[phase_] = std::chrono::duration<double, std::milli>(elapsed).count();
    }
    PhaseTimer(const PhaseTimer&) = delete;
    PhaseTimer& operator=(const PhaseTimer&) = delete;

private:
    Report& report_;
    std::string phase_;
    std::chrono::steady_clock::time_point start_;
};

MetricSet metrics_of(const LinearHead& head, const LabeledEmbeddingSet& set) {
    const auto predicted = predict(head, set.features()).labels;
    return evaluate(confusion(set.labels(), predicted, set.class_count()));
}

HeadEvaluation evaluate_head(LinearHead head, const LabeledEmbeddingSet& fit_set,
                             const LabeledEmbeddingSet& original_train, const LabeledEmbeddingSet& test) {
    HeadEvaluation out;
    out.train_histogram = fit_set.histogram();
    out.train_metrics = metrics_of(head, original_train);
    out.test_metrics = metrics_of(head, test);
    out.weight_norms = weight_norms(head);
    out.gap = generalization_gap(feature_ranges(fit_set), feature_ranges(test));
    out.gap_by_outcome = gap_by_outcome(fit_set, test, predict(head, test.features()).labels);
    out.head = std::move(head);
    return out;
}

template <typename Fn>
auto in_phase(const char* phase, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(phase) + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(phase) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(phase) + ": " + e.what());
    }
}

} // namespace

Report run_experiment(const LabeledEmbeddingSet& train, const std::function<LabeledEmbeddingSet()>& load_test,
                      const ExperimentConfig& config) {
    Report report;
    report.config = config;
    const auto seeds = phase_seeds(config.seed);
    report.config.train.seed = seeds.baseline;
    report.config.oversample.seed = seeds.sampler;
    report.config.svm.seed = seeds.svm;

    LinearHead baseline_head;
    {
        PhaseTimer t(report, "baseline_train");
        baseline_head = in_phase("baseline_train", [&] { return train_head(train, report.config.train); });
    }

    std::optional<ResampleResult> resampled;
    std::optional<LinearHead> tuned_head;
    if (config.method != Method::none) {
        {
            PhaseTimer t(report, "resample");
            resampled = in_phase("resample", [&] {
                return resample(config.method, train, report.config.oversample, report.config.svm);
            });
        }
        PhaseTimer t(report, "fine_tune");
        TrainConfig tune = report.config.train;
        tune.seed = seeds.fine_tune;
        tuned_head = in_phase("fine_tune", [&] {
            const LinearHead start = config.cold_start
                ? init_head(train.class_count(), train.dim(), LossKind::softmax_ce, derive_seed(tune.seed, 0x1417))
                : baseline_head;
            return fine_tune(start, resampled->balanced, tune);
        });
    }

    std::optional<LabeledEmbeddingSet> test;
    {
        PhaseTimer t(report, "load_test");
        test.emplace(in_phase("load_test", load_test));
        if (test->dim() != train.dim() || test->class_count() != train.class_count()) {
            throw DataError("load_test: test set (d=" + std::to_string(test->dim()) + ", C=" +
                            std::to_string(test->class_count()) + ") does not match train set (d=" +
                            std::to_string(train.dim()) + ", C=" + std::to_string(train.class_count()) + ")");
        }
    }

    PhaseTimer t(report, "evaluate");
    report.test_histogram = test->histogram();
    in_phase("evaluate", [&] {
        report.baseline = evaluate_head(std::move(baseline_head), train, train, *test);
        if (resampled) {
            report.resampled = evaluate_head(std::move(*tuned_head), resampled->balanced, train, *test);
            report.synthetic_count = resampled->synthetic.size();
            report.relabeled = resampled->relabeled;
            report.fallbacks = resampled->fallbacks;
        }
        return 0;
    });
    return report;
}

Report run_pipeline(const PipelineConfig& config) {
    const auto format_of = [&](const std::filesystem::path& p) {
        return config.format.value_or(format_from_extension(p));
    };
    const auto train = in_phase("load_train", [&] { return load(config.train_path, format_of(config.train_path)); });
    auto report = run_experiment(
        train, [&] { return load(config.test_path, format_of(config.test_path)); }, config.experiment);

    if (!config.report_path.empty()) {
        const auto dir = config.report_path.parent_path();
        const auto stem = config.report_path.stem().string();
        const auto baseline_file = stem + ".baseline_head.json";
        save_head(report.baseline.head, dir / baseline_file);
        report.artifacts["baseline_head"] = baseline_file;
        if (report.resampled) {
            const auto head_file = stem + ".head.json";
            save_head(report.resampled->head, dir / head_file);
            report.artifacts["head"] = head_file;
        }
        report.artifacts["train"] = config.train_path.string();
        report.artifacts["test"] = config.test_path.string();
        write_json_file(to_json(report), config.report_path);
    }
    return report;
}

std::vector<Report> sweep_k(const PipelineConfig& config, const std::vector<std::size_t>& k_list) {
    if (k_list.empty()) throw ConfigError("sweep: empty K list");
    const auto format = config.format.value_or(format_from_extension(config.train_path));
    const auto train = in_phase("load_train", [&] { return load(config.train_path, format); });
    for (std::size_t k : k_list) {
        if (k < 1 || k + 1 > train.size()) {
            throw ConfigError("sweep: K=" + std::to_string(k) + " invalid for " + std::to_string(train.size()) +
                              " training rows");
        }
    }
    const auto test_format = config.format.value_or(format_from_extension(config.test_path));
    std::vector<Report> reports;
    for (std::size_t k : k_list) {
        ExperimentConfig experiment = config.experiment;
        experiment.oversample.k = k;
        reports.push_back(run_experiment(train, [&] { return load(config.test_path, test_format); }, experiment));
    }
    return reports;
}

std::string sweep_csv(const std::vector<Report>& reports) {
    std::ostringstream out;
    out << "K,BAC,GM,FM\n";
    char line[96];
    for (const auto& r : reports) {
        const auto& m = r.resampled ? r.resampled->test_metrics : r.baseline.test_metrics;
        std::snprintf(line, sizeof line, "%zu,%.4f,%.4f,%.4f\n", r.config.oversample.k, m.bac, m.gm, m.fm);
        out << line;
    }
    return out.str();
}

namespace {

json to_json(const HeadEvaluation& e) {
    return {{"train_histogram", e.train_histogram},
            {"train", to_json(e.train_metrics)},
            {"test", to_json(e.test_metrics)},
            {"weight_norms", [&] {
                 json a = json::array();
                 for (double v : e.weight_norms) a.push_back(round4(v));
                 return a;
             }()},
            {"gap", to_json(e.gap)},
            {"gap_by_outcome", {{"tp", to_json(e.gap_by_outcome.gap_tp)}, {"fp", to_json(e.gap_by_outcome.gap_fp)}}}};
}

json to_json(const TrainConfig& c) {
    return {{"epochs", c.epochs},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"weight_decay", c.weight_decay},
            {"seed", c.seed}};
}

} // namespace

json to_json(const Report& report) {
    const auto& c = report.config;
    json config = {{"method", to_string(c.method)},
                   {"seed", c.seed},
                   {"k", c.oversample.k},
                   {"eos_direction", to_string(c.oversample.eos_direction)},
                   {"sampler_seed", c.oversample.seed},
                   {"train", to_json(c.train)},
                   {"fine_tune_seed", phase_seeds(c.seed).fine_tune},
                   {"cold_start", c.cold_start}};
    if (c.method == Method::balanced_svm) config["svm"] = to_json(c.svm);
    if (c.oversample.target_counts) config["target_counts"] = *c.oversample.target_counts;

    json doc = {{"method", to_string(c.method)},
                {"config", std::move(config)},
                {"test_histogram", report.test_histogram},
                {"baseline", to_json(report.baseline)},
                {"phases", report.phase_log},
                {"timings_ms", report.timings_ms}};
    if (!report.artifacts.empty()) doc["artifacts"] = report.artifacts;
    if (report.resampled) {
        json fallbacks = json::array();
        for (const auto& f : report.fallbacks) fallbacks.push_back({{"class", f.class_id}, {"reason", f.reason}});
        doc["resampled"] = to_json(*report.resampled);
        doc["resampled"]["synthetic_count"] = report.synthetic_count;
        doc["resampled"]["relabeled"] = report.relabeled;
        doc["resampled"]["fallbacks"] = std::move(fallbacks);
    }
    return doc;
}

SyntheticSplit make_synthetic_split(const SynthConfig& config) {
    const auto profile = exponential_profile(config.class_count, config.n_max, config.rho);
    const auto means = sphere_means(config.class_count, config.dim, config.mean_radius, derive_seed(config.seed, 10));
    if (config.test_per_class < 1) throw ConfigError("test split needs at least one row per class");
    ImbalanceProfile balanced{std::vector<std::size_t>(config.class_count, config.test_per_class)};
    return {sample_mixture(means, profile, config.sigma, derive_seed(config.seed, 11)),
            sample_mixture(means, balanced, config.sigma, derive_seed(config.seed, 12))};
}

void generate_synthetic(const SynthConfig& config, const std::filesystem::path& train_path,
                        const std::filesystem::path& test_path, FileFormat format) {
    const auto split = make_synthetic_split(config);
    save(split.train, train_path, format);
    save(split.test, test_path, format);
}

} // namespace embal
