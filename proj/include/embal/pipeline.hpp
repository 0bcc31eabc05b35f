#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "embal/classifier_head.hpp"
#include "embal/embedding_store.hpp"
#include "embal/gengap.hpp"
#include "embal/metrics.hpp"
#include "embal/oversamplers.hpp"

namespace embal {

/**
 * Everything that determines an experiment's numbers. Sub-seeds for the
 * baseline head, the sampler, fine-tuning and the balanced-SVM model are all
 * derived from `seed`; the seed fields inside `oversample`, `train` and `svm`
 * are overwritten.
 */
struct ExperimentConfig {
    Method method = Method::none;
    OversampleConfig oversample;
    TrainConfig train;
    TrainConfig svm = default_svm_config(0);
    bool cold_start = false;  // re-initialize the head before fine-tuning
    Seed seed = 0;
};

struct PipelineConfig {
    std::filesystem::path train_path;
    std::filesystem::path test_path;
    std::filesystem::path report_path;   // empty: no files written
    std::optional<FileFormat> format;    // unset: by file extension
    ExperimentConfig experiment;
};

/// Measurements of one head.
struct HeadEvaluation {
    LinearHead head;
    std::vector<std::size_t> train_histogram;
    MetricSet train_metrics;
    MetricSet test_metrics;
    std::vector<double> weight_norms;
    GapReport gap;  // train-set envelope used for fitting vs test set
    OutcomeGaps gap_by_outcome;
};

struct Report {
    ExperimentConfig config;
    std::vector<std::size_t> test_histogram;
    HeadEvaluation baseline;
    std::optional<HeadEvaluation> resampled;  // absent for Method::none
    std::size_t synthetic_count = 0;
    std::size_t relabeled = 0;
    std::vector<ClassFallback> fallbacks;
    std::vector<std::string> phase_log;
    std::map<std::string, double> timings_ms;
    std::map<std::string, std::string> artifacts;
};

/// Seeds actually used by each phase.
struct PhaseSeeds {
    Seed baseline;
    Seed sampler;
    Seed fine_tune;
    Seed svm;
};
PhaseSeeds phase_seeds(Seed seed);

/**
 * The three-phase workflow on in-memory train embeddings: baseline head on the
 * imbalanced set, resampling, fine-tuning. `load_test` is invoked only once
 * training has finished.
 */
Report run_experiment(const LabeledEmbeddingSet& train, const std::function<LabeledEmbeddingSet()>& load_test,
                      const ExperimentConfig& config);

/// File-based run_experiment. When report_path is set, writes the report and
/// both heads next to it.
Report run_pipeline(const PipelineConfig& config);

/// One run per K with a shared base seed. All K are validated against the
/// train set size before any run starts.
std::vector<Report> sweep_k(const PipelineConfig& config, const std::vector<std::size_t>& k_list);

/// "K,BAC,GM,FM" table of the resampled head's test metrics, 4 decimals.
std::string sweep_csv(const std::vector<Report>& reports);

nlohmann::json to_json(const Report& report);

/// Generator parameters for a train/test pair of synthetic embedding files.
struct SynthConfig {
    std::size_t class_count = 10;
    std::size_t dim = 8;
    std::size_t n_max = 500;
    double rho = 100.0;
    std::size_t test_per_class = 100;
    double mean_radius = 1.85;
    double sigma = 0.5;
    Seed seed = 0;
};

struct SyntheticSplit {
    LabeledEmbeddingSet train;
    LabeledEmbeddingSet test;
};

/// Shared class means; exponentially imbalanced train split, balanced test split.
SyntheticSplit make_synthetic_split(const SynthConfig& config);

void generate_synthetic(const SynthConfig& config, const std::filesystem::path& train_path,
                        const std::filesystem::path& test_path, FileFormat format);

} // namespace embal
