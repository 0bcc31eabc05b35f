#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "embal/classifier_head.hpp"
#include "embal/embedding_store.hpp"
#include "embal/random.hpp"

namespace embal {

enum class EosDirection { toward_enemy, away_from_enemy };

std::string to_string(EosDirection direction);
EosDirection parse_eos_direction(const std::string& name);

struct OversampleConfig {
    std::size_t k = 10;
    Seed seed = 0;
    EosDirection eos_direction = EosDirection::toward_enemy;
    /// Per-class targets. Unset: every class is raised to the majority count.
    std::optional<std::vector<std::size_t>> target_counts;
};

/// Where a synthetic row came from. toward: row = base + r*(neighbor - base);
/// otherwise row = base + r*(base - neighbor).
struct Provenance {
    std::size_t base_row = 0;
    std::size_t neighbor_row = 0;
    bool toward = true;
};

struct SyntheticBatch {
    std::size_t dim = 0;
    std::vector<double> features;  // m*d
    std::vector<ClassId> labels;
    std::vector<Provenance> provenance;
    std::vector<double> r_values;

    std::size_t size() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }

    LabeledEmbeddingSet as_set(std::size_t class_count) const;

    /// Recompute row i from its provenance against the source set.
    std::vector<double> reconstruct(std::size_t i, const LabeledEmbeddingSet& source) const;
};

/// A class that could not be sampled the normal way, and what was done instead.
struct ClassFallback {
    ClassId class_id = 0;
    std::string reason;
};

struct ResampleResult {
    LabeledEmbeddingSet balanced;  // source rows followed by synthetic rows
    SyntheticBatch synthetic;
    std::vector<ClassFallback> fallbacks;
    std::size_t relabeled = 0;  // balanced_svm only
};

/// Resolved per-class targets for `set`; ConfigError if a target is below the current count.
std::vector<std::size_t> resolve_targets(const LabeledEmbeddingSet& set, const OversampleConfig& config);

ResampleResult smote(const LabeledEmbeddingSet& set, const OversampleConfig& config);
ResampleResult borderline_smote(const LabeledEmbeddingSet& set, const OversampleConfig& config);
ResampleResult balanced_svm(const LabeledEmbeddingSet& set, const OversampleConfig& config,
                            const TrainConfig& svm_config);
ResampleResult eos(const LabeledEmbeddingSet& set, const OversampleConfig& config);

/// Replace each synthetic label with the head's prediction; returns how many changed.
std::size_t relabel_with(const LinearHead& head, SyntheticBatch& batch);

enum class Method { none, smote, borderline_smote, balanced_svm, eos };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Defaults for the SVM used by balanced_svm when no other configuration is given.
TrainConfig default_svm_config(Seed seed);

/// Dispatch on method; Method::none returns the set unchanged with an empty batch.
ResampleResult resample(Method method, const LabeledEmbeddingSet& set, const OversampleConfig& config,
                        const TrainConfig& svm_config);

} // namespace embal
