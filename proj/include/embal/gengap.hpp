#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "embal/embedding_store.hpp"

namespace embal {

/**
 * Per-class, per-feature (min, max) envelopes. A class with no rows is marked
 * absent and carries no envelope.
 */
class FeatureRanges {
public:
    FeatureRanges(std::size_t class_count, std::size_t dim);

    /// Widen class c's envelope to include `row`.
    void include(ClassId c, std::span<const double> row);

    std::size_t class_count() const { return present_.size(); }
    std::size_t dim() const { return dim_; }
    bool present(ClassId c) const { return present_[c]; }
    double min(ClassId c, std::size_t f) const { return mins_[c * dim_ + f]; }
    double max(ClassId c, std::size_t f) const { return maxs_[c * dim_ + f]; }

private:
    std::size_t dim_;
    std::vector<bool> present_;
    std::vector<double> mins_;
    std::vector<double> maxs_;
};

/// Generalization gap per class; skipped classes hold 0 and are listed.
struct GapReport {
    std::vector<double> per_class_gap;
    double overall_gap = 0.0;
    std::vector<ClassId> classes_skipped;
};

struct OutcomeGaps {
    GapReport gap_tp;
    GapReport gap_fp;
};

FeatureRanges feature_ranges(const LabeledEmbeddingSet& set);

/**
 * For each class present on both sides, the mean over its 2d boundary terms
 * max(0, train_min - test_min) and max(0, test_max - train_max). Only test
 * extrema falling outside the train envelope contribute.
 */
GapReport generalization_gap(const FeatureRanges& train_ranges, const FeatureRanges& test_ranges);

/// Gaps of the true-positive and false-positive test rows of each predicted
/// class against that class's train envelope.
OutcomeGaps gap_by_outcome(const LabeledEmbeddingSet& train_set, const LabeledEmbeddingSet& test_set,
                           std::span<const ClassId> predictions);

/// Mean of per_class_gap over the given classes, ignoring skipped ones.
double mean_gap_over(const GapReport& report, std::span<const ClassId> classes);

} // namespace embal
