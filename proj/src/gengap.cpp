#include "embal/gengap.hpp"

#include <algorithm>
#include <limits>

#include "embal/errors.hpp"

namespace embal {

FeatureRanges::FeatureRanges(std::size_t class_count, std::size_t dim)
    : dim_(dim),
      present_(class_count, false),
      mins_(class_count * dim, std::numeric_limits<double>::infinity()),
      maxs_(class_count * dim, -std::numeric_limits<double>::infinity()) {}

void FeatureRanges::include(ClassId c, std::span<const double> row) {
    present_[c] = true;
    for (std::size_t f = 0; f < dim_; ++f) {
        mins_[c * dim_ + f] = std::min(mins_[c * dim_ + f], row[f]);
        maxs_[c * dim_ + f] = std::max(maxs_[c * dim_ + f], row[f]);
    }
}

FeatureRanges feature_ranges(const LabeledEmbeddingSet& set) {
    if (set.size() == 0) throw DataError("feature ranges of an empty set");
    FeatureRanges ranges(set.class_count(), set.dim());
    for (std::size_t i = 0; i < set.size(); ++i) ranges.include(set.label(i), set.row(i));
    return ranges;
}

GapReport generalization_gap(const FeatureRanges& train_ranges, const FeatureRanges& test_ranges) {
    if (train_ranges.class_count() != test_ranges.class_count() || train_ranges.dim() != test_ranges.dim()) {
        throw DataError("train and test ranges differ in class count or dimension");
    }
    const std::size_t dim = train_ranges.dim();
    GapReport report;
    report.per_class_gap.assign(train_ranges.class_count(), 0.0);

    double total = 0.0;
    std::size_t counted = 0;
    for (ClassId c = 0; c < train_ranges.class_count(); ++c) {
        if (!train_ranges.present(c) || !test_ranges.present(c)) {
            report.classes_skipped.push_back(c);
            continue;
        }
        double sum = 0.0;
        for (std::size_t f = 0; f < dim; ++f) {
            sum += std::max(0.0, train_ranges.min(c, f) - test_ranges.min(c, f));
            sum += std::max(0.0, test_ranges.max(c, f) - train_ranges.max(c, f));
        }
        report.per_class_gap[c] = sum / static_cast<double>(2 * dim);
        total += report.per_class_gap[c];
        ++counted;
    }
    report.overall_gap = counted == 0 ? 0.0 : total / static_cast<double>(counted);
    return report;
}

OutcomeGaps gap_by_outcome(const LabeledEmbeddingSet& train_set, const LabeledEmbeddingSet& test_set,
                           std::span<const ClassId> predictions) {
    if (predictions.size() != test_set.size()) {
        throw DataError("predictions length " + std::to_string(predictions.size()) + " does not match test size " +
                        std::to_string(test_set.size()));
    }
    if (train_set.dim() != test_set.dim() || train_set.class_count() != test_set.class_count()) {
        throw DataError("train and test sets differ in class count or dimension");
    }
    const auto train = feature_ranges(train_set);
    FeatureRanges tp(test_set.class_count(), test_set.dim());
    FeatureRanges fp(test_set.class_count(), test_set.dim());
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        const ClassId predicted = predictions[i];
        if (predicted >= test_set.class_count()) throw DataError("prediction out of range at row " + std::to_string(i));
        (predicted == test_set.label(i) ? tp : fp).include(predicted, test_set.row(i));
    }
    return {generalization_gap(train, tp), generalization_gap(train, fp)};
}

double mean_gap_over(const GapReport& report, std::span<const ClassId> classes) {
    double total = 0.0;
    std::size_t counted = 0;
    for (ClassId c : classes) {
        if (std::find(report.classes_skipped.begin(), report.classes_skipped.end(), c) !=
            report.classes_skipped.end()) {
            continue;
        }
        total += report.per_class_gap.at(c);
        ++counted;
    }
    return counted == 0 ? 0.0 : total / static_cast<double>(counted);
}

} // namespace embal
