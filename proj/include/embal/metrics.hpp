#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "embal/embedding_store.hpp"

namespace embal {

/// Entry (i, j) counts instances of true class i predicted as j.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t class_count);

    std::size_t class_count() const { return classes_; }
    std::uint64_t at(ClassId truth, ClassId predicted) const { return counts_[truth * classes_ + predicted]; }
    void add(ClassId truth, ClassId predicted) { ++counts_[truth * classes_ + predicted]; }

    std::uint64_t total() const;
    std::uint64_t support(ClassId c) const;
    std::uint64_t predicted_count(ClassId c) const;

    /// tp / support per class; throws DataError if a class has no support.
    std::vector<double> recalls() const;

private:
    std::size_t classes_;
    std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const ClassId> labels, std::span<const ClassId> predictions,
                          std::size_t class_count);

/// Mean per-class recall.
double bac(const ConfusionMatrix& m);

/// (prod of per-class recalls)^(1/C); exactly 0 if any recall is 0.
double gm(const ConfusionMatrix& m);

struct MacroF1 {
    double value = 0.0;
    std::vector<ClassId> skipped;  // classes with neither support nor predictions
};

MacroF1 macro_f1(const ConfusionMatrix& m);

/// BAC/GM/FM bundle as it appears in reports.
struct MetricSet {
    double bac = 0.0;
    double gm = 0.0;
    double fm = 0.0;
    std::vector<ClassId> zero_recall_classes;
    std::vector<ClassId> f1_skipped;
};

MetricSet evaluate(const ConfusionMatrix& m);

} // namespace embal
