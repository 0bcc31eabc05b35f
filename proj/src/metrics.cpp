#include "embal/metrics.hpp"

#include <cmath>
#include <numeric>

#include "embal/errors.hpp"

namespace embal {

ConfusionMatrix::ConfusionMatrix(std::size_t class_count)
    : classes_(class_count), counts_(class_count * class_count, 0) {}

std::uint64_t ConfusionMatrix::total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::support(ClassId c) const {
    std::uint64_t s = 0;
    for (std::size_t j = 0; j < classes_; ++j) s += counts_[c * classes_ + j];
    return s;
}

std::uint64_t ConfusionMatrix::predicted_count(ClassId c) const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < classes_; ++i) s += counts_[i * classes_ + c];
    return s;
}

std::vector<double> ConfusionMatrix::recalls() const {
    std::vector<double> out(classes_);
    for (ClassId c = 0; c < classes_; ++c) {
        const auto s = support(c);
        if (s == 0) throw DataError("class " + std::to_string(c) + " has zero support; recall undefined");
        out[c] = static_cast<double>(at(c, c)) / static_cast<double>(s);
    }
    return out;
}

ConfusionMatrix confusion(std::span<const ClassId> labels, std::span<const ClassId> predictions,
                          std::size_t class_count) {
    if (labels.size() != predictions.size()) throw DataError("labels and predictions differ in length");
    ConfusionMatrix m(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= class_count || predictions[i] >= class_count) {
            throw DataError("label out of range at position " + std::to_string(i));
        }
        m.add(labels[i], predictions[i]);
    }
    return m;
}

double bac(const ConfusionMatrix& m) {
    const auto r = m.recalls();
    return std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
}

double gm(const ConfusionMatrix& m) {
    const auto r = m.recalls();
    double log_sum = 0.0;
    for (double v : r) {
        if (v == 0.0) return 0.0;
        log_sum += std::log(v);
    }
    return std::exp(log_sum / static_cast<double>(r.size()));
}

MacroF1 macro_f1(const ConfusionMatrix& m) {
    MacroF1 out;
    double total = 0.0;
    std::size_t counted = 0;
    for (ClassId c = 0; c < m.class_count(); ++c) {
        const auto tp = static_cast<double>(m.at(c, c));
        const auto support = m.support(c);
        const auto predicted = m.predicted_count(c);
        if (support == 0 && predicted == 0) {
            out.skipped.push_back(c);
            continue;
        }
        const double precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
        const double recall = support == 0 ? 0.0 : tp / static_cast<double>(support);
        total += precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        ++counted;
    }
    out.value = counted == 0 ? 0.0 : total / static_cast<double>(counted);
    return out;
}

MetricSet evaluate(const ConfusionMatrix& m) {
    MetricSet out;
    out.bac = bac(m);
    out.gm = gm(m);
    auto f1 = macro_f1(m);
    out.fm = f1.value;
    out.f1_skipped = std::move(f1.skipped);
    const auto r = m.recalls();
    for (ClassId c = 0; c < r.size(); ++c) {
        if (r[c] == 0.0) out.zero_recall_classes.push_back(c);
    }
    return out;
}

} // namespace embal
