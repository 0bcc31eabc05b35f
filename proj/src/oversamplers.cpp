#include "embal/oversamplers.hpp"

#include <algorithm>
#include <cmath>

#include "embal/errors.hpp"
#include "embal/neighbors.hpp"

namespace embal {

std::string to_string(EosDirection direction) {
    return direction == EosDirection::toward_enemy ? "toward-enemy" : "away-from-enemy";
}

EosDirection parse_eos_direction(const std::string& name) {
    if (name == "toward-enemy" || name == "toward_enemy") return EosDirection::toward_enemy;
    if (name == "away-from-enemy" || name == "away_from_enemy") return EosDirection::away_from_enemy;
    throw ConfigError("unknown EOS direction '" + name + "' (expected toward-enemy or away-from-enemy)");
}

std::string to_string(Method method) {
    switch (method) {
    case Method::none: return "none";
    case Method::smote: return "smote";
    case Method::borderline_smote: return "borderline_smote";
    case Method::balanced_svm: return "balanced_svm";
    case Method::eos: return "eos";
    }
    return "none";
}

Method parse_method(const std::string& name) {
    if (name == "none") return Method::none;
    if (name == "smote") return Method::smote;
    if (name == "borderline_smote" || name == "borderline-smote") return Method::borderline_smote;
    if (name == "balanced_svm" || name == "balanced-svm") return Method::balanced_svm;
    if (name == "eos") return Method::eos;
    throw ConfigError("unknown method '" + name + "'");
}

LabeledEmbeddingSet SyntheticBatch::as_set(std::size_t class_count) const {
    return {features, labels, dim, class_count};
}

std::vector<double> SyntheticBatch::reconstruct(std::size_t i, const LabeledEmbeddingSet& source) const {
    const auto& p = provenance.at(i);
    const auto base = source.row(p.base_row);
    const auto other = source.row(p.neighbor_row);
    std::vector<double> out(dim);
    for (std::size_t f = 0; f < dim; ++f) {
        out[f] = p.toward ? base[f] + r_values[i] * (other[f] - base[f]) : base[f] + r_values[i] * (base[f] - other[f]);
    }
    return out;
}

std::vector<std::size_t> resolve_targets(const LabeledEmbeddingSet& set, const OversampleConfig& config) {
    const auto hist = set.histogram();
    if (!config.target_counts) {
        const std::size_t majority = *std::max_element(hist.begin(), hist.end());
        return std::vector<std::size_t>(hist.size(), majority);
    }
    const auto& targets = *config.target_counts;
    if (targets.size() != hist.size()) throw ConfigError("target counts must have one entry per class");
    for (std::size_t c = 0; c < hist.size(); ++c) {
        if (targets[c] < hist[c]) {
            throw ConfigError("target for class " + std::to_string(c) + " is below its current count");
        }
    }
    return targets;
}

namespace {

/// Appends synthetic rows for one class; all samplers funnel through here.
class BatchBuilder {
public:
    explicit BatchBuilder(const LabeledEmbeddingSet& source) : source_(source) { batch_.dim = source.dim(); }

    void add(ClassId label, std::size_t base, std::size_t neighbor, double r, bool toward) {
        const auto b = source_.row(base);
        const auto o = source_.row(neighbor);
        for (std::size_t f = 0; f < batch_.dim; ++f) {
            batch_.features.push_back(toward ? b[f] + r * (o[f] - b[f]) : b[f] + r * (b[f] - o[f]));
        }
        batch_.labels.push_back(label);
        batch_.provenance.push_back({base, neighbor, toward});
        batch_.r_values.push_back(r);
    }

    SyntheticBatch take() { return std::move(batch_); }

private:
    const LabeledEmbeddingSet& source_;
    SyntheticBatch batch_;
};

/// For every row of `rows`, its min(k, |rows|-1) nearest neighbors within `rows`
/// (global indices). Equivalent to filtering a full-set table down to same-class rows.
std::vector<std::vector<std::size_t>> same_class_neighbors(const LabeledEmbeddingSet& set,
                                                           const std::vector<std::size_t>& rows, std::size_t k) {
    const auto subset = set.select(rows);
    const auto table = knn(subset, std::min(k, rows.size() - 1));
    std::vector<std::vector<std::size_t>> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j : table.indices[i]) out[i].push_back(rows[j]);
    }
    return out;
}

/// SMOTE draws for one class: base uniform over `bases` (positions into `rows`),
/// neighbor uniform over that base's same-class neighbors.
void smote_class(const LabeledEmbeddingSet& set, ClassId c, const std::vector<std::size_t>& rows,
                 const std::vector<std::size_t>& bases, std::size_t k, std::size_t count, Rng& rng,
                 BatchBuilder& builder) {
    const auto neighbors = same_class_neighbors(set, rows, k);
    for (std::size_t s = 0; s < count; ++s) {
        const std::size_t pos = bases[uniform_index(rng, bases.size())];
        const auto& candidates = neighbors[pos];
        const std::size_t neighbor = candidates[uniform_index(rng, candidates.size())];
        builder.add(c, rows[pos], neighbor, uniform_unit(rng), true);
    }
}

std::vector<std::size_t> all_positions(std::size_t size) {
    std::vector<std::size_t> out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = i;
    return out;
}

enum class BaseRule { any, borderline, eos };

void check_k(const LabeledEmbeddingSet& set, std::size_t k) {
    if (k < 1) throw ConfigError("K must be at least 1");
    if (k + 1 > set.size()) {
        throw ConfigError("K=" + std::to_string(k) + " too large for " + std::to_string(set.size()) + " rows");
    }
}

ResampleResult run_sampler(const LabeledEmbeddingSet& set, const OversampleConfig& config, BaseRule rule) {
    check_k(set, config.k);
    const auto targets = resolve_targets(set, config);
    const auto partition = partition_by_class(set);

    std::vector<std::vector<std::size_t>> enemies;
    if (rule != BaseRule::any) enemies = enemy_neighbors(knn(set, config.k), set.labels());

    BatchBuilder builder(set);
    std::vector<ClassFallback> fallbacks;
    for (ClassId c = 0; c < set.class_count(); ++c) {
        const auto& rows = partition[c];
        if (targets[c] <= rows.size()) continue;
        const std::size_t deficit = targets[c] - rows.size();
        Rng rng(derive_seed(config.seed, c));

        if (rows.empty()) throw DataError("class " + std::to_string(c) + " has no rows to oversample");
        if (rows.size() == 1) {
            fallbacks.push_back({c, "single row: duplicated"});
            for (std::size_t s = 0; s < deficit; ++s) builder.add(c, rows[0], rows[0], 0.0, true);
            continue;
        }

        // Positions (into rows) of instances with at least one enemy in their K-NN.
        std::vector<std::size_t> border;
        if (rule != BaseRule::any) {
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (!enemies[rows[i]].empty()) border.push_back(i);
            }
            if (border.empty()) {
                fallbacks.push_back({c, "no instance has an enemy neighbor: smote"});
                smote_class(set, c, rows, all_positions(rows.size()), config.k, deficit, rng, builder);
                continue;
            }
        }

        switch (rule) {
        case BaseRule::any:
            smote_class(set, c, rows, all_positions(rows.size()), config.k, deficit, rng, builder);
            break;
        case BaseRule::borderline:
            smote_class(set, c, rows, border, config.k, deficit, rng, builder);
            break;
        case BaseRule::eos: {
            const bool toward = config.eos_direction == EosDirection::toward_enemy;
            for (std::size_t s = 0; s < deficit; ++s) {
                const std::size_t base = rows[border[uniform_index(rng, border.size())]];
                const auto& candidates = enemies[base];
                const std::size_t enemy = candidates[uniform_index(rng, candidates.size())];
                builder.add(c, base, enemy, uniform_unit(rng), toward);
            }
            break;
        }
        }
    }

    auto batch = builder.take();
    auto balanced = set.concatenated(batch.as_set(set.class_count()));
    return {std::move(balanced), std::move(batch), std::move(fallbacks), 0};
}

} // namespace

ResampleResult smote(const LabeledEmbeddingSet& set, const OversampleConfig& config) {
    return run_sampler(set, config, BaseRule::any);
}

ResampleResult borderline_smote(const LabeledEmbeddingSet& set, const OversampleConfig& config) {
    return run_sampler(set, config, BaseRule::borderline);
}

ResampleResult eos(const LabeledEmbeddingSet& set, const OversampleConfig& config) {
    return run_sampler(set, config, BaseRule::eos);
}

ResampleResult balanced_svm(const LabeledEmbeddingSet& set, const OversampleConfig& config,
                            const TrainConfig& svm_config) {
    auto result = smote(set, config);
    LinearHead svm;
    try {
        svm = train_svm(set, svm_config);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("balanced_svm: SVM training diverged: ") + e.what());
    }
    result.relabeled = relabel_with(svm, result.synthetic);
    result.balanced = set.concatenated(result.synthetic.as_set(set.class_count()));
    return result;
}

std::size_t relabel_with(const LinearHead& head, SyntheticBatch& batch) {
    if (batch.size() == 0) return 0;
    const auto predicted = predict(head, batch.features).labels;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (predicted[i] != batch.labels[i]) {
            batch.labels[i] = predicted[i];
            ++changed;
        }
    }
    return changed;
}

TrainConfig default_svm_config(Seed seed) {
    TrainConfig config;
    config.epochs = 20;
    config.learning_rate = 0.01;
    config.batch_size = 32;
    config.weight_decay = 1e-3;
    config.seed = seed;
    return config;
}

ResampleResult resample(Method method, const LabeledEmbeddingSet& set, const OversampleConfig& config,
                        const TrainConfig& svm_config) {
    switch (method) {
    case Method::smote: return smote(set, config);
    case Method::borderline_smote: return borderline_smote(set, config);
    case Method::balanced_svm: return balanced_svm(set, config, svm_config);
    case Method::eos: return eos(set, config);
    case Method::none: break;
    }
    SyntheticBatch empty;
    empty.dim = set.dim();
    return {set, std::move(empty), {}, 0};
}

} // namespace embal
