#include "embal/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "embal/errors.hpp"

namespace embal {

NeighborTable knn(std::span<const double> rows, std::size_t dim, std::size_t k, bool self_excluded) {
    if (dim == 0) throw ConfigError("knn: dimension must be at least 1");
    const std::size_t n = rows.size() / dim;
    const std::size_t candidates = self_excluded ? (n == 0 ? 0 : n - 1) : n;
    if (k < 1 || k > candidates) {
        throw ConfigError("knn: K=" + std::to_string(k) + " outside [1, " + std::to_string(candidates) + "] for " +
                          std::to_string(n) + " rows");
    }

    NeighborTable table;
    table.k = k;
    table.self_excluded = self_excluded;
    table.indices.resize(n);
    table.distances.resize(n);

    std::vector<std::pair<double, std::size_t>> scratch;
    scratch.reserve(n);
    for (std::size_t q = 0; q < n; ++q) {
        const double* query = rows.data() + q * dim;
        scratch.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (self_excluded && j == q) continue;
            const double* other = rows.data() + j * dim;
            double d2 = 0.0;
            for (std::size_t f = 0; f < dim; ++f) {
                const double diff = query[f] - other[f];
                d2 += diff * diff;
            }
            scratch.emplace_back(d2, j);
        }
        // Pair ordering compares squared distance first, then row index.
        std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
        auto& idx = table.indices[q];
        auto& dist = table.distances[q];
        idx.resize(k);
        dist.resize(k);
        for (std::size_t r = 0; r < k; ++r) {
            idx[r] = scratch[r].second;
            dist[r] = std::sqrt(scratch[r].first);
        }
    }
    return table;
}

NeighborTable knn(const LabeledEmbeddingSet& set, std::size_t k, bool self_excluded) {
    return knn(set.features(), set.dim(), k, self_excluded);
}

std::vector<std::vector<std::size_t>> enemy_neighbors(const NeighborTable& table, std::span<const ClassId> labels) {
    std::vector<std::vector<std::size_t>> enemies(table.size());
    for (std::size_t q = 0; q < table.size(); ++q) {
        if (q >= labels.size()) throw DataError("enemy_neighbors: labels do not cover query " + std::to_string(q));
        for (std::size_t j : table.indices[q]) {
            if (j >= labels.size()) throw DataError("enemy_neighbors: labels do not cover row " + std::to_string(j));
            if (labels[j] != labels[q]) enemies[q].push_back(j);
        }
    }
    return enemies;
}

} // namespace embal
