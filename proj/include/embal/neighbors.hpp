#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "embal/embedding_store.hpp"

namespace embal {

/// Exact K nearest neighbors of every row, ascending Euclidean distance, ties
/// broken by lower row index.
struct NeighborTable {
    std::size_t k = 0;
    bool self_excluded = true;
    std::vector<std::vector<std::size_t>> indices;
    std::vector<std::vector<double>> distances;

    std::size_t size() const { return indices.size(); }
};

NeighborTable knn(const LabeledEmbeddingSet& set, std::size_t k, bool self_excluded = true);

/// Same search over a raw row-major buffer of n rows of width dim.
NeighborTable knn(std::span<const double> rows, std::size_t dim, std::size_t k, bool self_excluded = true);

/// For each query, its neighbors whose label differs from the query's, in distance order.
std::vector<std::vector<std::size_t>> enemy_neighbors(const NeighborTable& table, std::span<const ClassId> labels);

} // namespace embal
