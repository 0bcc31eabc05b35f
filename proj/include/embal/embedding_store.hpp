#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "embal/random.hpp"

namespace embal {

using ClassId = std::uint32_t;

/**
 * A labeled matrix of feature embeddings: n rows of dimension d, each row
 * tagged with a dense class id in [0, C).
 *
 * Instances are immutable once constructed; the constructor validates shape,
 * label range and finiteness and throws DataError on violation.
 */
class LabeledEmbeddingSet {
public:
    LabeledEmbeddingSet(std::vector<double> features, std::vector<ClassId> labels,
                        std::size_t dim, std::size_t class_count);

    std::size_t size() const { return labels_.size(); }
    std::size_t dim() const { return dim_; }
    std::size_t class_count() const { return class_count_; }

    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * dim_, dim_};
    }
    ClassId label(std::size_t i) const { return labels_[i]; }

    /// Row-major n*d feature buffer.
    std::span<const double> features() const { return features_; }
    std::span<const ClassId> labels() const { return labels_; }

    /// Number of rows per class, length C.
    std::vector<std::size_t> histogram() const;

    /// Rows [0, n) of this set followed by the rows of `extra`. Shapes must agree.
    LabeledEmbeddingSet concatenated(const LabeledEmbeddingSet& extra) const;

    /// The given rows, in the given order.
    LabeledEmbeddingSet select(std::span<const std::size_t> rows) const;

    bool operator==(const LabeledEmbeddingSet&) const = default;

private:
    std::vector<double> features_;
    std::vector<ClassId> labels_;
    std::size_t dim_;
    std::size_t class_count_;
};

/// Row indices grouped by class; index lists are disjoint and cover every row.
struct ClassPartition {
    std::vector<std::vector<std::size_t>> rows_of_class;

    std::size_t class_count() const { return rows_of_class.size(); }
    const std::vector<std::size_t>& operator[](ClassId c) const { return rows_of_class[c]; }
};

/// Per-class target counts, non-increasing in class index.
struct ImbalanceProfile {
    std::vector<std::size_t> counts;
};

enum class FileFormat { csv, binary };

/// csv for a ".csv" extension, binary otherwise.
FileFormat format_from_extension(const std::filesystem::path& path);
FileFormat parse_format(const std::string& name);

LabeledEmbeddingSet load(const std::filesystem::path& path, FileFormat format);
void save(const LabeledEmbeddingSet& set, const std::filesystem::path& path, FileFormat format);

// Stream-level codecs, used by load/save and directly by tests.
LabeledEmbeddingSet read_csv(std::istream& in);
void write_csv(const LabeledEmbeddingSet& set, std::ostream& out);
LabeledEmbeddingSet read_binary(std::istream& in);
void write_binary(const LabeledEmbeddingSet& set, std::ostream& out);

ClassPartition partition_by_class(const LabeledEmbeddingSet& set);

/// counts[c] = round(n_max * rho^(-c/(C-1))), clamped to at least 1.
ImbalanceProfile exponential_profile(std::size_t class_count, std::size_t n_max, double rho);

/// Draws profile.counts[c] rows of each class without replacement. Output is
/// grouped by class in class order.
LabeledEmbeddingSet subsample_to_profile(const LabeledEmbeddingSet& set,
                                         const ImbalanceProfile& profile, Seed seed);

/// Class means placed uniformly at random on a hypersphere.
struct MixtureMeans {
    std::size_t dim = 0;
    std::vector<double> means;  // C*d, row-major

    std::size_t class_count() const { return dim == 0 ? 0 : means.size() / dim; }
    std::span<const double> mean(ClassId c) const { return {means.data() + c * dim, dim}; }
};

MixtureMeans sphere_means(std::size_t class_count, std::size_t dim, double radius, Seed seed);

/// Isotropic Gaussian rows of deviation sigma around each class mean, with
/// profile.counts[c] rows for class c. Feature values are rounded to float32 so
/// generated sets survive the binary format unchanged.
LabeledEmbeddingSet sample_mixture(const MixtureMeans& means, const ImbalanceProfile& profile,
                                   double sigma, Seed seed);

/// sphere_means + sample_mixture with seeds derived from `seed`.
LabeledEmbeddingSet gaussian_mixture(std::size_t class_count, std::size_t dim,
                                     const ImbalanceProfile& profile, double mean_radius,
                                     double sigma, Seed seed);

} // namespace embal
