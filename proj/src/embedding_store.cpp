#include "embal/embedding_store.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "embal/errors.hpp"

namespace embal {

namespace {

std::string at_row(std::size_t row) { return " (row " + std::to_string(row) + ")"; }

} // namespace

LabeledEmbeddingSet::LabeledEmbeddingSet(std::vector<double> features, std::vector<ClassId> labels,
                                         std::size_t dim, std::size_t class_count)
    : features_(std::move(features)), labels_(std::move(labels)), dim_(dim), class_count_(class_count) {
    if (dim_ == 0) throw DataError("embedding dimension must be at least 1");
    if (class_count_ < 2) throw DataError("class count must be at least 2, got " + std::to_string(class_count_));
    if (features_.size() != labels_.size() * dim_) {
        throw DataError("feature buffer holds " + std::to_string(features_.size()) + " values, expected " +
                        std::to_string(labels_.size()) + " x " + std::to_string(dim_));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] >= class_count_) {
            throw DataError("label " + std::to_string(labels_[i]) + " outside [0, " +
                            std::to_string(class_count_) + ")" + at_row(i));
        }
    }
    for (std::size_t k = 0; k < features_.size(); ++k) {
        if (!std::isfinite(features_[k])) throw DataError("non-finite feature value" + at_row(k / dim_));
    }
}

std::vector<std::size_t> LabeledEmbeddingSet::histogram() const {
    std::vector<std::size_t> counts(class_count_, 0);
    for (ClassId y : labels_) ++counts[y];
    return counts;
}

LabeledEmbeddingSet LabeledEmbeddingSet::concatenated(const LabeledEmbeddingSet& extra) const {
    if (extra.dim_ != dim_ || extra.class_count_ != class_count_) {
        throw DataError("cannot concatenate embedding sets of different shape");
    }
    std::vector<double> features = features_;
    features.insert(features.end(), extra.features_.begin(), extra.features_.end());
    std::vector<ClassId> labels = labels_;
    labels.insert(labels.end(), extra.labels_.begin(), extra.labels_.end());
    return {std::move(features), std::move(labels), dim_, class_count_};
}

LabeledEmbeddingSet LabeledEmbeddingSet::select(std::span<const std::size_t> rows) const {
    std::vector<double> features;
    features.reserve(rows.size() * dim_);
    std::vector<ClassId> labels;
    labels.reserve(rows.size());
    for (std::size_t i : rows) {
        if (i >= size()) throw DataError("row index out of range" + at_row(i));
        auto r = row(i);
        features.insert(features.end(), r.begin(), r.end());
        labels.push_back(labels_[i]);
    }
    return {std::move(features), std::move(labels), dim_, class_count_};
}

FileFormat format_from_extension(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? FileFormat::csv : FileFormat::binary;
}

FileFormat parse_format(const std::string& name) {
    if (name == "csv") return FileFormat::csv;
    if (name == "bin" || name == "binary") return FileFormat::binary;
    throw ConfigError("unknown format '" + name + "' (expected csv or bin)");
}

// ---------------------------------------------------------------------------
// CSV: optional "# classes=C" line, header "label,f0,...,f{d-1}", one row per instance.

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        fields.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    return ec == std::errc() && ptr == end && !text.empty();
}

} // namespace

LabeledEmbeddingSet read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t declared_classes = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        return true;
    };

    if (!next_line()) throw DataError("malformed header: empty file");
    if (!line.empty() && line.front() == '#') {
        const auto body = trim(std::string_view(line).substr(1));
        constexpr std::string_view key = "classes=";
        if (!body.starts_with(key) || !parse_number(body.substr(key.size()), declared_classes)) {
            throw DataError("malformed header: expected '# classes=C', got '" + line + "'");
        }
        if (!next_line()) throw DataError("malformed header: missing column line");
    }

    const auto header = split_commas(trim(line));
    if (header.size() < 2 || trim(header[0]) != "label") {
        throw DataError("malformed header: expected 'label,f0,...', got '" + line + "'");
    }
    const std::size_t dim = header.size() - 1;
    for (std::size_t f = 0; f < dim; ++f) {
        if (trim(header[f + 1]) != "f" + std::to_string(f)) {
            throw DataError("malformed header: column " + std::to_string(f + 1) + " should be f" + std::to_string(f));
        }
    }

    std::vector<double> features;
    std::vector<ClassId> labels;
    std::size_t row = 0;
    while (next_line()) {
        if (trim(line).empty()) continue;
        const auto fields = split_commas(line);
        if (fields.size() != dim + 1) {
            throw DataError("row has " + std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(dim + 1) + at_row(row));
        }
        long long label = 0;
        if (!parse_number(fields[0], label) || label < 0) {
            throw DataError("label out of range or not an integer" + at_row(row));
        }
        if (declared_classes != 0 && static_cast<unsigned long long>(label) >= declared_classes) {
            throw DataError("label " + std::to_string(label) + " out of range" + at_row(row));
        }
        if (label > static_cast<long long>(UINT32_MAX) - 1) throw DataError("label out of range" + at_row(row));
        labels.push_back(static_cast<ClassId>(label));
        for (std::size_t f = 0; f < dim; ++f) {
            double v = 0.0;
            if (!parse_number(fields[f + 1], v)) {
                throw DataError("unparseable feature value '" + std::string(trim(fields[f + 1])) + "'" + at_row(row));
            }
            if (!std::isfinite(v)) throw DataError("non-finite feature value" + at_row(row));
            features.push_back(v);
        }
        ++row;
    }

    std::size_t classes = declared_classes;
    if (classes == 0) {
        if (labels.empty()) throw DataError("cannot infer class count from a file with no rows");
        classes = 1 + *std::max_element(labels.begin(), labels.end());
    }
    return {std::move(features), std::move(labels), dim, classes};
}

void write_csv(const LabeledEmbeddingSet& set, std::ostream& out) {
    out << "label";
    for (std::size_t f = 0; f < set.dim(); ++f) out << ",f" << f;
    out << '\n';
    std::array<char, 32> buf{};
    for (std::size_t i = 0; i < set.size(); ++i) {
        out << set.label(i);
        for (double v : set.row(i)) {
            std::snprintf(buf.data(), buf.size(), "%.9g", v);
            out << ',' << buf.data();
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Binary: "EMB1", u32 n, u32 d, u32 C, n u32 labels, n*d float32; little-endian.

namespace {

constexpr std::array<char, 4> kMagic{'E', 'M', 'B', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                    static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes.data(), bytes.size());
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    std::array<unsigned char, 4> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
        throw DataError(std::string("truncated binary file while reading ") + what);
    }
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > UINT32_MAX) throw DataError(std::string(what) + " does not fit the binary format");
    return static_cast<std::uint32_t>(v);
}

} // namespace

LabeledEmbeddingSet read_binary(std::istream& in) {
    std::array<char, 4> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
        throw DataError("malformed header: missing EMB1 magic");
    }
    const std::size_t n = get_u32(in, "row count");
    const std::size_t d = get_u32(in, "dimension");
    const std::size_t classes = get_u32(in, "class count");
    if (d == 0) throw DataError("malformed header: dimension is 0");

    std::vector<ClassId> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = get_u32(in, "labels");
        if (labels[i] >= classes) throw DataError("label out of range" + at_row(i));
    }
    std::vector<double> features(n * d);
    for (std::size_t k = 0; k < n * d; ++k) {
        const float v = std::bit_cast<float>(get_u32(in, "features"));
        if (!std::isfinite(v)) throw DataError("non-finite feature value" + at_row(k / d));
        features[k] = v;
    }
    return {std::move(features), std::move(labels), d, classes};
}

void write_binary(const LabeledEmbeddingSet& set, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put_u32(out, checked_u32(set.size(), "row count"));
    put_u32(out, checked_u32(set.dim(), "dimension"));
    put_u32(out, checked_u32(set.class_count(), "class count"));
    for (ClassId y : set.labels()) put_u32(out, y);
    for (double v : set.features()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

LabeledEmbeddingSet load(const std::filesystem::path& path, FileFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return format == FileFormat::csv ? read_csv(in) : read_binary(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void save(const LabeledEmbeddingSet& set, const std::filesystem::path& path, FileFormat format) {
    if (set.size() == 0) throw DataError("refusing to save an embedding set with no rows");
    const auto hist = set.histogram();
    for (std::size_t c = 0; c < hist.size(); ++c) {
        if (hist[c] == 0) throw DataError("refusing to save: class " + std::to_string(c) + " has no rows");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    if (format == FileFormat::csv) {
        write_csv(set, out);
    } else {
        write_binary(set, out);
    }
    out.flush();
    if (!out) throw DataError("write failed for " + path.string());
}

ClassPartition partition_by_class(const LabeledEmbeddingSet& set) {
    ClassPartition partition;
    partition.rows_of_class.resize(set.class_count());
    for (std::size_t i = 0; i < set.size(); ++i) partition.rows_of_class[set.label(i)].push_back(i);
    return partition;
}

ImbalanceProfile exponential_profile(std::size_t class_count, std::size_t n_max, double rho) {
    if (class_count < 2) throw ConfigError("exponential profile needs at least 2 classes");
    if (n_max < class_count) throw ConfigError("n_max must be at least the class count");
    if (!(rho >= 1.0) || !std::isfinite(rho)) throw ConfigError("imbalance ratio must be >= 1");

    ImbalanceProfile profile;
    profile.counts.resize(class_count);
    const double last = static_cast<double>(class_count - 1);
    for (std::size_t c = 0; c < class_count; ++c) {
        const double exact = static_cast<double>(n_max) * std::pow(rho, -static_cast<double>(c) / last);
        profile.counts[c] = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(exact)));
    }
    profile.counts.front() = n_max;
    return profile;
}

LabeledEmbeddingSet subsample_to_profile(const LabeledEmbeddingSet& set, const ImbalanceProfile& profile,
                                         Seed seed) {
    if (profile.counts.size() != set.class_count()) {
        throw ConfigError("profile has " + std::to_string(profile.counts.size()) + " classes, set has " +
                          std::to_string(set.class_count()));
    }
    const auto partition = partition_by_class(set);
    std::vector<std::size_t> chosen;
    for (ClassId c = 0; c < set.class_count(); ++c) {
        auto rows = partition[c];
        if (rows.size() < profile.counts[c]) {
            throw DataError("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                            " rows, profile requires " + std::to_string(profile.counts[c]));
        }
        Rng rng(derive_seed(seed, c));
        std::shuffle(rows.begin(), rows.end(), rng);
        chosen.insert(chosen.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(profile.counts[c]));
    }
    return set.select(chosen);
}

MixtureMeans sphere_means(std::size_t class_count, std::size_t dim, double radius, Seed seed) {
    if (class_count < 2) throw ConfigError("mixture needs at least 2 classes");
    if (dim == 0) throw ConfigError("mixture dimension must be at least 1");
    if (!(radius > 0.0) || !std::isfinite(radius)) throw ConfigError("mean radius must be positive");

    MixtureMeans out;
    out.dim = dim;
    out.means.resize(class_count * dim);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < class_count; ++c) {
        double norm2 = 0.0;
        // Resample the (measure-zero) all-zero direction.
        while (norm2 == 0.0) {
            for (std::size_t f = 0; f < dim; ++f) {
                out.means[c * dim + f] = normal(rng);
                norm2 += out.means[c * dim + f] * out.means[c * dim + f];
            }
        }
        const double scale = radius / std::sqrt(norm2);
        // float32-representable so sigma = 0 reproduces the mean exactly in stored rows.
        for (std::size_t f = 0; f < dim; ++f) {
            out.means[c * dim + f] = static_cast<float>(out.means[c * dim + f] * scale);
        }
    }
    return out;
}

LabeledEmbeddingSet sample_mixture(const MixtureMeans& means, const ImbalanceProfile& profile, double sigma,
                                   Seed seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be non-negative");
    const std::size_t classes = means.class_count();
    if (profile.counts.size() != classes) throw ConfigError("profile length does not match class count");

    const std::size_t total = std::accumulate(profile.counts.begin(), profile.counts.end(), std::size_t{0});
    std::vector<double> features;
    features.reserve(total * means.dim);
    std::vector<ClassId> labels;
    labels.reserve(total);
    for (ClassId c = 0; c < classes; ++c) {
        Rng rng(derive_seed(seed, c));
        std::normal_distribution<double> normal(0.0, 1.0);
        const auto mu = means.mean(c);
        for (std::size_t i = 0; i < profile.counts[c]; ++i) {
            for (std::size_t f = 0; f < means.dim; ++f) {
                features.push_back(static_cast<float>(mu[f] + sigma * normal(rng)));
            }
            labels.push_back(c);
        }
    }
    return {std::move(features), std::move(labels), means.dim, classes};
}

LabeledEmbeddingSet gaussian_mixture(std::size_t class_count, std::size_t dim, const ImbalanceProfile& profile,
                                     double mean_radius, double sigma, Seed seed) {
    const auto means = sphere_means(class_count, dim, mean_radius, derive_seed(seed, 0xA11CE));
    return sample_mixture(means, profile, sigma, derive_seed(seed, 0xB0B));
}

} // namespace embal
