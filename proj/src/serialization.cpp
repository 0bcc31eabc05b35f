#include "embal/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "embal/errors.hpp"

namespace embal {

using nlohmann::json;

double round4(double value) {
    const double r = std::round(value * 1e4) / 1e4;
    return r == 0.0 ? 0.0 : r;  // no "-0.0" in reports
}

namespace {

json rounded(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) out.push_back(round4(v));
    return out;
}

} // namespace

json to_json(const GapReport& report) {
    return {{"per_class", rounded(report.per_class_gap)},
            {"overall", round4(report.overall_gap)},
            {"skipped", report.classes_skipped}};
}

json to_json(const MetricSet& metrics) {
    return {{"bac", round4(metrics.bac)},
            {"gm", round4(metrics.gm)},
            {"fm", round4(metrics.fm)},
            {"zero_recall_classes", metrics.zero_recall_classes},
            {"f1_skipped", metrics.f1_skipped}};
}

json to_json(const LinearHead& head) {
    json weights = json::array();
    for (std::size_t c = 0; c < head.class_count; ++c) {
        const auto row = head.weight_row(static_cast<ClassId>(c));
        weights.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return {{"C", head.class_count},
            {"d", head.dim},
            {"loss", to_string(head.loss)},
            {"weights", std::move(weights)},
            {"biases", head.biases}};
}

LinearHead head_from_json(const json& doc) {
    try {
        LinearHead head;
        head.class_count = doc.at("C").get<std::size_t>();
        head.dim = doc.at("d").get<std::size_t>();
        head.loss = parse_loss_kind(doc.at("loss").get<std::string>());
        const auto& weights = doc.at("weights");
        if (!weights.is_array() || weights.size() != head.class_count) {
            throw DataError("head JSON: weights must have C rows");
        }
        for (const auto& row : weights) {
            const auto values = row.get<std::vector<double>>();
            if (values.size() != head.dim) throw DataError("head JSON: weight row length differs from d");
            head.weights.insert(head.weights.end(), values.begin(), values.end());
        }
        head.biases = doc.at("biases").get<std::vector<double>>();
        head.validate();
        return head;
    } catch (const json::exception& e) {
        throw DataError(std::string("head JSON: ") + e.what());
    }
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

void save_head(const LinearHead& head, const std::filesystem::path& path) { write_json_file(to_json(head), path); }

LinearHead load_head(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return head_from_json(doc);
}

void write_provenance_csv(const SyntheticBatch& batch, std::ostream& out) {
    out << "label,base_row,neighbor_row,r\n";
    char buf[32];
    for (std::size_t i = 0; i < batch.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", batch.r_values[i]);
        out << batch.labels[i] << ',' << batch.provenance[i].base_row << ',' << batch.provenance[i].neighbor_row
            << ',' << buf << '\n';
    }
}

} // namespace embal
