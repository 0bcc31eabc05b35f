#pragma once

#include <filesystem>
#include <iosfwd>

#include "json.hpp"

#include "embal/classifier_head.hpp"
#include "embal/gengap.hpp"
#include "embal/metrics.hpp"
#include "embal/oversamplers.hpp"

namespace embal {

/// Round to 4 decimal places, the precision reports are written at.
double round4(double value);

nlohmann::json to_json(const GapReport& report);
nlohmann::json to_json(const MetricSet& metrics);

/// {"C", "d", "loss", "weights", "biases"}; parameters kept at full precision.
nlohmann::json to_json(const LinearHead& head);
LinearHead head_from_json(const nlohmann::json& doc);

void save_head(const LinearHead& head, const std::filesystem::path& path);
LinearHead load_head(const std::filesystem::path& path);

/// Provenance CSV: header "label,base_row,neighbor_row,r", one line per synthetic row.
void write_provenance_csv(const SyntheticBatch& batch, std::ostream& out);

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

} // namespace embal
