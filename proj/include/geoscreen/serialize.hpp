#pragma once

#include <string>

#include <json.hpp>

#include "geoscreen/core.hpp"
#include "geoscreen/explain.hpp"
#include "geoscreen/impute.hpp"
#include "geoscreen/ingest.hpp"
#include "geoscreen/models.hpp"
#include "geoscreen/spatial.hpp"

namespace geoscreen {

using json = nlohmann::ordered_json;

json to_json(const ValidationReport& r, const Schema& schema);
json to_json(const ImputationReport& r, const Schema& schema);
json to_json(const DatasetSummary& s);
json to_json(const ForestConfig& c);
json to_json(const GridSearchResult& g);
json to_json(const ComparisonReport& r);

// Versioned forest format: feature index, threshold, children, leaf value,
// cover per node.
json forest_to_json(const ForestModel& m);
ForestModel forest_from_json(const json& j);

// FeatureCollection keyed by unit id. `geometry_by_id` may supply polygon
// geometry (from an external GeoJSON file); units without an entry get a
// Point geometry at their centroid.
json hotspot_geojson(const std::vector<UnitRecord>& units, const GiResult& gi,
                     const HotspotAssignment& classes, const std::vector<int>& jenks_class,
                     const json* geometry_by_id);

// FNV-1a 64-bit over raw bytes; used for manifest artifact hashes.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

}  // namespace geoscreen
