#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoscreen {

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    GeoPoint() = default;
    GeoPoint(double lat_deg, double lon_deg) : lat(lat_deg), lon(lon_deg) {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw std::invalid_argument("latitude out of range: " + std::to_string(lat));
        if (!(lon > -180.0 && lon <= 180.0))
            throw std::invalid_argument("longitude out of range: " + std::to_string(lon));
    }
};

enum class FeatureKind { Numeric, Binary };

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::Numeric;
    std::string description;
};

using Schema = std::vector<FeatureSpec>;

// One geographic analysis unit (census tract or county). Rates are
// percentages in [0,100]; empty optional means missing.
struct UnitRecord {
    std::string id;
    GeoPoint centroid;
    std::optional<double> rate_y1;
    std::optional<double> rate_y2;
    std::vector<std::optional<double>> features;  // aligned to schema
};

struct Dataset {
    Schema schema;
    std::vector<UnitRecord> units;
    std::vector<double> response;  // empty until build_response

    bool has_response() const { return !response.empty(); }
    int feature_index(const std::string& name) const {
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (schema[j].name == name) return static_cast<int>(j);
        return -1;
    }
};

struct FacilityRecord {
    std::string id;
    GeoPoint location;
};

struct FacilitySet {
    std::vector<FacilityRecord> facilities;
};

struct RowError {
    std::size_t line = 0;  // 1-based physical line in the CSV
    std::string message;
};

struct ValidationReport {
    std::vector<std::size_t> missing_per_column;  // aligned to schema
    std::size_t missing_rate_y1 = 0;
    std::size_t missing_rate_y2 = 0;
    std::vector<RowError> row_errors;
    std::size_t eligible = 0;
    std::size_t ineligible = 0;

    bool clean() const { return row_errors.empty(); }
};

}  // namespace geoscreen
