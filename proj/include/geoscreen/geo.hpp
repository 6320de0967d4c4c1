#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geoscreen/core.hpp"

namespace geoscreen {

// Mean Earth radius; 1 mile = 1609.344 m exactly.
inline constexpr double kEarthRadiusMiles = 6371008.8 / 1609.344;  // 3958.7613...

// Great-circle distance on a sphere. Symmetric, non-negative.
double haversine_miles(const GeoPoint& a, const GeoPoint& b);

struct Neighbor {
    std::string id;
    double miles = 0.0;
};

// Exact spatial index: a lat/lon bucket grid with haversine refinement.
// Queries return precisely the brute-force answer; the grid only prunes.
class SpatialIndex {
public:
    SpatialIndex() = default;

    // Throws on duplicate ids.
    static SpatialIndex build(std::vector<std::string> ids, std::vector<GeoPoint> points);

    std::size_t size() const { return points_.size(); }
    const std::vector<GeoPoint>& points() const { return points_; }
    const std::vector<std::string>& ids() const { return ids_; }

    // k closest points by haversine distance, ascending; ties broken by
    // ascending id. Returns fewer than k if the set is smaller.
    std::vector<Neighbor> k_nearest(const GeoPoint& p, std::size_t k) const;

    // Points with distance <= r (boundary inclusive), ascending by
    // (distance, id).
    std::vector<Neighbor> within_radius(const GeoPoint& p, double r_miles) const;

    std::size_t count_within_radius(const GeoPoint& p, double r_miles) const {
        return within_radius(p, r_miles).size();
    }

private:
    std::vector<std::string> ids_;
    std::vector<GeoPoint> points_;

    // Latitude-band buckets. Latitude separation lower-bounds the
    // great-circle distance, which makes band-by-band pruning exact;
    // longitude gives no such bound near the poles.
    double band_deg_ = 1.0;
    std::vector<std::vector<int>> bands_;

    int band_of(double lat) const;
};

struct AccessibilityColumns {
    std::vector<double> nearest_miles;
    std::vector<double> count_within;
    double radius_miles = 10.0;
};

// Per unit: distance to the nearest facility and facility count within
// `radius_miles`. Throws if the facility set is empty (nearest distance
// undefined).
AccessibilityColumns accessibility_features(const std::vector<UnitRecord>& units,
                                            const FacilitySet& facilities,
                                            double radius_miles = 10.0);

// Appends the two accessibility columns to the dataset schema as numeric
// features named `nearest_name` / `count_name`.
void append_accessibility(Dataset& ds, const AccessibilityColumns& cols,
                          const std::string& nearest_name = "nearest_facility_miles",
                          const std::string& count_name = "facilities_within_10mi");

}  // namespace geoscreen
