#include "geoscreen/geo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace geoscreen {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg2Rad = kPi / 180.0;

// Miles of arc per degree of latitude.
constexpr double kMilesPerLatDeg = kPi * kEarthRadiusMiles / 180.0;

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    if (a.miles != b.miles) return a.miles < b.miles;
    return a.id < b.id;
}
}  // namespace

double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
    const double phi1 = a.lat * kDeg2Rad;
    const double phi2 = b.lat * kDeg2Rad;
    const double dphi = (b.lat - a.lat) * kDeg2Rad;
    const double dlam = (b.lon - a.lon) * kDeg2Rad;
    const double sp = std::sin(dphi / 2.0);
    const double sl = std::sin(dlam / 2.0);
    const double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

SpatialIndex SpatialIndex::build(std::vector<std::string> ids, std::vector<GeoPoint> points) {
    if (ids.size() != points.size())
        throw std::invalid_argument("SpatialIndex: ids/points size mismatch");
    std::unordered_set<std::string> seen;
    for (const auto& id : ids)
        if (!seen.insert(id).second)
            throw std::invalid_argument("SpatialIndex: duplicate id " + id);

    SpatialIndex idx;
    idx.ids_ = std::move(ids);
    idx.points_ = std::move(points);

    const std::size_t n = idx.points_.size();
    const double target_bands = std::max(1.0, std::sqrt(static_cast<double>(n)));
    idx.band_deg_ = std::max(0.01, 180.0 / target_bands);
    const int n_bands = static_cast<int>(std::ceil(180.0 / idx.band_deg_)) + 1;
    idx.bands_.assign(static_cast<std::size_t>(n_bands), {});
    for (std::size_t i = 0; i < n; ++i)
        idx.bands_[static_cast<std::size_t>(idx.band_of(idx.points_[i].lat))].push_back(
            static_cast<int>(i));
    return idx;
}

int SpatialIndex::band_of(double lat) const {
    int b = static_cast<int>((lat + 90.0) / band_deg_);
    const int last = static_cast<int>(bands_.size()) - 1;
    return std::clamp(b, 0, last);
}

std::vector<Neighbor> SpatialIndex::k_nearest(const GeoPoint& p, std::size_t k) const {
    std::vector<Neighbor> best;
    if (k == 0 || points_.empty()) return best;

    const int home = band_of(p.lat);
    const int last = static_cast<int>(bands_.size()) - 1;

    auto scan_band = [&](int b) {
        for (int i : bands_[static_cast<std::size_t>(b)])
            best.push_back({ids_[static_cast<std::size_t>(i)],
                            haversine_miles(p, points_[static_cast<std::size_t>(i)])});
    };

    for (int ring = 0;; ++ring) {
        const int lo = home - ring, hi = home + ring;
        if (lo < 0 && hi > last) break;
        if (ring == 0) {
            scan_band(home);
        } else {
            if (lo >= 0) scan_band(lo);
            if (hi <= last) scan_band(hi);
        }
        if (best.size() >= k) {
            std::sort(best.begin(), best.end(), neighbor_less);
            best.resize(std::min(best.size(), k + 64));  // keep tail for tie audit
            // Any point in a band beyond `ring` is at least this far away.
            const double bound = static_cast<double>(ring) * band_deg_ * kMilesPerLatDeg;
            if (best.size() >= k && best[k - 1].miles < bound) break;
        }
    }
    std::sort(best.begin(), best.end(), neighbor_less);
    if (best.size() > k) best.resize(k);
    return best;
}

std::vector<Neighbor> SpatialIndex::within_radius(const GeoPoint& p, double r_miles) const {
    std::vector<Neighbor> out;
    if (r_miles < 0.0 || points_.empty()) return out;

    const int last = static_cast<int>(bands_.size()) - 1;
    // Bands whose latitude interval could hold a point within r of p.
    const double r_deg = r_miles / kMilesPerLatDeg;
    const int lo = std::clamp(static_cast<int>((p.lat - r_deg + 90.0) / band_deg_) - 1, 0, last);
    const int hi = std::clamp(static_cast<int>((p.lat + r_deg + 90.0) / band_deg_) + 1, 0, last);
    for (int b = lo; b <= hi; ++b) {
        for (int i : bands_[static_cast<std::size_t>(b)]) {
            const double d = haversine_miles(p, points_[static_cast<std::size_t>(i)]);
            if (d <= r_miles) out.push_back({ids_[static_cast<std::size_t>(i)], d});
        }
    }
    std::sort(out.begin(), out.end(), neighbor_less);
    return out;
}

AccessibilityColumns accessibility_features(const std::vector<UnitRecord>& units,
                                            const FacilitySet& facilities,
                                            double radius_miles) {
    if (facilities.facilities.empty())
        throw std::invalid_argument("accessibility_features: empty facility set");

    std::vector<std::string> ids;
    std::vector<GeoPoint> pts;
    ids.reserve(facilities.facilities.size());
    pts.reserve(facilities.facilities.size());
    for (const auto& f : facilities.facilities) {
        ids.push_back(f.id);
        pts.push_back(f.location);
    }
    const SpatialIndex index = SpatialIndex::build(std::move(ids), std::move(pts));

    AccessibilityColumns cols;
    cols.radius_miles = radius_miles;
    cols.nearest_miles.reserve(units.size());
    cols.count_within.reserve(units.size());
    for (const auto& u : units) {
        const auto nn = index.k_nearest(u.centroid, 1);
        cols.nearest_miles.push_back(nn.front().miles);
        cols.count_within.push_back(
            static_cast<double>(index.count_within_radius(u.centroid, radius_miles)));
    }
    return cols;
}

void append_accessibility(Dataset& ds, const AccessibilityColumns& cols,
                          const std::string& nearest_name, const std::string& count_name) {
    if (cols.nearest_miles.size() != ds.units.size())
        throw std::invalid_argument("append_accessibility: column/unit size mismatch");
    ds.schema.push_back({nearest_name, FeatureKind::Numeric, "distance to nearest facility (miles)"});
    ds.schema.push_back({count_name, FeatureKind::Numeric, "facility count within catchment"});
    for (std::size_t i = 0; i < ds.units.size(); ++i) {
        ds.units[i].features.push_back(cols.nearest_miles[i]);
        ds.units[i].features.push_back(cols.count_within[i]);
    }
}

}  // namespace geoscreen
