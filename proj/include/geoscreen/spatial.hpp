#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geoscreen/core.hpp"
#include "geoscreen/geo.hpp"

namespace geoscreen {

// Sparse per-unit neighbor weights. Self-inclusive (w_ii > 0) as required
// by the Gi* construction.
struct SpatialWeights {
    struct Entry {
        int neighbor = 0;  // index into the unit list
        double weight = 0.0;
    };
    std::vector<std::vector<Entry>> rows;
    bool self_inclusive = true;
    std::size_t size() const { return rows.size(); }
};

// Binary k-NN weights: w_ij = 1 for j in {i} union kNN(i). Asymmetry is
// allowed. Throws if n <= k.
SpatialWeights weights_knn(const std::vector<GeoPoint>& points,
                           const std::vector<std::string>& ids, std::size_t k,
                           bool self_inclusive = true);

// Binary distance-band weights: w_ij = 1 iff haversine(i,j) <= d or i = j.
// Isolated units keep only the self weight.
SpatialWeights weights_distance_band(const std::vector<GeoPoint>& points,
                                     const std::vector<std::string>& ids, double d_miles,
                                     bool self_inclusive = true);

struct GiResult {
    std::vector<double> z;
    std::vector<double> p;           // two-sided normal p-value
    std::vector<bool> defined;       // false where the variance bracket is 0
};

// Getis-Ord Gi*:
//   z_i = (sum_j w_ij x_j - mean(x) sum_j w_ij)
//         / (S * sqrt((n sum_j w_ij^2 - (sum_j w_ij)^2) / (n - 1)))
// with S the population standard deviation of x. Throws on constant
// values (S = 0); a unit whose bracket term vanishes (its neighborhood is
// the whole set under binary weights) is flagged undefined.
GiResult gi_star(const std::vector<double>& values, const SpatialWeights& weights);

// Standard normal CDF via the Zelen-Severo rational approximation
// (Abramowitz & Stegun 26.2.17), |error| < 7.5e-8. Hand-rolled so p-values
// are bit-identical across platforms and language ports.
double normal_cdf(double x);

enum class HotspotClass { Hot99, Hot95, Hot90, NotSignificant, Cold90, Cold95, Cold99 };

std::string hotspot_class_name(HotspotClass c);

struct HotspotAssignment {
    std::vector<HotspotClass> classes;
    std::vector<bool> undefined_flag;  // true where z was undefined
};

// |z| >= 2.576 -> 99% tier, >= 1.960 -> 95%, >= 1.645 -> 90%; the sign
// picks Hot vs Cold. Undefined z maps to NotSignificant with a flag. With
// `bh_alpha` > 0 significance tiers come from Benjamini-Hochberg adjusted
// p-values at levels {0.01, 0.05, 0.10} instead of the raw z thresholds.
HotspotAssignment classify_hotspots(const GiResult& gi, double bh_alpha = 0.0);

// Benjamini-Hochberg step-up adjusted p-values.
std::vector<double> bh_adjust(const std::vector<double>& pvalues);

struct JenksBreaks {
    std::vector<double> breaks;  // class maxima, strictly ascending
    double ssd = 0.0;            // achieved total within-class sum of squares
};

// Exact natural-breaks optimum via dynamic programming over the sorted
// distinct values (duplicates grouped and weighted). Requires
// 1 <= k <= number of distinct values.
JenksBreaks jenks_breaks(const std::vector<double>& values, std::size_t k);

// Class of v = index of the first break >= v. Values above the last break
// clamp to the last class; `clamped_count`, when given, receives how many.
std::vector<int> assign_classes(const std::vector<double>& values,
                                const std::vector<double>& breaks,
                                std::size_t* clamped_count = nullptr);

}  // namespace geoscreen
