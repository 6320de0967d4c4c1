#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "geoscreen/core.hpp"
#include "geoscreen/geo.hpp"

namespace geoscreen {

struct CellImputation {
    std::string unit_id;
    std::size_t feature = 0;
    std::vector<std::string> donor_ids;  // the k donors actually used
    std::string rule;                    // "mean" or "mode"
    bool widened = false;                // search went past the k nearest units
    double value = 0.0;
};

struct ImputationReport {
    std::size_t k = 0;
    std::vector<std::size_t> imputed_per_feature;  // aligned to schema
    std::vector<CellImputation> cells;
};

// Fills every missing covariate from the k nearest other units that have
// the value present: arithmetic mean for numeric features, mode for
// binary (ties resolve to 0). Neighbor order is (haversine distance,
// ascending id); the donor search widens past the k nearest units until k
// donors with the value present are found. Originally present cells are
// never modified. Throws if a feature is missing in every unit.
std::pair<Dataset, ImputationReport> impute_knn(const Dataset& ds,
                                                const SpatialIndex& index,
                                                std::size_t k = 20);

}  // namespace geoscreen
