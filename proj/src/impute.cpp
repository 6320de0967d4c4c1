#include "geoscreen/impute.hpp"

#include <stdexcept>
#include <unordered_map>

namespace geoscreen {

std::pair<Dataset, ImputationReport> impute_knn(const Dataset& ds, const SpatialIndex& index,
                                                std::size_t k) {
    if (k == 0) throw std::invalid_argument("impute_knn: k must be >= 1");

    const std::size_t n = ds.units.size();
    const std::size_t d = ds.schema.size();

    std::vector<std::size_t> present_count(d, 0);
    for (const auto& u : ds.units)
        for (std::size_t j = 0; j < d; ++j)
            if (u.features[j]) ++present_count[j];
    for (std::size_t j = 0; j < d; ++j)
        if (n > 0 && present_count[j] == 0)
            throw std::runtime_error("impute_knn: uninputable feature '" + ds.schema[j].name +
                                     "' (missing in all units)");

    std::unordered_map<std::string, std::size_t> row_of;
    row_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i) row_of.emplace(ds.units[i].id, i);

    Dataset out = ds;
    ImputationReport report;
    report.k = k;
    report.imputed_per_feature.assign(d, 0);

    for (std::size_t i = 0; i < n; ++i) {
        const UnitRecord& u = ds.units[i];
        // Neighbors of this unit, fetched lazily and grown on demand.
        std::vector<Neighbor> neighbors;
        auto ensure_neighbors = [&](std::size_t want) {
            if (neighbors.size() >= want || neighbors.size() + 1 >= n) return;
            std::size_t ask = std::max<std::size_t>(want + 1, 2 * (neighbors.size() + 1));
            auto got = index.k_nearest(u.centroid, std::min(ask, n));
            neighbors.clear();
            for (auto& nb : got)
                if (nb.id != u.id) neighbors.push_back(std::move(nb));
        };

        for (std::size_t j = 0; j < d; ++j) {
            if (u.features[j]) continue;

            CellImputation cell;
            cell.unit_id = u.id;
            cell.feature = j;

            // Walk neighbors in (distance, id) order; donors must hold the
            // value. Widening past the k nearest units keeps the donor
            // sample size at k.
            std::vector<double> donor_values;
            std::size_t scanned = 0;
            while (donor_values.size() < k) {
                ensure_neighbors(scanned + 1);
                if (scanned >= neighbors.size()) break;  // exhausted the dataset
                const Neighbor& nb = neighbors[scanned++];
                const UnitRecord& donor = ds.units[row_of.at(nb.id)];
                if (!donor.features[j]) continue;
                donor_values.push_back(*donor.features[j]);
                cell.donor_ids.push_back(nb.id);
                if (scanned > k) cell.widened = true;
            }
            if (donor_values.empty())
                throw std::runtime_error("impute_knn: no donors for feature '" +
                                         ds.schema[j].name + "' at unit '" + u.id + "'");

            if (ds.schema[j].kind == FeatureKind::Binary) {
                std::size_t ones = 0;
                for (double v : donor_values)
                    if (v == 1.0) ++ones;
                // Tie resolves to 0.
                cell.rule = "mode";
                cell.value = (2 * ones > donor_values.size()) ? 1.0 : 0.0;
            } else {
                double sum = 0;
                for (double v : donor_values) sum += v;
                cell.rule = "mean";
                cell.value = sum / static_cast<double>(donor_values.size());
            }

            out.units[i].features[j] = cell.value;
            ++report.imputed_per_feature[j];
            report.cells.push_back(std::move(cell));
        }
    }
    return {std::move(out), std::move(report)};
}

}  // namespace geoscreen
