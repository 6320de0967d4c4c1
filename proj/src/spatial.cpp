#include "geoscreen/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace geoscreen {

SpatialWeights weights_knn(const std::vector<GeoPoint>& points,
                           const std::vector<std::string>& ids, std::size_t k,
                           bool self_inclusive) {
    const std::size_t n = points.size();
    if (k == 0) throw std::invalid_argument("weights_knn: k must be >= 1");
    if (n <= k) throw std::invalid_argument("weights_knn: need n > k");

    const SpatialIndex index = SpatialIndex::build(ids, points);
    std::unordered_map<std::string, int> row_of;
    row_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i) row_of.emplace(ids[i], static_cast<int>(i));

    SpatialWeights w;
    w.self_inclusive = self_inclusive;
    w.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = w.rows[i];
        if (self_inclusive) row.push_back({static_cast<int>(i), 1.0});
        // Ask for k+1 and drop self: the query point is an indexed point.
        const auto nn = index.k_nearest(points[i], k + 1);
        std::size_t taken = 0;
        for (const auto& nb : nn) {
            if (nb.id == ids[i]) continue;
            if (taken++ == k) break;
            row.push_back({row_of.at(nb.id), 1.0});
        }
    }
    return w;
}

SpatialWeights weights_distance_band(const std::vector<GeoPoint>& points,
                                     const std::vector<std::string>& ids, double d_miles,
                                     bool self_inclusive) {
    if (!(d_miles > 0.0)) throw std::invalid_argument("weights_distance_band: d must be > 0");
    const std::size_t n = points.size();
    const SpatialIndex index = SpatialIndex::build(ids, points);
    std::unordered_map<std::string, int> row_of;
    row_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i) row_of.emplace(ids[i], static_cast<int>(i));

    SpatialWeights w;
    w.self_inclusive = self_inclusive;
    w.rows.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& row = w.rows[i];
        if (self_inclusive) row.push_back({static_cast<int>(i), 1.0});
        for (const auto& nb : index.within_radius(points[i], d_miles)) {
            if (nb.id == ids[i]) continue;
            row.push_back({row_of.at(nb.id), 1.0});
        }
    }
    return w;
}

GiResult gi_star(const std::vector<double>& values, const SpatialWeights& weights) {
    const std::size_t n = values.size();
    if (n < 3) throw std::invalid_argument("gi_star: need n >= 3");
    if (weights.size() != n) throw std::invalid_argument("gi_star: weights/values size mismatch");
    if (!weights.self_inclusive)
        throw std::invalid_argument("gi_star: weights must be self-inclusive");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("gi_star: non-finite value");

    const double nd = static_cast<double>(n);
    double sum = 0, sumsq = 0;
    for (double v : values) {
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / nd;
    const double var = std::max(0.0, sumsq / nd - mean * mean);
    const double s = std::sqrt(var);
    if (s == 0.0) throw std::runtime_error("gi_star: degenerate variance (all values equal)");

    GiResult res;
    res.z.assign(n, 0.0);
    res.p.assign(n, 1.0);
    res.defined.assign(n, true);
    for (std::size_t i = 0; i < n; ++i) {
        double wx = 0, wsum = 0, wsq = 0;
        for (const auto& e : weights.rows[i]) {
            wx += e.weight * values[static_cast<std::size_t>(e.neighbor)];
            wsum += e.weight;
            wsq += e.weight * e.weight;
        }
        const double bracket = (nd * wsq - wsum * wsum) / (nd - 1.0);
        if (bracket <= 0.0) {
            res.defined[i] = false;
            res.z[i] = std::numeric_limits<double>::quiet_NaN();
            res.p[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const double z = (wx - mean * wsum) / (s * std::sqrt(bracket));
        res.z[i] = z;
        res.p[i] = std::min(1.0, 2.0 * (1.0 - normal_cdf(std::fabs(z))));
        if (res.p[i] <= 0.0) res.p[i] = std::numeric_limits<double>::min();
    }
    return res;
}

double normal_cdf(double x) {
    // Zelen & Severo (A&S 26.2.17): Phi(x) = 1 - phi(x) (b1 t + ... + b5 t^5),
    // t = 1 / (1 + p x), x >= 0.
    constexpr double p = 0.2316419;
    constexpr double b1 = 0.319381530;
    constexpr double b2 = -0.356563782;
    constexpr double b3 = 1.781477937;
    constexpr double b4 = -1.821255978;
    constexpr double b5 = 1.330274429;
    constexpr double inv_sqrt_2pi = 0.3989422804014327;

    const double ax = std::fabs(x);
    const double t = 1.0 / (1.0 + p * ax);
    const double poly = t * (b1 + t * (b2 + t * (b3 + t * (b4 + t * b5))));
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * ax * ax);
    const double tail = pdf * poly;
    return x >= 0.0 ? 1.0 - tail : tail;
}

std::string hotspot_class_name(HotspotClass c) {
    switch (c) {
        case HotspotClass::Hot99: return "Hot99";
        case HotspotClass::Hot95: return "Hot95";
        case HotspotClass::Hot90: return "Hot90";
        case HotspotClass::NotSignificant: return "NotSignificant";
        case HotspotClass::Cold90: return "Cold90";
        case HotspotClass::Cold95: return "Cold95";
        case HotspotClass::Cold99: return "Cold99";
    }
    return "NotSignificant";
}

std::vector<double> bh_adjust(const std::vector<double>& pvalues) {
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<double> adjusted(n, 1.0);
    double running = 1.0;
    for (std::size_t r = n; r-- > 0;) {
        const std::size_t i = order[r];
        const double q = pvalues[i] * static_cast<double>(n) / static_cast<double>(r + 1);
        running = std::min(running, q);
        adjusted[i] = running;
    }
    return adjusted;
}

HotspotAssignment classify_hotspots(const GiResult& gi, double bh_alpha) {
    const std::size_t n = gi.z.size();
    HotspotAssignment out;
    out.classes.assign(n, HotspotClass::NotSignificant);
    out.undefined_flag.assign(n, false);

    std::vector<double> adj;
    if (bh_alpha > 0.0) {
        // Undefined units enter the BH ranking with p = 1 (never significant).
        std::vector<double> ps(n, 1.0);
        for (std::size_t i = 0; i < n; ++i)
            if (gi.defined[i]) ps[i] = gi.p[i];
        adj = bh_adjust(ps);
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (!gi.defined[i]) {
            out.undefined_flag[i] = true;
            continue;
        }
        const double z = gi.z[i];
        int tier = 0;  // 0 = not significant, 1 = 90%, 2 = 95%, 3 = 99%
        if (bh_alpha > 0.0) {
            if (adj[i] <= 0.01) tier = 3;
            else if (adj[i] <= 0.05) tier = 2;
            else if (adj[i] <= 0.10) tier = 1;
        } else {
            const double az = std::fabs(z);
            if (az >= 2.576) tier = 3;
            else if (az >= 1.960) tier = 2;
            else if (az >= 1.645) tier = 1;
        }
        if (tier == 0) continue;
        if (z > 0) {
            out.classes[i] = tier == 3 ? HotspotClass::Hot99
                           : tier == 2 ? HotspotClass::Hot95
                                       : HotspotClass::Hot90;
        } else {
            out.classes[i] = tier == 3 ? HotspotClass::Cold99
                           : tier == 2 ? HotspotClass::Cold95
                                       : HotspotClass::Cold90;
        }
    }
    return out;
}

JenksBreaks jenks_breaks(const std::vector<double>& values, std::size_t k) {
    if (values.empty()) throw std::invalid_argument("jenks_breaks: empty input");
    if (k == 0) throw std::invalid_argument("jenks_breaks: k must be >= 1");

    // Group duplicates: DP runs over distinct sorted values with counts.
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> vals;
    std::vector<double> cnts;
    for (double v : sorted) {
        if (!vals.empty() && vals.back() == v) cnts.back() += 1.0;
        else {
            vals.push_back(v);
            cnts.push_back(1.0);
        }
    }
    const std::size_t u = vals.size();
    if (k > u)
        throw std::invalid_argument("jenks_breaks: k exceeds the number of distinct values");

    // Weighted prefix sums for O(1) within-class SSD.
    std::vector<double> pw(u + 1, 0), pwv(u + 1, 0), pwv2(u + 1, 0);
    for (std::size_t i = 0; i < u; ++i) {
        pw[i + 1] = pw[i] + cnts[i];
        pwv[i + 1] = pwv[i] + cnts[i] * vals[i];
        pwv2[i + 1] = pwv2[i] + cnts[i] * vals[i] * vals[i];
    }
    auto ssd = [&](std::size_t lo, std::size_t hi) {  // distinct indices [lo, hi]
        const double w = pw[hi + 1] - pw[lo];
        const double sv = pwv[hi + 1] - pwv[lo];
        const double sv2 = pwv2[hi + 1] - pwv2[lo];
        return std::max(0.0, sv2 - sv * sv / w);
    };

    constexpr double inf = std::numeric_limits<double>::infinity();
    // cost[m][j]: best total SSD splitting the first j+1 distinct values
    // into m+1 classes; cut[m][j] records the start of the last class.
    std::vector<std::vector<double>> cost(k, std::vector<double>(u, inf));
    std::vector<std::vector<std::size_t>> cut(k, std::vector<std::size_t>(u, 0));
    for (std::size_t j = 0; j < u; ++j) cost[0][j] = ssd(0, j);
    for (std::size_t m = 1; m < k; ++m) {
        for (std::size_t j = m; j < u; ++j) {
            for (std::size_t i = m; i <= j; ++i) {
                const double c = cost[m - 1][i - 1] + ssd(i, j);
                if (c < cost[m][j]) {
                    cost[m][j] = c;
                    cut[m][j] = i;
                }
            }
        }
    }

    JenksBreaks out;
    out.ssd = cost[k - 1][u - 1];
    std::vector<double> maxima(k);
    std::size_t j = u - 1;
    for (std::size_t m = k; m-- > 0;) {
        maxima[m] = vals[j];
        if (m == 0) break;
        j = cut[m][j] - 1;
    }
    out.breaks = std::move(maxima);
    return out;
}

std::vector<int> assign_classes(const std::vector<double>& values,
                                const std::vector<double>& breaks, std::size_t* clamped_count) {
    if (breaks.empty()) throw std::invalid_argument("assign_classes: no breaks");
    for (std::size_t i = 1; i < breaks.size(); ++i)
        if (!(breaks[i - 1] < breaks[i]))
            throw std::invalid_argument("assign_classes: breaks must be strictly ascending");

    std::size_t clamped = 0;
    std::vector<int> out;
    out.reserve(values.size());
    for (double v : values) {
        const auto it = std::lower_bound(breaks.begin(), breaks.end(), v);
        if (it == breaks.end()) {
            ++clamped;
            out.push_back(static_cast<int>(breaks.size()) - 1);
        } else {
            out.push_back(static_cast<int>(it - breaks.begin()));
        }
    }
    if (clamped_count) *clamped_count = clamped;
    return out;
}

}  // namespace geoscreen
