#include "geoscreen/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "geoscreen/csv.hpp"
#include "geoscreen/geo.hpp"
#include "geoscreen/rng.hpp"

namespace geoscreen {

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kMilesPerLatDeg = kPi * kEarthRadiusMiles / 180.0;

double clampd(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }
}  // namespace

Schema default_input_schema() {
    return {
        {"urban_rural", FeatureKind::Binary, "urban (1) or rural (0) location"},
        {"population_density", FeatureKind::Numeric, "people per square mile"},
        {"women_55_plus_pct", FeatureKind::Numeric, "percent of female population aged 55+"},
        {"poverty_rate", FeatureKind::Numeric, "percent of people living in poverty"},
        {"uninsured_pct", FeatureKind::Numeric, "percent without health insurance"},
        {"higher_education_pct", FeatureKind::Numeric, "percent aged 25+ with a bachelor's degree or higher"},
        {"black_pct", FeatureKind::Numeric, "percent Black or African American"},
        {"hispanic_pct", FeatureKind::Numeric, "percent Hispanic or Latino"},
        {"home_value", FeatureKind::Numeric, "median owner-occupied home value (USD)"},
        {"social_vulnerability_index", FeatureKind::Numeric, "social vulnerability index"},
        {"primary_care_shortage", FeatureKind::Binary, "primary care shortage area status"},
    };
}

ParseResult parse_units(std::istream& in, const Schema& schema) {
    ParseResult result;
    result.dataset.schema = schema;
    result.report.missing_per_column.assign(schema.size(), 0);

    std::string line;
    do {
        if (!csv::read_line(in, line))
            throw std::runtime_error("units CSV: empty input, header required");
    } while (!line.empty() && line[0] == '#');  // metadata comment lines

    const auto header = csv::split_row(line);
    std::vector<std::string> expected = {"id", "lat", "lon", "rate_y1", "rate_y2"};
    for (const auto& f : schema) expected.push_back(f.name);
    if (header.size() != expected.size())
        throw std::runtime_error("units CSV: header has " + std::to_string(header.size()) +
                                 " columns, expected " + std::to_string(expected.size()));
    for (std::size_t j = 0; j < expected.size(); ++j)
        if (header[j] != expected[j])
            throw std::runtime_error("units CSV: header column " + std::to_string(j + 1) +
                                     " is '" + header[j] + "', expected '" + expected[j] + "'");

    std::unordered_set<std::string> seen_ids;
    std::size_t lineno = 1;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = csv::split_row(line);
        if (fields.size() != expected.size()) {
            result.report.row_errors.push_back({lineno, "wrong field count"});
            continue;
        }

        UnitRecord u;
        u.id = fields[0];
        bool bad = false;
        auto fail = [&](const std::string& msg) {
            result.report.row_errors.push_back({lineno, msg});
            bad = true;
        };

        if (u.id.empty()) fail("empty id");
        else if (!seen_ids.insert(u.id).second) fail("duplicate id '" + u.id + "'");

        double lat = 0, lon = 0;
        if (!bad && (!csv::parse_double(fields[1], lat) || !csv::parse_double(fields[2], lon)))
            fail("bad coordinate");
        if (!bad) {
            try {
                u.centroid = GeoPoint(lat, lon);
            } catch (const std::invalid_argument&) {
                fail("bad coordinate");
            }
        }

        auto parse_rate = [&](const std::string& cell, std::optional<double>& out) {
            if (bad) return;
            if (cell.empty()) return;  // missing, retained pre-filter
            double v = 0;
            if (!csv::parse_double(cell, v)) { fail("unparseable rate"); return; }
            if (v < 0.0 || v > 100.0) { fail("out-of-range rate"); return; }
            out = v;
        };
        parse_rate(fields[3], u.rate_y1);
        parse_rate(fields[4], u.rate_y2);

        u.features.resize(schema.size());
        for (std::size_t j = 0; j < schema.size() && !bad; ++j) {
            const std::string& cell = fields[5 + j];
            if (cell.empty()) continue;
            double v = 0;
            if (!csv::parse_double(cell, v)) {
                fail("unparseable value in column '" + schema[j].name + "'");
                break;
            }
            if (schema[j].kind == FeatureKind::Binary && v != 0.0 && v != 1.0) {
                fail("non-binary value in column '" + schema[j].name + "'");
                break;
            }
            u.features[j] = v;
        }
        if (bad) continue;

        for (std::size_t j = 0; j < schema.size(); ++j)
            if (!u.features[j]) ++result.report.missing_per_column[j];
        if (!u.rate_y1) ++result.report.missing_rate_y1;
        if (!u.rate_y2) ++result.report.missing_rate_y2;
        if (u.rate_y1 && u.rate_y2) ++result.report.eligible;
        else ++result.report.ineligible;
        result.dataset.units.push_back(std::move(u));
    }

    // Canonical order: sorted by id, so every downstream artifact is
    // independent of input row order.
    std::sort(result.dataset.units.begin(), result.dataset.units.end(),
              [](const UnitRecord& a, const UnitRecord& b) { return a.id < b.id; });
    return result;
}

FacilitySet parse_facilities(std::istream& in) {
    std::string line;
    do {
        if (!csv::read_line(in, line))
            throw std::runtime_error("facilities CSV: empty input, header required");
    } while (!line.empty() && line[0] == '#');
    const auto header = csv::split_row(line);
    if (header.size() != 3 || header[0] != "id" || header[1] != "lat" || header[2] != "lon")
        throw std::runtime_error("facilities CSV: header must be id,lat,lon");

    FacilitySet fs;
    std::unordered_set<std::string> seen;
    std::size_t lineno = 1;
    while (csv::read_line(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto fields = csv::split_row(line);
        if (fields.size() != 3)
            throw std::runtime_error("facilities CSV line " + std::to_string(lineno) +
                                     ": wrong field count");
        double lat = 0, lon = 0;
        if (fields[0].empty() || !seen.insert(fields[0]).second)
            throw std::runtime_error("facilities CSV line " + std::to_string(lineno) +
                                     ": missing or duplicate id");
        if (!csv::parse_double(fields[1], lat) || !csv::parse_double(fields[2], lon))
            throw std::runtime_error("facilities CSV line " + std::to_string(lineno) +
                                     ": bad coordinate");
        fs.facilities.push_back({fields[0], GeoPoint(lat, lon)});
    }
    std::sort(fs.facilities.begin(), fs.facilities.end(),
              [](const FacilityRecord& a, const FacilityRecord& b) { return a.id < b.id; });
    return fs;
}

namespace {
std::string cell(const std::optional<double>& v) {
    return v ? csv::format_double(*v) : std::string();
}
}  // namespace

void write_units(std::ostream& out, const Dataset& ds) {
    out << "id,lat,lon,rate_y1,rate_y2";
    for (const auto& f : ds.schema) out << ',' << csv::quote_field(f.name);
    out << '\n';
    for (const auto& u : ds.units) {
        out << csv::quote_field(u.id) << ',' << csv::format_double(u.centroid.lat) << ','
            << csv::format_double(u.centroid.lon) << ',' << cell(u.rate_y1) << ','
            << cell(u.rate_y2);
        for (const auto& v : u.features) out << ',' << cell(v);
        out << '\n';
    }
}

void write_facilities(std::ostream& out, const FacilitySet& fs) {
    out << "id,lat,lon\n";
    for (const auto& f : fs.facilities)
        out << csv::quote_field(f.id) << ',' << csv::format_double(f.location.lat) << ','
            << csv::format_double(f.location.lon) << '\n';
}

Dataset filter_eligible(const Dataset& ds) {
    Dataset out;
    out.schema = ds.schema;
    for (const auto& u : ds.units)
        if (u.rate_y1 && u.rate_y2) out.units.push_back(u);
    return out;
}

Dataset build_response(const Dataset& ds) {
    Dataset out = ds;
    out.response.clear();
    out.response.reserve(ds.units.size());
    for (const auto& u : ds.units) {
        if (!u.rate_y1 || !u.rate_y2)
            throw std::runtime_error("build_response: unit '" + u.id + "' has a missing rate");
        out.response.push_back((*u.rate_y1 + *u.rate_y2) / 2.0);
    }
    return out;
}

SynthScenario parse_scenario(const std::string& name) {
    if (name == "planted_hotspot") return SynthScenario::PlantedHotspot;
    if (name == "linear_response") return SynthScenario::LinearResponse;
    if (name == "nonlinear_response") return SynthScenario::NonlinearResponse;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

std::string scenario_name(SynthScenario s) {
    switch (s) {
        case SynthScenario::PlantedHotspot: return "planted_hotspot";
        case SynthScenario::LinearResponse: return "linear_response";
        case SynthScenario::NonlinearResponse: return "nonlinear_response";
    }
    return "unknown";
}

double GroundTruth::eval_response(const Schema& schema,
                                  const std::vector<double>& feature_values) const {
    auto value_of = [&](const std::string& name) {
        for (std::size_t j = 0; j < schema.size(); ++j)
            if (schema[j].name == name) return feature_values[j];
        throw std::runtime_error("eval_response: feature '" + name + "' not in schema");
    };
    switch (scenario) {
        case SynthScenario::PlantedHotspot:
            return intercept;
        case SynthScenario::LinearResponse: {
            double r = intercept;
            for (const auto& [name, beta] : coefficients) r += beta * value_of(name);
            return r;
        }
        case SynthScenario::NonlinearResponse: {
            // Interaction and curvature terms a linear model cannot fit.
            const double p = value_of("poverty_rate") / 60.0;
            const double e = value_of("higher_education_pct") / 95.0;
            const double s = value_of("social_vulnerability_index");
            const double u = value_of("uninsured_pct") / 60.0;
            return intercept + coefficients.at("poverty_x_highered") * (p - 0.27) * (e - 0.30) +
                   coefficients.at("svi_curvature") * (s - 0.60) * (s - 0.60) +
                   coefficients.at("uninsured_linear") * u;
        }
    }
    return intercept;
}

SynthData synth_generate(std::size_t n_units, std::size_t n_facilities, std::uint64_t seed,
                         SynthScenario scenario, const SynthOptions& opts) {
    if (n_units < 4) throw std::invalid_argument("synth_generate: n_units must be >= 4");

    SynthData out;
    out.dataset.schema = default_input_schema();
    const Schema& schema = out.dataset.schema;

    GroundTruth& gt = out.truth;
    gt.scenario = scenario;
    gt.noise_sd = opts.noise_sd;
    switch (scenario) {
        case SynthScenario::PlantedHotspot:
            gt.intercept = 75.0;
            gt.delta = opts.hotspot_delta_sd * opts.noise_sd;
            break;
        case SynthScenario::LinearResponse:
            gt.intercept = 72.0;
            gt.coefficients = {
                {"poverty_rate", -0.10},       {"higher_education_pct", 0.08},
                {"uninsured_pct", -0.08},      {"black_pct", 0.05},
                {"hispanic_pct", -0.03},       {"social_vulnerability_index", -2.0},
            };
            break;
        case SynthScenario::NonlinearResponse:
            gt.intercept = 70.0;
            gt.coefficients = {
                {"poverty_x_highered", 80.0},
                {"svi_curvature", -25.0},
                {"uninsured_linear", -4.0},
            };
            break;
    }

    Rng rng(derive_seed(seed, 0x5EED));

    const std::size_t grid = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(n_units))));
    const double lat0 = 35.0, lon0 = -90.0;
    const double lat_step = opts.grid_spacing_miles / kMilesPerLatDeg;
    const double lon_step = opts.grid_spacing_miles /
                            (kMilesPerLatDeg * std::cos(lat0 * kPi / 180.0));

    // Planted block: a contiguous square kept one cell away from the grid
    // edge; the core is the block minus its one-cell boundary ring.
    std::size_t block_r0 = 0, block_c0 = 0, block_side = 0;
    if (scenario == SynthScenario::PlantedHotspot) {
        block_side = std::max<std::size_t>(2, grid * 3 / 10);
        const std::size_t span = grid > block_side + 2 ? grid - block_side - 2 : 0;
        block_r0 = 1 + (span ? rng.next_below(span) : 0);
        block_c0 = 1 + (span ? rng.next_below(span) : 0);
    }
    auto in_block = [&](std::size_t r, std::size_t c) {
        return scenario == SynthScenario::PlantedHotspot && r >= block_r0 &&
               r < block_r0 + block_side && c >= block_c0 && c < block_c0 + block_side;
    };
    auto in_core = [&](std::size_t r, std::size_t c) {
        return in_block(r, c) && r > block_r0 && r + 1 < block_r0 + block_side &&
               c > block_c0 && c + 1 < block_c0 + block_side;
    };

    char idbuf[24];
    for (std::size_t i = 0; i < n_units; ++i) {
        const std::size_t r = i / grid, c = i % grid;
        std::snprintf(idbuf, sizeof(idbuf), "U%05zu", i);

        UnitRecord u;
        u.id = idbuf;
        const double jlat = (rng.next_double() - 0.5) * 0.2 * lat_step;
        const double jlon = (rng.next_double() - 0.5) * 0.2 * lon_step;
        u.centroid = GeoPoint(lat0 + static_cast<double>(r) * lat_step + jlat,
                              lon0 + static_cast<double>(c) * lon_step + jlon);

        std::vector<double> truevals(schema.size());
        truevals[0] = rng.next_double() < 0.75 ? 1.0 : 0.0;                       // urban_rural
        truevals[1] = clampd(std::exp(6.0 + 1.5 * rng.next_normal()), 1.0, 8e4);  // pop density
        truevals[2] = clampd(7.9 + 4.0 * rng.next_normal(), 0.0, 60.0);
        truevals[3] = clampd(16.3 + 12.5 * rng.next_normal(), 0.0, 60.0);  // poverty
        truevals[4] = clampd(11.5 + 7.8 * rng.next_normal(), 0.0, 60.0);   // uninsured
        truevals[5] = clampd(28.4 + 18.6 * rng.next_normal(), 0.0, 95.0);  // higher ed
        truevals[6] = clampd(15.2 + 23.6 * rng.next_normal(), 0.0, 100.0);
        truevals[7] = clampd(12.7 + 18.5 * rng.next_normal(), 0.0, 100.0);
        truevals[8] = clampd(203834.0 + 170438.0 * rng.next_normal(), 2e4, 2e6);
        truevals[9] = clampd(0.59 + 0.28 * rng.next_normal(), 0.0, 1.0);
        truevals[10] = rng.next_double() < 0.57 ? 1.0 : 0.0;

        double resp = gt.eval_response(schema, truevals);
        if (in_block(r, c)) resp += gt.delta;
        resp += opts.noise_sd * rng.next_normal();

        // Antisymmetric rate noise keeps the two-year mean equal to resp.
        const double split_noise = 0.3 * opts.noise_sd * rng.next_normal();
        u.rate_y1 = clampd(resp + split_noise, 0.0, 100.0);
        u.rate_y2 = clampd(resp - split_noise, 0.0, 100.0);

        // Eligibility gaps outside the planted block.
        const double gap_draw = rng.next_double();
        if (!in_block(r, c) && gap_draw < opts.rate_missing_rate) {
            if (rng.next_double() < 0.5) u.rate_y1.reset();
            else u.rate_y2.reset();
        } else {
            rng.next_double();  // keep the draw sequence aligned
        }

        u.features.resize(schema.size());
        for (std::size_t j = 0; j < schema.size(); ++j) {
            if (rng.next_double() < opts.missing_rate) continue;  // missing cell
            u.features[j] = truevals[j];
        }

        if (in_block(r, c)) gt.block_ids.push_back(u.id);
        if (in_core(r, c)) gt.block_core_ids.push_back(u.id);
        out.dataset.units.push_back(std::move(u));
    }

    const double lat_span = static_cast<double>(grid) * lat_step;
    const double lon_span = static_cast<double>(grid) * lon_step;
    for (std::size_t i = 0; i < n_facilities; ++i) {
        std::snprintf(idbuf, sizeof(idbuf), "F%05zu", i);
        out.facilities.facilities.push_back(
            {idbuf, GeoPoint(lat0 + rng.next_double() * lat_span,
                             lon0 + rng.next_double() * lon_span)});
    }
    return out;
}

DatasetSummary summarize(const Dataset& ds) {
    DatasetSummary s;
    s.n_units = ds.units.size();

    auto summarize_col = [&](const std::string& name, bool binary, auto getter) {
        ColumnSummary col;
        col.name = name;
        col.binary = binary;
        double sum = 0, sumsq = 0;
        std::size_t n = 0;
        for (const auto& u : ds.units) {
            const std::optional<double> v = getter(u);
            if (!v) {
                ++col.missing;
                continue;
            }
            ++n;
            sum += *v;
            sumsq += *v * *v;
            if (binary) {
                if (*v == 0.0) ++col.count_zero;
                else ++col.count_one;
            }
        }
        if (n > 0) col.mean = sum / static_cast<double>(n);
        if (n > 1) {
            const double ss = sumsq - sum * sum / static_cast<double>(n);
            col.sd = std::sqrt(std::max(0.0, ss / static_cast<double>(n - 1)));
        }
        return col;
    };

    s.rate_y1 = summarize_col("rate_y1", false, [](const UnitRecord& u) { return u.rate_y1; });
    s.rate_y2 = summarize_col("rate_y2", false, [](const UnitRecord& u) { return u.rate_y2; });
    for (std::size_t j = 0; j < ds.schema.size(); ++j)
        s.features.push_back(summarize_col(
            ds.schema[j].name, ds.schema[j].kind == FeatureKind::Binary,
            [j](const UnitRecord& u) { return u.features[j]; }));
    return s;
}

}  // namespace geoscreen
