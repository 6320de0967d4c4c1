#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "geoscreen/core.hpp"

namespace geoscreen {

// The default 13-variable schema (11 input covariates plus the two
// accessibility columns appended after feature construction).
Schema default_input_schema();

struct ParseResult {
    Dataset dataset;
    ValidationReport report;
};

// Parses the units CSV: header `id,lat,lon,rate_y1,rate_y2,<features...>`.
// Empty cell = missing. Malformed rows are recorded in the report and
// skipped; a missing required header throws. Units are returned sorted by
// id so downstream results do not depend on file row order.
ParseResult parse_units(std::istream& in, const Schema& schema);

// Parses `id,lat,lon`. Throws on a bad header; bad rows throw too
// (facility files are machine-generated, not survey data).
FacilitySet parse_facilities(std::istream& in);

// Writes the dataset back in the parse_units format (bit-exact round trip).
void write_units(std::ostream& out, const Dataset& ds);
void write_facilities(std::ostream& out, const FacilitySet& fs);

// Retains exactly the units with both rates present; order preserved.
Dataset filter_eligible(const Dataset& ds);

// response[i] = (rate_y1 + rate_y2) / 2. Throws naming the offending unit
// if a rate is missing.
Dataset build_response(const Dataset& ds);

enum class SynthScenario { PlantedHotspot, LinearResponse, NonlinearResponse };

SynthScenario parse_scenario(const std::string& name);  // throws on unknown name
std::string scenario_name(SynthScenario s);

struct SynthOptions {
    double noise_sd = 1.0;        // response / rate noise scale
    double missing_rate = 0.05;   // per covariate cell
    double rate_missing_rate = 0.04;  // chance a unit loses one rate
    double hotspot_delta_sd = 3.0;    // planted block lift, in noise SDs
    double grid_spacing_miles = 5.0;
};

struct GroundTruth {
    SynthScenario scenario = SynthScenario::PlantedHotspot;
    std::vector<std::string> block_ids;       // planted hotspot members
    std::vector<std::string> block_core_ids;  // members with a full in-block ring
    double delta = 0.0;                       // response lift applied to the block
    double noise_sd = 0.0;
    double intercept = 0.0;
    std::map<std::string, double> coefficients;  // feature name -> beta

    // Recomputes the noiseless response for one unit's (pre-missingness)
    // feature values under this ground truth.
    double eval_response(const Schema& schema,
                         const std::vector<double>& feature_values) const;
};

struct SynthData {
    Dataset dataset;
    FacilitySet facilities;
    GroundTruth truth;
};

// Deterministic synthetic generator: units on a jittered grid, facilities
// scattered over the same extent, responses per scenario. Pure function of
// its arguments.
SynthData synth_generate(std::size_t n_units, std::size_t n_facilities,
                         std::uint64_t seed, SynthScenario scenario,
                         const SynthOptions& opts = {});

// Per-variable summary in the shape of a descriptive-statistics table:
// mean/SD/missing count for numeric columns, category counts for binary.
struct ColumnSummary {
    std::string name;
    bool binary = false;
    std::size_t missing = 0;
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count_zero = 0;  // binary only
    std::size_t count_one = 0;
};

struct DatasetSummary {
    std::size_t n_units = 0;
    ColumnSummary rate_y1;
    ColumnSummary rate_y2;
    std::vector<ColumnSummary> features;
};

DatasetSummary summarize(const Dataset& ds);

}  // namespace geoscreen
