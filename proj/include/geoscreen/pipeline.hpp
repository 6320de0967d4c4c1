#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "geoscreen/serialize.hpp"

namespace geoscreen {

// exit code 4
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// exit code 2
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// exit code 3; carries the failing stage name
struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string stage_name, const std::string& cause)
        : std::runtime_error("stage '" + stage_name + "' failed: " + cause),
          stage(std::move(stage_name)) {}
};

struct RunConfig {
    std::string units_csv;
    std::string facilities_csv;
    std::string geometry_geojson;  // optional
    std::string out_dir = "out";

    Schema schema;  // defaults to the 13-variable input schema

    std::size_t impute_k = 20;
    double catchment_miles = 10.0;

    std::string weights_scheme = "knn";  // "knn" or "distance_band"
    std::size_t weights_k = 8;
    double weights_distance_miles = 30.0;
    double bh_alpha = 0.0;  // 0 disables Benjamini-Hochberg adjustment
    std::size_t jenks_k = 5;

    double split_frac = 0.75;
    std::size_t cv_folds = 5;
    std::vector<std::size_t> grid_n_trees = {100, 300, 500};
    std::vector<std::size_t> grid_mtry = {2, 4, 6, 8};
    std::size_t min_leaf = 5;
    std::size_t max_depth = 0;
    SvrConfig svr;

    std::size_t shap_background = 100;
    double shap_threshold = 0.3;

    std::uint64_t seed = 12345;
    std::size_t threads = 1;
};

RunConfig config_from_json(const json& j);
json config_to_json(const RunConfig& c);
RunConfig load_config(const std::string& path);  // throws ConfigError
std::string config_hash(const RunConfig& c);

// Stage entry points. Each writes its artifacts under c.out_dir and throws
// ValidationError / StageError / ConfigError on failure.
void cmd_validate(const RunConfig& c);
void cmd_synth(const RunConfig& c, std::size_t n_units, std::size_t n_facilities,
               const std::string& scenario);
void cmd_impute(const RunConfig& c);
void cmd_hotspot(const RunConfig& c);
void cmd_classify(const RunConfig& c);
void cmd_train(const RunConfig& c);
void cmd_explain(const RunConfig& c);

// The whole pipeline: validate -> filter -> accessibility -> summary ->
// impute -> Gi* + classify -> Jenks -> split -> grid search -> train ->
// evaluate -> SHAP -> manifest. Byte-identical artifacts for a fixed
// (inputs, config, seed), for any thread count.
void cmd_pipeline(const RunConfig& c);

}  // namespace geoscreen
