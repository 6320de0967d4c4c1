#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "geoscreen/pipeline.hpp"

namespace {

using geoscreen::json;

// `--set path.to.field=value` overrides one config field; the value is
// parsed as JSON when possible, otherwise taken as a string.
void apply_overrides(json& cfg, const std::vector<std::string>& sets) {
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw geoscreen::ConfigError("--set expects path=value, got '" + kv + "'");
        std::string path = kv.substr(0, eq);
        const std::string raw = kv.substr(eq + 1);
        json value = json::parse(raw, nullptr, false);
        if (value.is_discarded()) value = raw;

        json* node = &cfg;
        std::size_t pos = 0;
        for (;;) {
            const auto dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot - pos);
            if (dot == std::string::npos) {
                (*node)[key] = value;
                break;
            }
            node = &(*node)[key];
            pos = dot + 1;
        }
    }
}

geoscreen::RunConfig make_config(const std::string& config_path,
                                 const std::vector<std::string>& sets) {
    json cfg = json::object();
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("GEOSCREEN_CONFIG")) path = env;
    }
    if (!path.empty()) {
        // parse errors surface as ConfigError via load_config; we re-read
        // raw here so --set can patch the document before validation
        std::ifstream in(path);
        if (!in) throw geoscreen::ConfigError("config file not found: " + path);
        cfg = json::parse(in, nullptr, false);
        if (cfg.is_discarded())
            throw geoscreen::ConfigError("config file is not valid JSON: " + path);
    }
    apply_overrides(cfg, sets);
    return geoscreen::config_from_json(cfg);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"geospatial screening-disparity analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("-c,--config", config_path,
                   "JSON config file (default: $GEOSCREEN_CONFIG)");
    app.add_option("--set", sets, "override a config field, e.g. --set weights.k=6");

    auto* validate = app.add_subcommand("validate", "parse and validate the input CSVs");
    auto* pipeline = app.add_subcommand("pipeline", "run the full analysis pipeline");
    auto* hotspot = app.add_subcommand("hotspot", "Gi* hot/cold-spot detection per rate column");
    auto* classify = app.add_subcommand("classify", "Jenks natural-breaks classification");
    auto* impute = app.add_subcommand("impute", "accessibility features + spatial kNN imputation");
    auto* train = app.add_subcommand("train", "grid search, model training and comparison");
    auto* explain = app.add_subcommand("explain", "SHAP attribution for the trained forest");

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::size_t synth_units = 400, synth_facilities = 40;
    std::string synth_scenario = "planted_hotspot";
    synth->add_option("--units", synth_units, "number of units");
    synth->add_option("--facilities", synth_facilities, "number of facilities");
    synth->add_option("--scenario", synth_scenario,
                      "planted_hotspot | linear_response | nonlinear_response");

    CLI11_PARSE(app, argc, argv);

    try {
        const geoscreen::RunConfig cfg = make_config(config_path, sets);
        if (validate->parsed()) geoscreen::cmd_validate(cfg);
        else if (pipeline->parsed()) geoscreen::cmd_pipeline(cfg);
        else if (hotspot->parsed()) geoscreen::cmd_hotspot(cfg);
        else if (classify->parsed()) geoscreen::cmd_classify(cfg);
        else if (impute->parsed()) geoscreen::cmd_impute(cfg);
        else if (train->parsed()) geoscreen::cmd_train(cfg);
        else if (explain->parsed()) geoscreen::cmd_explain(cfg);
        else if (synth->parsed())
            geoscreen::cmd_synth(cfg, synth_units, synth_facilities, synth_scenario);
    } catch (const geoscreen::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 4;
    } catch (const geoscreen::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const geoscreen::StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
