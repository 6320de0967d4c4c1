#include "geoscreen/serialize.hpp"

#include <cstdio>

namespace geoscreen {

json to_json(const ValidationReport& r, const Schema& schema) {
    json j;
    j["eligible"] = r.eligible;
    j["ineligible"] = r.ineligible;
    j["missing_rate_y1"] = r.missing_rate_y1;
    j["missing_rate_y2"] = r.missing_rate_y2;
    json cols = json::object();
    for (std::size_t i = 0; i < schema.size(); ++i)
        cols[schema[i].name] = r.missing_per_column[i];
    j["missing_per_column"] = cols;
    json errs = json::array();
    for (const auto& e : r.row_errors)
        errs.push_back({{"line", e.line}, {"message", e.message}});
    j["row_errors"] = errs;
    return j;
}

json to_json(const ImputationReport& r, const Schema& schema) {
    json j;
    j["k"] = r.k;
    json per = json::object();
    for (std::size_t i = 0; i < schema.size(); ++i)
        per[schema[i].name] = r.imputed_per_feature[i];
    j["imputed_per_feature"] = per;
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"unit", c.unit_id},
                         {"feature", schema[c.feature].name},
                         {"rule", c.rule},
                         {"value", c.value},
                         {"widened", c.widened},
                         {"donors", c.donor_ids}});
    j["cells"] = cells;
    return j;
}

namespace {
json column_json(const ColumnSummary& c) {
    json j;
    j["missing"] = c.missing;
    if (c.binary) {
        j["kind"] = "binary";
        j["count_zero"] = c.count_zero;
        j["count_one"] = c.count_one;
    } else {
        j["kind"] = "numeric";
        j["mean"] = c.mean;
        j["sd"] = c.sd;
    }
    return j;
}
}  // namespace

json to_json(const DatasetSummary& s) {
    json j;
    j["n_units"] = s.n_units;
    json cols = json::object();
    cols["rate_y1"] = column_json(s.rate_y1);
    cols["rate_y2"] = column_json(s.rate_y2);
    for (const auto& c : s.features) cols[c.name] = column_json(c);
    j["columns"] = cols;
    return j;
}

json to_json(const ForestConfig& c) {
    return {{"n_trees", c.n_trees},   {"mtry", c.mtry},
            {"min_leaf", c.min_leaf}, {"max_depth", c.max_depth},
            {"bootstrap", c.bootstrap}, {"seed", c.seed}};
}

json to_json(const GridSearchResult& g) {
    json j;
    j["best"] = to_json(g.best);
    json table = json::array();
    for (const auto& cell : g.table)
        table.push_back({{"n_trees", cell.n_trees},
                         {"mtry", cell.mtry},
                         {"fold_rmse", cell.fold_rmse},
                         {"mean_rmse", cell.mean_rmse}});
    j["table"] = table;
    return j;
}

json to_json(const ComparisonReport& r) {
    json j;
    json scores = json::array();
    for (const auto& s : r.scores)
        scores.push_back({{"model", s.model}, {"r2", s.r2}, {"rmse", s.rmse}});
    j["scores"] = scores;
    j["forest_config"] = to_json(r.forest_config);
    j["warnings"] = r.warnings;
    return j;
}

json forest_to_json(const ForestModel& m) {
    json j;
    j["format"] = "geoscreen-forest";
    j["version"] = 1;
    j["n_features"] = m.n_features;
    j["config"] = to_json(m.config);
    j["tree_seeds"] = m.tree_seeds;
    json trees = json::array();
    for (const auto& tree : m.trees) {
        json nodes = json::array();
        for (const auto& nd : tree.nodes) {
            if (nd.is_leaf())
                nodes.push_back({{"value", nd.value}, {"cover", nd.cover}});
            else
                nodes.push_back({{"feature", nd.feature},
                                 {"threshold", nd.threshold},
                                 {"left", nd.left},
                                 {"right", nd.right},
                                 {"cover", nd.cover}});
        }
        trees.push_back({{"nodes", nodes}});
    }
    j["trees"] = trees;
    return j;
}

ForestModel forest_from_json(const json& j) {
    if (j.value("format", "") != "geoscreen-forest" || j.value("version", 0) != 1)
        throw std::runtime_error("forest_from_json: unrecognized model format");

    ForestModel m;
    m.n_features = j.at("n_features").get<std::size_t>();
    const json& c = j.at("config");
    m.config.n_trees = c.at("n_trees").get<std::size_t>();
    m.config.mtry = c.at("mtry").get<std::size_t>();
    m.config.min_leaf = c.at("min_leaf").get<std::size_t>();
    m.config.max_depth = c.at("max_depth").get<std::size_t>();
    m.config.bootstrap = c.at("bootstrap").get<bool>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& tj : j.at("trees")) {
        DecisionTree tree;
        for (const auto& nj : tj.at("nodes")) {
            TreeNode nd;
            nd.cover = nj.at("cover").get<std::size_t>();
            if (nj.contains("feature")) {
                nd.feature = nj.at("feature").get<int>();
                nd.threshold = nj.at("threshold").get<double>();
                nd.left = nj.at("left").get<int>();
                nd.right = nj.at("right").get<int>();
            } else {
                nd.value = nj.at("value").get<double>();
            }
            tree.nodes.push_back(nd);
        }
        m.trees.push_back(std::move(tree));
    }
    return m;
}

json hotspot_geojson(const std::vector<UnitRecord>& units, const GiResult& gi,
                     const HotspotAssignment& classes, const std::vector<int>& jenks_class,
                     const json* geometry_by_id) {
    json fc;
    fc["type"] = "FeatureCollection";
    json features = json::array();
    for (std::size_t i = 0; i < units.size(); ++i) {
        json f;
        f["type"] = "Feature";
        f["id"] = units[i].id;
        json props;
        if (gi.defined[i]) {
            props["z"] = gi.z[i];
            props["p"] = gi.p[i];
        } else {
            props["z"] = nullptr;
            props["p"] = nullptr;
        }
        props["class"] = hotspot_class_name(classes.classes[i]);
        if (!jenks_class.empty()) props["jenks_class"] = jenks_class[i];
        f["properties"] = props;
        if (geometry_by_id && geometry_by_id->contains(units[i].id)) {
            f["geometry"] = geometry_by_id->at(units[i].id);
        } else {
            f["geometry"] = {{"type", "Point"},
                             {"coordinates", {units[i].centroid.lon, units[i].centroid.lat}}};
        }
        features.push_back(std::move(f));
    }
    fc["features"] = std::move(features);
    return fc;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

}  // namespace geoscreen
