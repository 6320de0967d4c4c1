#include "geoscreen/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "geoscreen/csv.hpp"

namespace geoscreen {

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path, const std::string& what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(what + " not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes artifacts with the config hash + master seed embedded, and keeps
// (name, hash) for the manifest.
class ArtifactWriter {
public:
    ArtifactWriter(fs::path dir, std::string cfg_hash, std::uint64_t seed)
        : dir_(std::move(dir)), cfg_hash_(std::move(cfg_hash)), seed_(seed) {}

    void write_csv(const std::string& name, const std::string& body) {
        std::string bytes = "# geoscreen config=" + cfg_hash_ + " seed=" +
                            std::to_string(seed_) + "\n" + body;
        write_raw(name, bytes);
    }

    void write_json(const std::string& name, json j) {
        j["_meta"] = {{"config_hash", cfg_hash_}, {"seed", seed_}};
        write_raw(name, j.dump(2) + "\n");
    }

    void write_raw(const std::string& name, const std::string& bytes) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        if (!out) throw StageError("write", "cannot open artifact " + (dir_ / name).string());
        out << bytes;
        out.close();
        artifacts_.emplace_back(name, fnv1a64_hex(bytes));
    }

    const std::vector<std::pair<std::string, std::string>>& artifacts() const {
        return artifacts_;
    }
    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::string cfg_hash_;
    std::uint64_t seed_ = 0;
    std::vector<std::pair<std::string, std::string>> artifacts_;
};

// No two runs may share an output directory.
class DirLock {
public:
    explicit DirLock(const fs::path& dir) : lock_(dir / ".geoscreen.lock") {
        fs::create_directories(dir);
        if (fs::exists(lock_))
            throw StageError("lock", "output directory is locked by another run: " +
                                         lock_.string());
        std::ofstream out(lock_);
        out << "locked\n";
    }
    ~DirLock() {
        std::error_code ec;
        fs::remove(lock_, ec);
    }
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    fs::path lock_;
};

struct StageTimer {
    std::vector<std::pair<std::string, double>> timings;

    template <typename Fn>
    void run(const std::string& name, Fn&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const ValidationError&) {
            throw;
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(name, e.what());
        }
        const auto t1 = std::chrono::steady_clock::now();
        timings.emplace_back(name, std::chrono::duration<double>(t1 - t0).count());
        std::cerr << "[geoscreen] stage " << name << " done\n";
    }
};

Schema schema_with_kinds(const std::vector<std::string>& names, const Schema& known) {
    Schema s;
    for (const auto& name : names) {
        FeatureSpec spec{name, FeatureKind::Numeric, ""};
        for (const auto& k : known)
            if (k.name == name) spec = k;
        s.push_back(spec);
    }
    return s;
}

ParseResult load_units(const RunConfig& c) {
    const std::string bytes = read_file(c.units_csv, "units CSV");
    std::istringstream in(bytes);
    try {
        return parse_units(in, c.schema);
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
}

FacilitySet load_facilities(const RunConfig& c) {
    const std::string bytes = read_file(c.facilities_csv, "facilities CSV");
    std::istringstream in(bytes);
    try {
        return parse_facilities(in);
    } catch (const std::exception& e) {
        throw ValidationError(e.what());
    }
}

// Geometry file: a FeatureCollection whose features carry the unit id;
// reduced to an id -> geometry map passed through to the output maps.
json load_geometry(const RunConfig& c) {
    json by_id = json::object();
    if (c.geometry_geojson.empty()) return by_id;
    const std::string bytes = read_file(c.geometry_geojson, "geometry GeoJSON");
    json doc = json::parse(bytes, nullptr, true);
    for (const auto& f : doc.value("features", json::array())) {
        std::string id;
        if (f.contains("id")) id = f.at("id").get<std::string>();
        else if (f.contains("properties") && f.at("properties").contains("id"))
            id = f.at("properties").at("id").get<std::string>();
        if (!id.empty() && f.contains("geometry")) by_id[id] = f.at("geometry");
    }
    return by_id;
}

SpatialIndex index_over_units(const std::vector<UnitRecord>& units) {
    std::vector<std::string> ids;
    std::vector<GeoPoint> pts;
    for (const auto& u : units) {
        ids.push_back(u.id);
        pts.push_back(u.centroid);
    }
    return SpatialIndex::build(std::move(ids), std::move(pts));
}

SpatialWeights build_weights(const RunConfig& c, const std::vector<UnitRecord>& units) {
    std::vector<std::string> ids;
    std::vector<GeoPoint> pts;
    for (const auto& u : units) {
        ids.push_back(u.id);
        pts.push_back(u.centroid);
    }
    if (c.weights_scheme == "knn") return weights_knn(pts, ids, c.weights_k);
    if (c.weights_scheme == "distance_band")
        return weights_distance_band(pts, ids, c.weights_distance_miles);
    throw ConfigError("unknown weights scheme '" + c.weights_scheme + "'");
}

struct Prepared {
    Dataset eligible;        // filtered, accessibility appended, pre-impute
    Dataset imputed;         // zero missing covariates
    ImputationReport impute_report;
    ValidationReport validation;
};

Prepared prepare_dataset(const RunConfig& c) {
    Prepared p;
    auto parsed = load_units(c);
    p.validation = parsed.report;
    p.eligible = filter_eligible(parsed.dataset);
    if (p.eligible.units.empty())
        throw StageError("filter", "no eligible units (both rates required)");

    if (!c.facilities_csv.empty()) {
        const FacilitySet fac = load_facilities(c);
        const auto cols = accessibility_features(p.eligible.units, fac, c.catchment_miles);
        append_accessibility(p.eligible, cols);
    }

    const SpatialIndex idx = index_over_units(p.eligible.units);
    auto [imputed, report] = impute_knn(p.eligible, idx, c.impute_k);
    p.imputed = std::move(imputed);
    p.impute_report = std::move(report);
    return p;
}

std::string units_csv_bytes(const Dataset& ds) {
    std::ostringstream out;
    write_units(out, ds);
    return out.str();
}

// Reads a previously written dataset artifact, reconstructing the schema
// from its header (kinds looked up in the configured schema; unlisted
// columns such as the accessibility features are numeric).
Dataset read_prepared(const RunConfig& c, const std::string& name,
                      const std::string& needed_stage) {
    const fs::path path = fs::path(c.out_dir) / name;
    if (!fs::exists(path))
        throw StageError("input", "missing artifact " + name + "; run stage " +
                                      needed_stage + " first");
    std::ifstream in(path, std::ios::binary);
    std::string line;
    do {
        if (!std::getline(in, line))
            throw StageError("input", "artifact " + name + " is empty");
    } while (!line.empty() && line[0] == '#');
    auto header = csv::split_row(line);
    if (header.size() < 5)
        throw StageError("input", "artifact " + name + " has a malformed header");
    std::vector<std::string> feature_names(header.begin() + 5, header.end());

    std::ifstream again(path, std::ios::binary);
    auto parsed = parse_units(again, schema_with_kinds(feature_names, c.schema));
    if (!parsed.report.row_errors.empty())
        throw StageError("input", "artifact " + name + " failed to re-parse");
    return parsed.dataset;
}

struct ModelInputs {
    Matrix X;
    std::vector<double> y;
    std::vector<std::string> ids;
};

ModelInputs model_inputs(const Dataset& prepared) {
    const Dataset with_response = build_response(prepared);
    ModelInputs mi;
    const std::size_t n = with_response.units.size();
    const std::size_t d = with_response.schema.size();
    mi.X = Matrix(n, d);
    mi.y = with_response.response;
    for (std::size_t i = 0; i < n; ++i) {
        mi.ids.push_back(with_response.units[i].id);
        for (std::size_t j = 0; j < d; ++j) {
            const auto& v = with_response.units[i].features[j];
            if (!v)
                throw StageError("train", "unit '" + with_response.units[i].id +
                                              "' still has missing covariates; run impute first");
            mi.X.at(i, j) = *v;
        }
    }
    return mi;
}

std::string hotspot_csv(const std::vector<UnitRecord>& units, const GiResult& gi,
                        const HotspotAssignment& cls) {
    std::ostringstream out;
    out << "id,z,p,class\n";
    for (std::size_t i = 0; i < units.size(); ++i) {
        out << csv::quote_field(units[i].id) << ',';
        if (gi.defined[i])
            out << csv::format_double(gi.z[i]) << ',' << csv::format_double(gi.p[i]);
        else
            out << ',';
        out << ',' << hotspot_class_name(cls.classes[i]) << '\n';
    }
    return out.str();
}

struct RatePass {
    std::string label;           // "y1" / "y2"
    std::vector<double> values;  // one per eligible unit
};

std::vector<RatePass> rate_passes(const Dataset& eligible) {
    std::vector<RatePass> out(2);
    out[0].label = "y1";
    out[1].label = "y2";
    for (const auto& u : eligible.units) {
        out[0].values.push_back(*u.rate_y1);
        out[1].values.push_back(*u.rate_y2);
    }
    return out;
}

void run_hotspot_stage(const RunConfig& c, const Dataset& eligible, ArtifactWriter& w) {
    const SpatialWeights weights = build_weights(c, eligible.units);
    const json geometry = load_geometry(c);
    for (const auto& pass : rate_passes(eligible)) {
        const GiResult gi = gi_star(pass.values, weights);
        const HotspotAssignment cls = classify_hotspots(gi, c.bh_alpha);
        w.write_csv("hotspots_" + pass.label + ".csv", hotspot_csv(eligible.units, gi, cls));
        const JenksBreaks jb = jenks_breaks(pass.values, c.jenks_k);
        const auto jenks_cls = assign_classes(pass.values, jb.breaks);
        w.write_json("map_" + pass.label + ".geojson",
                     hotspot_geojson(eligible.units, gi, cls, jenks_cls,
                                     geometry.empty() ? nullptr : &geometry));
    }
}

void run_classify_stage(const RunConfig& c, const Dataset& eligible, ArtifactWriter& w) {
    json breaks_doc = json::object();
    for (const auto& pass : rate_passes(eligible)) {
        const JenksBreaks jb = jenks_breaks(pass.values, c.jenks_k);
        std::size_t clamped = 0;
        const auto cls = assign_classes(pass.values, jb.breaks, &clamped);
        std::ostringstream out;
        out << "id,value,jenks_class\n";
        for (std::size_t i = 0; i < eligible.units.size(); ++i)
            out << csv::quote_field(eligible.units[i].id) << ','
                << csv::format_double(pass.values[i]) << ',' << cls[i] << '\n';
        w.write_csv("classes_" + pass.label + ".csv", out.str());
        breaks_doc["rate_" + pass.label] = {
            {"breaks", jb.breaks}, {"ssd", jb.ssd}, {"clamped", clamped}};
    }
    w.write_json("jenks.json", breaks_doc);
}

void run_train_stage(const RunConfig& c, const Dataset& prepared, ArtifactWriter& w) {
    const ModelInputs mi = model_inputs(prepared);
    if (mi.X.rows < 4) throw StageError("train", "too few rows to split");

    const SplitSpec split = train_test_split(mi.X.rows, c.split_frac, c.seed);
    if (split.train.empty() || split.test.empty())
        throw StageError("train", "empty train or test partition");

    auto subset = [&](const std::vector<std::size_t>& rows) {
        Matrix X(rows.size(), mi.X.cols);
        std::vector<double> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            y[i] = mi.y[rows[i]];
            for (std::size_t j = 0; j < mi.X.cols; ++j) X.at(i, j) = mi.X.at(rows[i], j);
        }
        return std::make_pair(std::move(X), std::move(y));
    };
    auto [X_train, y_train] = subset(split.train);
    auto [X_test, y_test] = subset(split.test);

    ForestConfig base;
    base.min_leaf = c.min_leaf;
    base.max_depth = c.max_depth;
    base.threads = c.threads;

    const GridSearchResult gs = grid_search_cv(X_train, y_train, c.grid_n_trees, c.grid_mtry,
                                               base, c.cv_folds, derive_seed(c.seed, 0xC4));
    ForestConfig best = gs.best;
    best.seed = derive_seed(c.seed, 0xF0BE57);
    best.threads = c.threads;

    SvrConfig svr = c.svr;
    svr.seed = derive_seed(c.seed, 0x54B);
    const ComparisonReport report =
        compare_models(X_train, y_train, X_test, y_test, best, svr);

    const ForestModel forest = fit_forest(X_train, y_train, best);

    json split_doc;
    json train_ids = json::array(), test_ids = json::array();
    for (std::size_t i : split.train) train_ids.push_back(mi.ids[i]);
    for (std::size_t i : split.test) test_ids.push_back(mi.ids[i]);
    split_doc["train_ids"] = train_ids;
    split_doc["test_ids"] = test_ids;
    split_doc["split_frac"] = c.split_frac;

    w.write_json("split.json", split_doc);
    w.write_json("cv_table.json", to_json(gs));
    w.write_json("forest_model.json", forest_to_json(forest));
    w.write_json("comparison.json", to_json(report));
}

void run_explain_stage(const RunConfig& c, const Dataset& prepared, const json& forest_doc,
                       const json& split_doc, ArtifactWriter& w) {
    const ForestModel forest = forest_from_json(forest_doc);
    const ModelInputs mi = model_inputs(prepared);

    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < mi.ids.size(); ++i) row_of.emplace(mi.ids[i], i);
    auto rows_of = [&](const json& ids) {
        std::vector<std::size_t> rows;
        for (const auto& id : ids) {
            const auto it = row_of.find(id.get<std::string>());
            if (it == row_of.end())
                throw StageError("explain", "split id '" + id.get<std::string>() +
                                                "' not present in the prepared dataset");
            rows.push_back(it->second);
        }
        return rows;
    };
    const auto train_rows = rows_of(split_doc.at("train_ids"));
    const auto test_rows = rows_of(split_doc.at("test_ids"));
    if (train_rows.empty() || test_rows.empty())
        throw StageError("explain", "empty split");

    // Background: seeded uniform sample (without replacement) of training rows.
    const std::uint64_t bg_seed = derive_seed(c.seed, 0xBAC6);
    std::vector<std::size_t> pool = train_rows;
    Rng rng(bg_seed);
    rng.shuffle(pool);
    const std::size_t bg_n = std::min(c.shap_background, pool.size());
    Matrix background(bg_n, mi.X.cols);
    for (std::size_t i = 0; i < bg_n; ++i)
        for (std::size_t j = 0; j < mi.X.cols; ++j)
            background.at(i, j) = mi.X.at(pool[i], j);

    Matrix X_test(test_rows.size(), mi.X.cols);
    for (std::size_t i = 0; i < test_rows.size(); ++i)
        for (std::size_t j = 0; j < mi.X.cols; ++j)
            X_test.at(i, j) = mi.X.at(test_rows[i], j);

    const ShapMatrix shap = shap_matrix(forest, X_test, background, c.threads);
    const auto ranking = mean_abs_shap(shap);
    const auto top = top_features(ranking, c.shap_threshold);

    std::ostringstream imp;
    imp << "feature,mean_abs_shap,rank\n";
    for (std::size_t r = 0; r < ranking.size(); ++r)
        imp << csv::quote_field(prepared.schema[ranking[r].feature].name) << ','
            << csv::format_double(ranking[r].mean_abs_shap) << ',' << (r + 1) << '\n';
    w.write_csv("shap_importance.csv", imp.str());

    json directions = json::object();
    for (std::size_t f : top) {
        std::vector<double> xs(test_rows.size()), phis(test_rows.size());
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            xs[i] = X_test.at(i, f);
            phis[i] = shap.phi[i][f];
        }
        const ScatterExport sc = shap_scatter_export(xs, phis);
        std::ostringstream out;
        out << "feature_value,shap_value\n";
        for (const auto& [xv, pv] : sc.rows)
            out << csv::format_double(xv) << ',' << csv::format_double(pv) << '\n';
        const std::string& fname = prepared.schema[f].name;
        w.write_csv("shap_scatter_" + fname + ".csv", out.str());
        directions[fname] = {{"spearman_rho", sc.spearman_rho},
                             {"direction", sc.direction}};
    }

    json meta;
    meta["background_seed"] = bg_seed;
    meta["background_size"] = bg_n;
    meta["model_hash"] = fnv1a64_hex(forest_doc.dump());
    meta["base_value"] = shap.base;
    meta["explained_instances"] = test_rows.size();
    meta["threshold"] = c.shap_threshold;
    meta["top_features"] = [&] {
        json arr = json::array();
        for (std::size_t f : top) arr.push_back(prepared.schema[f].name);
        return arr;
    }();
    meta["directions"] = directions;
    w.write_json("shap_meta.json", meta);
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    c.schema = default_input_schema();
    try {
        if (j.contains("units_csv")) c.units_csv = j.at("units_csv").get<std::string>();
        if (j.contains("facilities_csv"))
            c.facilities_csv = j.at("facilities_csv").get<std::string>();
        if (j.contains("geometry_geojson"))
            c.geometry_geojson = j.at("geometry_geojson").get<std::string>();
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("schema")) {
            c.schema.clear();
            for (const auto& s : j.at("schema")) {
                FeatureSpec spec;
                spec.name = s.at("name").get<std::string>();
                const std::string kind = s.value("kind", "numeric");
                if (kind == "numeric") spec.kind = FeatureKind::Numeric;
                else if (kind == "binary") spec.kind = FeatureKind::Binary;
                else throw ConfigError("schema kind must be numeric or binary");
                spec.description = s.value("description", "");
                c.schema.push_back(spec);
            }
        }
        if (j.contains("impute_k")) c.impute_k = j.at("impute_k").get<std::size_t>();
        if (j.contains("catchment_miles"))
            c.catchment_miles = j.at("catchment_miles").get<double>();
        if (j.contains("weights")) {
            const json& wj = j.at("weights");
            if (wj.contains("scheme")) c.weights_scheme = wj.at("scheme").get<std::string>();
            if (wj.contains("k")) c.weights_k = wj.at("k").get<std::size_t>();
            if (wj.contains("distance_miles"))
                c.weights_distance_miles = wj.at("distance_miles").get<double>();
        }
        if (j.contains("bh_alpha")) c.bh_alpha = j.at("bh_alpha").get<double>();
        if (j.contains("jenks_k")) c.jenks_k = j.at("jenks_k").get<std::size_t>();
        if (j.contains("split_frac")) c.split_frac = j.at("split_frac").get<double>();
        if (j.contains("cv_folds")) c.cv_folds = j.at("cv_folds").get<std::size_t>();
        if (j.contains("grid")) {
            const json& gj = j.at("grid");
            if (gj.contains("n_trees"))
                c.grid_n_trees = gj.at("n_trees").get<std::vector<std::size_t>>();
            if (gj.contains("mtry"))
                c.grid_mtry = gj.at("mtry").get<std::vector<std::size_t>>();
        }
        if (j.contains("forest")) {
            const json& fj = j.at("forest");
            if (fj.contains("min_leaf")) c.min_leaf = fj.at("min_leaf").get<std::size_t>();
            if (fj.contains("max_depth")) c.max_depth = fj.at("max_depth").get<std::size_t>();
        }
        if (j.contains("svr")) {
            const json& sj = j.at("svr");
            if (sj.contains("c")) c.svr.c = sj.at("c").get<double>();
            if (sj.contains("epsilon")) c.svr.epsilon = sj.at("epsilon").get<double>();
            if (sj.contains("epochs")) c.svr.epochs = sj.at("epochs").get<std::size_t>();
            if (sj.contains("eta0")) c.svr.eta0 = sj.at("eta0").get<double>();
        }
        if (j.contains("shap")) {
            const json& sj = j.at("shap");
            if (sj.contains("background_size"))
                c.shap_background = sj.at("background_size").get<std::size_t>();
            if (sj.contains("threshold")) c.shap_threshold = sj.at("threshold").get<double>();
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j.at("threads").get<std::size_t>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad configuration: ") + e.what());
    }

    if (!(c.split_frac > 0.0 && c.split_frac < 1.0))
        throw ConfigError("split_frac must lie in (0, 1)");
    if (c.cv_folds < 2) throw ConfigError("cv_folds must be >= 2");
    if (c.impute_k == 0) throw ConfigError("impute_k must be >= 1");
    if (c.jenks_k == 0) throw ConfigError("jenks_k must be >= 1");
    if (c.weights_scheme != "knn" && c.weights_scheme != "distance_band")
        throw ConfigError("weights scheme must be knn or distance_band");
    if (c.grid_n_trees.empty() || c.grid_mtry.empty())
        throw ConfigError("hyperparameter grid must be non-empty");
    return c;
}

json config_to_json(const RunConfig& c) {
    json schema = json::array();
    for (const auto& s : c.schema)
        schema.push_back({{"name", s.name},
                          {"kind", s.kind == FeatureKind::Binary ? "binary" : "numeric"},
                          {"description", s.description}});
    return {
        {"units_csv", c.units_csv},
        {"facilities_csv", c.facilities_csv},
        {"geometry_geojson", c.geometry_geojson},
        {"out_dir", c.out_dir},
        {"schema", schema},
        {"impute_k", c.impute_k},
        {"catchment_miles", c.catchment_miles},
        {"weights",
         {{"scheme", c.weights_scheme},
          {"k", c.weights_k},
          {"distance_miles", c.weights_distance_miles}}},
        {"bh_alpha", c.bh_alpha},
        {"jenks_k", c.jenks_k},
        {"split_frac", c.split_frac},
        {"cv_folds", c.cv_folds},
        {"grid", {{"n_trees", c.grid_n_trees}, {"mtry", c.grid_mtry}}},
        {"forest", {{"min_leaf", c.min_leaf}, {"max_depth", c.max_depth}}},
        {"svr",
         {{"c", c.svr.c},
          {"epsilon", c.svr.epsilon},
          {"epochs", c.svr.epochs},
          {"eta0", c.svr.eta0}}},
        {"shap", {{"background_size", c.shap_background}, {"threshold", c.shap_threshold}}},
        {"seed", c.seed},
        {"threads", c.threads},
    };
}

RunConfig load_config(const std::string& path) {
    const std::string bytes = read_file(path, "config file");
    json j = json::parse(bytes, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config file is not valid JSON: " + path);
    return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
    json j = config_to_json(c);
    // Neither where artifacts land nor how many workers computed them
    // changes what the artifacts are.
    j.erase("out_dir");
    j.erase("threads");
    return fnv1a64_hex(j.dump());
}

void cmd_validate(const RunConfig& c) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const ParseResult parsed = load_units(c);
    w.write_json("validation.json", to_json(parsed.report, c.schema));
    if (!c.facilities_csv.empty()) load_facilities(c);
}

void cmd_synth(const RunConfig& c, std::size_t n_units, std::size_t n_facilities,
               const std::string& scenario) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const SynthData data = synth_generate(n_units, n_facilities, c.seed,
                                          parse_scenario(scenario));
    w.write_raw("units.csv", units_csv_bytes(data.dataset));
    std::ostringstream fac;
    write_facilities(fac, data.facilities);
    w.write_raw("facilities.csv", fac.str());

    json gt;
    gt["scenario"] = scenario_name(data.truth.scenario);
    gt["block_ids"] = data.truth.block_ids;
    gt["block_core_ids"] = data.truth.block_core_ids;
    gt["delta"] = data.truth.delta;
    gt["noise_sd"] = data.truth.noise_sd;
    gt["intercept"] = data.truth.intercept;
    gt["coefficients"] = data.truth.coefficients;
    w.write_json("ground_truth.json", gt);
}

void cmd_impute(const RunConfig& c) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const Prepared p = prepare_dataset(c);
    w.write_json("summary.json", to_json(summarize(p.eligible)));
    w.write_csv("dataset_imputed.csv", units_csv_bytes(p.imputed));
    w.write_json("imputation.json", to_json(p.impute_report, p.imputed.schema));
}

void cmd_hotspot(const RunConfig& c) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const ParseResult parsed = load_units(c);
    const Dataset eligible = filter_eligible(parsed.dataset);
    if (eligible.units.empty()) throw StageError("hotspot", "no eligible units");
    run_hotspot_stage(c, eligible, w);
}

void cmd_classify(const RunConfig& c) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const ParseResult parsed = load_units(c);
    const Dataset eligible = filter_eligible(parsed.dataset);
    if (eligible.units.empty()) throw StageError("classify", "no eligible units");
    run_classify_stage(c, eligible, w);
}

void cmd_train(const RunConfig& c) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const Dataset prepared = read_prepared(c, "dataset_imputed.csv", "impute");
    run_train_stage(c, prepared, w);
}

void cmd_explain(const RunConfig& c) {
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    const Dataset prepared = read_prepared(c, "dataset_imputed.csv", "impute");
    const fs::path model_path = fs::path(c.out_dir) / "forest_model.json";
    const fs::path split_path = fs::path(c.out_dir) / "split.json";
    if (!fs::exists(model_path) || !fs::exists(split_path))
        throw StageError("explain", "missing forest_model.json or split.json; run stage train first");
    const json forest_doc = json::parse(read_file(model_path.string(), "model"));
    const json split_doc = json::parse(read_file(split_path.string(), "split"));
    run_explain_stage(c, prepared, forest_doc, split_doc, w);
}

void cmd_pipeline(const RunConfig& c) {
    if (c.units_csv.empty()) throw ConfigError("pipeline requires units_csv");
    DirLock lock(c.out_dir);
    ArtifactWriter w(c.out_dir, config_hash(c), c.seed);
    StageTimer timer;

    Prepared p;
    timer.run("prepare", [&] {
        p = prepare_dataset(c);
        w.write_json("validation.json", to_json(p.validation, c.schema));
        w.write_json("summary.json", to_json(summarize(p.eligible)));
        w.write_csv("dataset_imputed.csv", units_csv_bytes(p.imputed));
        w.write_json("imputation.json", to_json(p.impute_report, p.imputed.schema));
    });
    timer.run("hotspot", [&] { run_hotspot_stage(c, p.eligible, w); });
    timer.run("classify", [&] { run_classify_stage(c, p.eligible, w); });
    timer.run("train", [&] { run_train_stage(c, p.imputed, w); });
    timer.run("explain", [&] {
        const json forest_doc =
            json::parse(read_file((fs::path(c.out_dir) / "forest_model.json").string(), "model"));
        const json split_doc =
            json::parse(read_file((fs::path(c.out_dir) / "split.json").string(), "split"));
        run_explain_stage(c, p.imputed, forest_doc, split_doc, w);
    });

    json manifest;
    manifest["toolkit_version"] = "0.1.0";
    manifest["config"] = config_to_json(c);
    manifest["config_hash"] = config_hash(c);
    json inputs = json::object();
    inputs["units_csv"] = fnv1a64_hex(read_file(c.units_csv, "units CSV"));
    if (!c.facilities_csv.empty())
        inputs["facilities_csv"] = fnv1a64_hex(read_file(c.facilities_csv, "facilities CSV"));
    if (!c.geometry_geojson.empty())
        inputs["geometry_geojson"] =
            fnv1a64_hex(read_file(c.geometry_geojson, "geometry GeoJSON"));
    manifest["input_hashes"] = inputs;
    json artifacts = json::object();
    for (const auto& [name, hash] : w.artifacts()) artifacts[name] = hash;
    manifest["artifacts"] = artifacts;
    json timings = json::object();
    for (const auto& [name, secs] : timer.timings) timings[name] = secs;
    manifest["stage_timings_seconds"] = timings;
    w.write_json("manifest.json", manifest);
}

}  // namespace geoscreen
