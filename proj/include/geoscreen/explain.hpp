#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoscreen/models.hpp"

namespace geoscreen {

struct ShapValues {
    double base = 0.0;          // expected model output over the background
    std::vector<double> phi;    // one attribution per feature
};

// Exact Shapley attribution by subset enumeration with the interventional
// value function v(S) = mean over background rows of the model applied to
// x on S and the background row elsewhere. Guarded at d <= 16.
ShapValues shap_bruteforce(const std::function<double(const std::vector<double>&)>& model_fn,
                           const std::vector<double>& x, const Matrix& background);

// Interventional Shapley for a forest, computed exactly per (tree,
// background row) by leaf-path partitioning and summed by linearity.
// Agrees with shap_bruteforce to tight tolerance.
ShapValues shap_forest(const ForestModel& forest, const std::vector<double>& x,
                       const Matrix& background);

struct ShapMatrix {
    double base = 0.0;
    std::vector<std::vector<double>> phi;  // instance-major
    std::size_t n_features() const { return phi.empty() ? 0 : phi.front().size(); }
};

// Explains each row of X against the shared background. Deterministic for
// any worker count (fixed per-instance accumulation).
ShapMatrix shap_matrix(const ForestModel& forest, const Matrix& X, const Matrix& background,
                       std::size_t threads = 1);

struct FeatureImportance {
    std::size_t feature = 0;
    double mean_abs_shap = 0.0;
};

// Per-feature mean |phi| across instances, descending; ties keep ascending
// feature index.
std::vector<FeatureImportance> mean_abs_shap(const ShapMatrix& m);

// Features whose mean |phi| strictly exceeds the threshold, in ranking order.
std::vector<std::size_t> top_features(const std::vector<FeatureImportance>& ranking,
                                      double threshold = 0.3);

struct ScatterExport {
    std::vector<std::pair<double, double>> rows;  // (feature value, shap value)
    double spearman_rho = 0.0;
    std::string direction;  // "positive", "negative" or "none"
};

ScatterExport shap_scatter_export(const std::vector<double>& x_values,
                                  const std::vector<double>& phi_column);

}  // namespace geoscreen
