#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoscreen/rng.hpp"

namespace geoscreen {

// Row-major design matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct SplitSpec {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed = 0;
};

// Uniform random permutation under `seed`; the first round(frac*n)
// indices go to train. Requires n >= 4 and frac in (0,1).
SplitSpec train_test_split(std::size_t n, double frac, std::uint64_t seed);

struct FoldAssignment {
    std::vector<int> fold_of;  // aligned to the given index list
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

// Shuffles the indices then deals them round-robin into k near-equal
// folds (sizes differ by at most 1).
FoldAssignment kfold(std::size_t n, std::size_t k, std::uint64_t seed);

struct ForestConfig {
    std::size_t n_trees = 500;
    std::size_t mtry = 4;          // features sampled per split
    std::size_t min_leaf = 5;
    std::size_t max_depth = 0;     // 0 = unlimited
    bool bootstrap = true;         // diagnostic mode trains each tree on all rows
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

struct TreeNode {
    int feature = -1;            // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;          // leaf mean (leaves only)
    std::size_t cover = 0;       // training samples routed through the node
    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    double predict(const double* x) const;
};

struct ForestModel {
    ForestConfig config;
    std::size_t n_features = 0;
    std::vector<DecisionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
};

// Greedy CART regression tree: at each node mtry features are drawn
// without replacement and the (feature, midpoint threshold) pair
// minimizing the weighted child SSD is taken; ties break on the smaller
// feature index, then the smaller threshold.
DecisionTree fit_tree(const Matrix& X, const std::vector<double>& y,
                      const ForestConfig& config, Rng& rng,
                      const std::vector<std::size_t>* sample_indices = nullptr);

// n_trees trees, each on a bootstrap resample (size n, with replacement)
// from an RNG seeded by derive_seed(config.seed, tree index). Byte-identical
// output for any thread count.
ForestModel fit_forest(const Matrix& X, const std::vector<double>& y,
                       const ForestConfig& config);

std::vector<double> predict_forest(const ForestModel& model, const Matrix& X);

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
};

// Ordinary least squares via Householder QR (never normal equations).
// Throws "singular design" on rank deficiency.
LinearModel fit_ols(const Matrix& X, const std::vector<double>& y);
std::vector<double> predict_linear(const LinearModel& model, const Matrix& X);

struct SvrConfig {
    double c = 1.0;          // regularization weight on the loss term
    double epsilon = 0.1;    // tube half-width
    std::size_t epochs = 200;
    double eta0 = 0.5;       // base learning rate; decays as eta0 / (1 + t/n)
    std::uint64_t seed = 0;
};

struct SvrModel {
    SvrConfig config;
    double intercept = 0.0;
    std::vector<double> coefficients;     // on standardized features
    std::vector<double> feature_mean;
    std::vector<double> feature_sd;       // 0 marks a dropped zero-variance feature
    std::vector<std::string> warnings;
};

// Linear epsilon-insensitive SVR trained by deterministic seeded averaged
// stochastic subgradient descent on the regularized primal. Features are
// standardized internally; zero-variance features are dropped with a
// warning.
SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const SvrConfig& config);
std::vector<double> predict_svr(const SvrModel& model, const Matrix& X);

double rmse(const std::vector<double>& pred, const std::vector<double>& obs);
double r2(const std::vector<double>& pred, const std::vector<double>& obs);

struct GridCellScore {
    std::size_t n_trees = 0;
    std::size_t mtry = 0;
    std::vector<double> fold_rmse;  // one per fold
    double mean_rmse = 0.0;
};

struct GridSearchResult {
    ForestConfig best;
    std::vector<GridCellScore> table;
};

// 5-fold (configurable) cross-validated grid search over
// {n_trees} x {mtry}, minimizing mean validation RMSE. Ties prefer fewer
// trees, then smaller mtry.
GridSearchResult grid_search_cv(const Matrix& X, const std::vector<double>& y,
                                const std::vector<std::size_t>& n_trees_grid,
                                const std::vector<std::size_t>& mtry_grid,
                                const ForestConfig& base, std::size_t k,
                                std::uint64_t seed);

struct ModelScore {
    std::string model;
    double r2 = 0.0;
    double rmse = 0.0;
};

struct ComparisonReport {
    std::vector<ModelScore> scores;  // forest, ols, svr
    ForestConfig forest_config;
    std::vector<std::string> warnings;
};

// Trains RF (with the given config), OLS, and SVR on the training rows and
// scores all three on the shared held-out test rows.
ComparisonReport compare_models(const Matrix& X_train, const std::vector<double>& y_train,
                                const Matrix& X_test, const std::vector<double>& y_test,
                                const ForestConfig& forest_config, const SvrConfig& svr_config);

}  // namespace geoscreen
