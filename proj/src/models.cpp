#include "geoscreen/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace geoscreen {

SplitSpec train_test_split(std::size_t n, double frac, std::uint64_t seed) {
    if (n < 4) throw std::invalid_argument("train_test_split: need n >= 4");
    if (!(frac > 0.0 && frac < 1.0))
        throw std::invalid_argument("train_test_split: frac must lie in (0, 1)");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0x517));
    rng.shuffle(perm);

    const auto n_train = static_cast<std::size_t>(
        std::llround(frac * static_cast<double>(n)));
    SplitSpec spec;
    spec.seed = seed;
    spec.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    spec.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return spec;
}

FoldAssignment kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold: need k >= 2");
    if (n < k) throw std::invalid_argument("kfold: need n >= k");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(derive_seed(seed, 0xF01D));
    rng.shuffle(perm);

    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.fold_of.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        fa.fold_of[perm[i]] = static_cast<int>(i % k);
    return fa;
}

double DecisionTree::predict(const double* x) const {
    int node = 0;
    for (;;) {
        const TreeNode& nd = nodes[static_cast<std::size_t>(node)];
        if (nd.is_leaf()) return nd.value;
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
}

namespace {

struct TreeBuilder {
    const Matrix& X;
    const std::vector<double>& y;
    const ForestConfig& config;
    Rng& rng;
    std::vector<TreeNode> nodes;
    std::vector<int> feature_pool;  // scratch for mtry sampling

    int build(std::vector<std::size_t>& idx, std::size_t depth) {
        const std::size_t n = idx.size();
        double sum = 0, sumsq = 0;
        for (std::size_t i : idx) {
            sum += y[i];
            sumsq += y[i] * y[i];
        }
        const double mean = sum / static_cast<double>(n);
        const double node_ssd = sumsq - sum * sum / static_cast<double>(n);

        auto make_leaf = [&]() {
            TreeNode leaf;
            leaf.value = mean;
            leaf.cover = n;
            nodes.push_back(leaf);
            return static_cast<int>(nodes.size()) - 1;
        };

        const bool depth_capped = config.max_depth > 0 && depth >= config.max_depth;
        if (n < 2 * config.min_leaf || depth_capped || node_ssd <= 1e-12) return make_leaf();

        // Draw mtry features without replacement (partial Fisher-Yates).
        const std::size_t d = X.cols;
        const std::size_t mtry = std::min(config.mtry, d);
        feature_pool.resize(d);
        std::iota(feature_pool.begin(), feature_pool.end(), 0);
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_below(d - i));
            std::swap(feature_pool[i], feature_pool[j]);
        }
        std::vector<int> candidates(feature_pool.begin(),
                                    feature_pool.begin() + static_cast<std::ptrdiff_t>(mtry));

        // Best split: minimize summed child SSD; ties break on smaller
        // feature index, then smaller threshold.
        double best_cost = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;

        std::vector<std::pair<double, double>> pairs(n);  // (x, y)
        for (int f : candidates) {
            for (std::size_t i = 0; i < n; ++i)
                pairs[i] = {X.at(idx[i], static_cast<std::size_t>(f)), y[idx[i]]};
            std::sort(pairs.begin(), pairs.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double lsum = 0, lsumsq = 0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                lsum += pairs[i].second;
                lsumsq += pairs[i].second * pairs[i].second;
                if (pairs[i].first == pairs[i + 1].first) continue;  // no cut between equals
                const std::size_t nl = i + 1, nr = n - nl;
                if (nl < config.min_leaf || nr < config.min_leaf) continue;
                const double rsum = sum - lsum, rsumsq = sumsq - lsumsq;
                const double cost = (lsumsq - lsum * lsum / static_cast<double>(nl)) +
                                    (rsumsq - rsum * rsum / static_cast<double>(nr));
                const double threshold = pairs[i].first + (pairs[i + 1].first - pairs[i].first) / 2.0;
                const bool better =
                    cost < best_cost ||
                    (cost == best_cost &&
                     (f < best_feature || (f == best_feature && threshold < best_threshold)));
                if (better) {
                    best_cost = cost;
                    best_feature = f;
                    best_threshold = threshold;
                }
            }
        }
        if (best_feature < 0) return make_leaf();  // sampled features all constant

        std::vector<std::size_t> left_idx, right_idx;
        for (std::size_t i : idx) {
            if (X.at(i, static_cast<std::size_t>(best_feature)) <= best_threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }

        TreeNode internal;
        internal.feature = best_feature;
        internal.threshold = best_threshold;
        internal.cover = n;
        const int self = static_cast<int>(nodes.size());
        nodes.push_back(internal);
        idx.clear();
        idx.shrink_to_fit();
        nodes[static_cast<std::size_t>(self)].left = build(left_idx, depth + 1);
        nodes[static_cast<std::size_t>(self)].right = build(right_idx, depth + 1);
        return self;
    }
};

}  // namespace

DecisionTree fit_tree(const Matrix& X, const std::vector<double>& y, const ForestConfig& config,
                      Rng& rng, const std::vector<std::size_t>* sample_indices) {
    if (X.rows == 0 || X.rows != y.size())
        throw std::invalid_argument("fit_tree: empty input or X/y size mismatch");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("fit_tree: non-finite target");
    if (config.mtry == 0) throw std::invalid_argument("fit_tree: mtry must be >= 1");
    if (config.min_leaf == 0) throw std::invalid_argument("fit_tree: min_leaf must be >= 1");

    std::vector<std::size_t> idx;
    if (sample_indices) idx = *sample_indices;
    else {
        idx.resize(X.rows);
        std::iota(idx.begin(), idx.end(), 0);
    }
    if (idx.empty()) throw std::invalid_argument("fit_tree: empty sample");

    DecisionTree tree;
    TreeBuilder builder{X, y, config, rng, {}, {}};
    builder.build(idx, 0);
    tree.nodes = std::move(builder.nodes);
    return tree;
}

ForestModel fit_forest(const Matrix& X, const std::vector<double>& y,
                       const ForestConfig& config) {
    if (config.n_trees == 0) throw std::invalid_argument("fit_forest: n_trees must be >= 1");

    ForestModel model;
    model.config = config;
    model.n_features = X.cols;
    model.trees.resize(config.n_trees);
    model.tree_seeds.resize(config.n_trees);
    for (std::size_t t = 0; t < config.n_trees; ++t)
        model.tree_seeds[t] = derive_seed(config.seed, t);

    auto fit_one = [&](std::size_t t) {
        Rng rng(model.tree_seeds[t]);
        std::vector<std::size_t> sample;
        if (config.bootstrap) {
            sample.resize(X.rows);
            for (auto& s : sample) s = static_cast<std::size_t>(rng.next_below(X.rows));
        } else {
            sample.resize(X.rows);
            std::iota(sample.begin(), sample.end(), 0);
        }
        model.trees[t] = fit_tree(X, y, config, rng, &sample);
    };

    const std::size_t workers = std::max<std::size_t>(1, config.threads);
    if (workers == 1 || config.n_trees == 1) {
        for (std::size_t t = 0; t < config.n_trees; ++t) fit_one(t);
    } else {
        // Each tree owns its RNG and output slot, so any interleaving
        // produces the identical model.
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t t = w; t < config.n_trees; t += workers) fit_one(t);
            });
        for (auto& th : pool) th.join();
    }
    return model;
}

std::vector<double> predict_forest(const ForestModel& model, const Matrix& X) {
    if (X.cols != model.n_features)
        throw std::invalid_argument("predict_forest: feature count mismatch");
    std::vector<double> out(X.rows, 0.0);
    for (std::size_t r = 0; r < X.rows; ++r) {
        const double* x = X.data.data() + r * X.cols;
        double sum = 0;
        for (const auto& tree : model.trees) sum += tree.predict(x);
        out[r] = sum / static_cast<double>(model.trees.size());
    }
    return out;
}

LinearModel fit_ols(const Matrix& X, const std::vector<double>& y) {
    const std::size_t n = X.rows, d = X.cols + 1;  // intercept column first
    if (n != y.size()) throw std::invalid_argument("fit_ols: X/y size mismatch");
    if (n <= X.cols) throw std::invalid_argument("fit_ols: need n > feature count");

    // Householder QR on [1 | X], right-hand side carried along.
    Matrix A(n, d);
    std::vector<double> b = y;
    for (std::size_t r = 0; r < n; ++r) {
        A.at(r, 0) = 1.0;
        for (std::size_t c = 0; c < X.cols; ++c) A.at(r, c + 1) = X.at(r, c);
    }

    double max_abs = 0.0;
    for (double v : A.data) max_abs = std::max(max_abs, std::fabs(v));
    const double tol = std::max(1e-300, 1e-10 * max_abs);

    std::vector<double> v(n);
    for (std::size_t j = 0; j < d; ++j) {
        double norm = 0.0;
        for (std::size_t r = j; r < n; ++r) norm += A.at(r, j) * A.at(r, j);
        norm = std::sqrt(norm);
        if (norm <= tol) throw std::runtime_error("fit_ols: singular design");

        const double alpha = A.at(j, j) >= 0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (std::size_t r = j; r < n; ++r) {
            v[r] = A.at(r, j);
            if (r == j) v[r] -= alpha;
            vnorm2 += v[r] * v[r];
        }
        if (vnorm2 <= 0.0) continue;

        for (std::size_t c = j; c < d; ++c) {
            double dot = 0.0;
            for (std::size_t r = j; r < n; ++r) dot += v[r] * A.at(r, c);
            const double scale = 2.0 * dot / vnorm2;
            for (std::size_t r = j; r < n; ++r) A.at(r, c) -= scale * v[r];
        }
        double dot = 0.0;
        for (std::size_t r = j; r < n; ++r) dot += v[r] * b[r];
        const double scale = 2.0 * dot / vnorm2;
        for (std::size_t r = j; r < n; ++r) b[r] -= scale * v[r];
    }

    for (std::size_t j = 0; j < d; ++j)
        if (std::fabs(A.at(j, j)) <= tol) throw std::runtime_error("fit_ols: singular design");

    std::vector<double> beta(d, 0.0);
    for (std::size_t j = d; j-- > 0;) {
        double s = b[j];
        for (std::size_t c = j + 1; c < d; ++c) s -= A.at(j, c) * beta[c];
        beta[j] = s / A.at(j, j);
    }

    LinearModel model;
    model.intercept = beta[0];
    model.coefficients.assign(beta.begin() + 1, beta.end());
    return model;
}

std::vector<double> predict_linear(const LinearModel& model, const Matrix& X) {
    if (X.cols != model.coefficients.size())
        throw std::invalid_argument("predict_linear: feature count mismatch");
    std::vector<double> out(X.rows, model.intercept);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < X.cols; ++c)
            out[r] += model.coefficients[c] * X.at(r, c);
    return out;
}

SvrModel fit_svr(const Matrix& X, const std::vector<double>& y, const SvrConfig& config) {
    const std::size_t n = X.rows, d = X.cols;
    if (n == 0 || n != y.size()) throw std::invalid_argument("fit_svr: empty or mismatched input");

    SvrModel model;
    model.config = config;
    model.feature_mean.assign(d, 0.0);
    model.feature_sd.assign(d, 0.0);
    for (std::size_t c = 0; c < d; ++c) {
        double sum = 0, sumsq = 0;
        for (std::size_t r = 0; r < n; ++r) {
            sum += X.at(r, c);
            sumsq += X.at(r, c) * X.at(r, c);
        }
        const double mean = sum / static_cast<double>(n);
        const double var = std::max(0.0, sumsq / static_cast<double>(n) - mean * mean);
        model.feature_mean[c] = mean;
        model.feature_sd[c] = std::sqrt(var);
        if (model.feature_sd[c] == 0.0)
            model.warnings.push_back("fit_svr: zero-variance feature column " +
                                     std::to_string(c) + " dropped");
    }

    Matrix Z(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c)
            Z.at(r, c) = model.feature_sd[c] > 0.0
                             ? (X.at(r, c) - model.feature_mean[c]) / model.feature_sd[c]
                             : 0.0;

    const double lambda = 1.0 / (config.c * static_cast<double>(n));
    std::vector<double> w(d, 0.0), w_avg(d, 0.0);
    double b = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double b_avg = 0.0;
    std::size_t avg_count = 0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(config.seed, 0x5F9));

    std::size_t t = 0;
    const std::size_t total_steps = config.epochs * n;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t i : order) {
            ++t;
            const double eta = config.eta0 / std::sqrt(static_cast<double>(t));
            double pred = b;
            for (std::size_t c = 0; c < d; ++c) pred += w[c] * Z.at(i, c);
            const double r = pred - y[i];
            double g = 0.0;
            if (r > config.epsilon) g = 1.0;
            else if (r < -config.epsilon) g = -1.0;

            for (std::size_t c = 0; c < d; ++c)
                w[c] -= eta * (lambda * w[c] + g * Z.at(i, c));
            b -= eta * g;

            // Average the second half of the trajectory.
            if (t * 2 >= total_steps) {
                ++avg_count;
                for (std::size_t c = 0; c < d; ++c) w_avg[c] += w[c];
                b_avg += b;
            }
        }
    }
    if (avg_count == 0) {
        model.coefficients = w;
        model.intercept = b;
    } else {
        model.coefficients.assign(d, 0.0);
        for (std::size_t c = 0; c < d; ++c)
            model.coefficients[c] = w_avg[c] / static_cast<double>(avg_count);
        model.intercept = b_avg / static_cast<double>(avg_count);
    }
    return model;
}

std::vector<double> predict_svr(const SvrModel& model, const Matrix& X) {
    if (X.cols != model.coefficients.size())
        throw std::invalid_argument("predict_svr: feature count mismatch");
    std::vector<double> out(X.rows, model.intercept);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < X.cols; ++c)
            if (model.feature_sd[c] > 0.0)
                out[r] += model.coefficients[c] *
                          (X.at(r, c) - model.feature_mean[c]) / model.feature_sd[c];
    return out;
}

double rmse(const std::vector<double>& pred, const std::vector<double>& obs) {
    if (pred.empty() || pred.size() != obs.size())
        throw std::invalid_argument("rmse: empty or mismatched inputs");
    double sse = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - obs[i];
        sse += e * e;
    }
    return std::sqrt(sse / static_cast<double>(pred.size()));
}

double r2(const std::vector<double>& pred, const std::vector<double>& obs) {
    if (pred.empty() || pred.size() != obs.size())
        throw std::invalid_argument("r2: empty or mismatched inputs");
    const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) /
                        static_cast<double>(obs.size());
    double sse = 0, sst = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sse += (pred[i] - obs[i]) * (pred[i] - obs[i]);
        sst += (obs[i] - mean) * (obs[i] - mean);
    }
    if (sst == 0.0) throw std::invalid_argument("r2: zero total sum of squares");
    return 1.0 - sse / sst;
}

GridSearchResult grid_search_cv(const Matrix& X, const std::vector<double>& y,
                                const std::vector<std::size_t>& n_trees_grid,
                                const std::vector<std::size_t>& mtry_grid,
                                const ForestConfig& base, std::size_t k, std::uint64_t seed) {
    if (n_trees_grid.empty() || mtry_grid.empty())
        throw std::invalid_argument("grid_search_cv: empty grid");

    const FoldAssignment folds = kfold(X.rows, k, seed);

    GridSearchResult result;
    bool have_best = false;
    double best_score = 0.0;
    std::size_t cell_index = 0;

    for (std::size_t nt : n_trees_grid) {
        for (std::size_t mt : mtry_grid) {
            GridCellScore cell;
            cell.n_trees = nt;
            cell.mtry = std::min(mt, X.cols);

            for (std::size_t fold = 0; fold < k; ++fold) {
                std::vector<std::size_t> train_rows, val_rows;
                for (std::size_t i = 0; i < X.rows; ++i) {
                    if (folds.fold_of[i] == static_cast<int>(fold)) val_rows.push_back(i);
                    else train_rows.push_back(i);
                }
                Matrix Xt(train_rows.size(), X.cols);
                std::vector<double> yt(train_rows.size());
                for (std::size_t i = 0; i < train_rows.size(); ++i) {
                    yt[i] = y[train_rows[i]];
                    for (std::size_t c = 0; c < X.cols; ++c)
                        Xt.at(i, c) = X.at(train_rows[i], c);
                }
                Matrix Xv(val_rows.size(), X.cols);
                std::vector<double> yv(val_rows.size());
                for (std::size_t i = 0; i < val_rows.size(); ++i) {
                    yv[i] = y[val_rows[i]];
                    for (std::size_t c = 0; c < X.cols; ++c)
                        Xv.at(i, c) = X.at(val_rows[i], c);
                }

                ForestConfig cfg = base;
                cfg.n_trees = cell.n_trees;
                cfg.mtry = cell.mtry;
                cfg.seed = derive_seed(seed, cell_index * k + fold + 1);
                const ForestModel forest = fit_forest(Xt, yt, cfg);
                cell.fold_rmse.push_back(rmse(predict_forest(forest, Xv), yv));
            }
            cell.mean_rmse = std::accumulate(cell.fold_rmse.begin(), cell.fold_rmse.end(), 0.0) /
                             static_cast<double>(k);

            const bool better =
                !have_best || cell.mean_rmse < best_score ||
                (cell.mean_rmse == best_score &&
                 (cell.n_trees < result.best.n_trees ||
                  (cell.n_trees == result.best.n_trees && cell.mtry < result.best.mtry)));
            if (better) {
                have_best = true;
                best_score = cell.mean_rmse;
                result.best = base;
                result.best.n_trees = cell.n_trees;
                result.best.mtry = cell.mtry;
            }
            result.table.push_back(std::move(cell));
            ++cell_index;
        }
    }
    return result;
}

ComparisonReport compare_models(const Matrix& X_train, const std::vector<double>& y_train,
                                const Matrix& X_test, const std::vector<double>& y_test,
                                const ForestConfig& forest_config, const SvrConfig& svr_config) {
    ComparisonReport report;
    report.forest_config = forest_config;

    const ForestModel forest = fit_forest(X_train, y_train, forest_config);
    const auto rf_pred = predict_forest(forest, X_test);
    report.scores.push_back({"random_forest", r2(rf_pred, y_test), rmse(rf_pred, y_test)});

    const LinearModel ols = fit_ols(X_train, y_train);
    const auto lr_pred = predict_linear(ols, X_test);
    report.scores.push_back({"linear_regression", r2(lr_pred, y_test), rmse(lr_pred, y_test)});

    const SvrModel svr = fit_svr(X_train, y_train, svr_config);
    const auto svr_pred = predict_svr(svr, X_test);
    report.scores.push_back({"svr", r2(svr_pred, y_test), rmse(svr_pred, y_test)});
    report.warnings = svr.warnings;
    return report;
}

}  // namespace geoscreen
