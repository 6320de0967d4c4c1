#include "geoscreen/explain.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace geoscreen {

namespace {

// factorials as doubles; path lengths keep arguments small
std::vector<double> factorial_table(std::size_t upto) {
    std::vector<double> f(upto + 1, 1.0);
    for (std::size_t i = 1; i <= upto; ++i) f[i] = f[i - 1] * static_cast<double>(i);
    return f;
}

}  // namespace

ShapValues shap_bruteforce(const std::function<double(const std::vector<double>&)>& model_fn,
                           const std::vector<double>& x, const Matrix& background) {
    const std::size_t d = x.size();
    if (d > 16)
        throw std::invalid_argument(
            "shap_bruteforce: d > 16 would enumerate 2^d subsets; use shap_forest");
    if (background.rows == 0) throw std::invalid_argument("shap_bruteforce: empty background");
    if (background.cols != d)
        throw std::invalid_argument("shap_bruteforce: background/instance dimension mismatch");

    const std::size_t n_subsets = std::size_t{1} << d;
    std::vector<double> v(n_subsets, 0.0);
    std::vector<double> z(d);
    for (std::size_t s = 0; s < n_subsets; ++s) {
        double acc = 0.0;
        for (std::size_t r = 0; r < background.rows; ++r) {
            for (std::size_t j = 0; j < d; ++j)
                z[j] = (s >> j) & 1u ? x[j] : background.at(r, j);
            acc += model_fn(z);
        }
        v[s] = acc / static_cast<double>(background.rows);
    }

    const auto fact = factorial_table(d);
    ShapValues out;
    out.base = v[0];
    out.phi.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t bit = std::size_t{1} << j;
        for (std::size_t s = 0; s < n_subsets; ++s) {
            if (s & bit) continue;
            const auto size = static_cast<std::size_t>(std::popcount(s));
            const double weight = fact[size] * fact[d - size - 1] / fact[d];
            out.phi[j] += weight * (v[s | bit] - v[s]);
        }
    }
    return out;
}

namespace {

struct LeafPath {
    double value = 0.0;
    std::vector<int> features;       // constrained features, ascending, unique
    std::vector<double> lo, hi;      // open-below / closed-above bounds per feature
};

void collect_leaves(const DecisionTree& tree, int node, std::vector<int>& feats,
                    std::vector<double>& los, std::vector<double>& his,
                    std::vector<LeafPath>& out) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) {
        LeafPath leaf;
        leaf.value = nd.value;
        leaf.features = feats;
        leaf.lo = los;
        leaf.hi = his;
        out.push_back(std::move(leaf));
        return;
    }
    auto slot = [&](int f) {
        for (std::size_t i = 0; i < feats.size(); ++i)
            if (feats[i] == f) return i;
        feats.push_back(f);
        los.push_back(-std::numeric_limits<double>::infinity());
        his.push_back(std::numeric_limits<double>::infinity());
        return feats.size() - 1;
    };

    const std::size_t i = slot(nd.feature);
    const double saved_lo = los[i], saved_hi = his[i];
    const bool added = feats.size() > 0 && i == feats.size() - 1 &&
                       saved_lo == -std::numeric_limits<double>::infinity() &&
                       saved_hi == std::numeric_limits<double>::infinity();

    his[i] = std::min(his[i], nd.threshold);
    collect_leaves(tree, nd.left, feats, los, his, out);
    his[i] = saved_hi;

    los[i] = std::max(los[i], nd.threshold);
    collect_leaves(tree, nd.right, feats, los, his, out);
    los[i] = saved_lo;

    if (added) {
        feats.pop_back();
        los.pop_back();
        his.pop_back();
    }
}

}  // namespace

ShapValues shap_forest(const ForestModel& forest, const std::vector<double>& x,
                       const Matrix& background) {
    const std::size_t d = forest.n_features;
    if (x.size() != d) throw std::invalid_argument("shap_forest: instance dimension mismatch");
    if (background.rows == 0 || background.cols != d)
        throw std::invalid_argument("shap_forest: bad background");

    auto fact = factorial_table(64);

    ShapValues out;
    out.phi.assign(d, 0.0);
    out.base = 0.0;

    std::vector<int> feats;
    std::vector<double> los, his;
    std::vector<LeafPath> leaves;
    std::vector<int> set_a, set_b;

    for (const auto& tree : forest.trees) {
        leaves.clear();
        feats.clear();
        los.clear();
        his.clear();
        collect_leaves(tree, 0, feats, los, his, leaves);

        for (const auto& leaf : leaves) {
            for (std::size_t r = 0; r < background.rows; ++r) {
                set_a.clear();
                set_b.clear();
                bool dead = false;
                for (std::size_t i = 0; i < leaf.features.size() && !dead; ++i) {
                    const int f = leaf.features[i];
                    const double xv = x[static_cast<std::size_t>(f)];
                    const double bv = background.at(r, static_cast<std::size_t>(f));
                    const bool x_ok = xv > leaf.lo[i] && xv <= leaf.hi[i];
                    const bool b_ok = bv > leaf.lo[i] && bv <= leaf.hi[i];
                    if (x_ok && !b_ok) set_a.push_back(f);
                    else if (!x_ok && b_ok) set_b.push_back(f);
                    else if (!x_ok && !b_ok) dead = true;
                    // both satisfied: the feature never changes the leaf
                }
                if (dead) continue;

                const std::size_t a = set_a.size(), bsz = set_b.size();
                if (a + bsz >= fact.size()) fact = factorial_table(a + bsz + 16);
                const double u = leaf.value;
                if (a == 0) out.base += u;
                // Shapley of the "all of A in S, none of B in S" indicator game.
                if (a > 0) {
                    const double wa = u * fact[a - 1] * fact[bsz] / fact[a + bsz];
                    for (int f : set_a) out.phi[static_cast<std::size_t>(f)] += wa;
                }
                if (bsz > 0) {
                    const double wb = u * fact[a] * fact[bsz - 1] / fact[a + bsz];
                    for (int f : set_b) out.phi[static_cast<std::size_t>(f)] -= wb;
                }
            }
        }
    }

    const double norm = static_cast<double>(background.rows) *
                        static_cast<double>(forest.trees.size());
    out.base /= norm;
    for (double& p : out.phi) p /= norm;
    return out;
}

ShapMatrix shap_matrix(const ForestModel& forest, const Matrix& X, const Matrix& background,
                       std::size_t threads) {
    ShapMatrix m;
    m.phi.resize(X.rows);

    auto explain_row = [&](std::size_t r) {
        std::vector<double> x(X.cols);
        for (std::size_t c = 0; c < X.cols; ++c) x[c] = X.at(r, c);
        auto sv = shap_forest(forest, x, background);
        m.phi[r] = std::move(sv.phi);
        if (r == 0) m.base = sv.base;
    };

    const std::size_t workers = std::max<std::size_t>(1, threads);
    if (workers == 1 || X.rows <= 1) {
        for (std::size_t r = 0; r < X.rows; ++r) explain_row(r);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t r = w; r < X.rows; r += workers) explain_row(r);
            });
        for (auto& th : pool) th.join();
    }
    if (X.rows == 0) {
        // base still defined by the background alone
        std::vector<double> zeros(X.cols, 0.0);
        if (background.rows > 0 && X.cols == forest.n_features)
            m.base = shap_forest(forest, zeros, background).base;
    }
    return m;
}

std::vector<FeatureImportance> mean_abs_shap(const ShapMatrix& m) {
    if (m.phi.empty()) throw std::invalid_argument("mean_abs_shap: empty matrix");
    const std::size_t d = m.n_features();
    std::vector<FeatureImportance> out(d);
    for (std::size_t j = 0; j < d; ++j) out[j].feature = j;
    for (const auto& row : m.phi)
        for (std::size_t j = 0; j < d; ++j) out[j].mean_abs_shap += std::fabs(row[j]);
    for (auto& fi : out) fi.mean_abs_shap /= static_cast<double>(m.phi.size());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.mean_abs_shap > b.mean_abs_shap;
    });
    return out;
}

std::vector<std::size_t> top_features(const std::vector<FeatureImportance>& ranking,
                                      double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("top_features: threshold must be >= 0");
    std::vector<std::size_t> out;
    for (const auto& fi : ranking)
        if (fi.mean_abs_shap > threshold) out.push_back(fi.feature);
    return out;
}

namespace {
std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = avg;
        i = j + 1;
    }
    return ranks;
}
}  // namespace

ScatterExport shap_scatter_export(const std::vector<double>& x_values,
                                  const std::vector<double>& phi_column) {
    if (x_values.size() != phi_column.size())
        throw std::invalid_argument("shap_scatter_export: length mismatch");

    ScatterExport out;
    out.rows.reserve(x_values.size());
    for (std::size_t i = 0; i < x_values.size(); ++i)
        out.rows.emplace_back(x_values[i], phi_column[i]);

    const auto rx = average_ranks(x_values);
    const auto rp = average_ranks(phi_column);
    const double n = static_cast<double>(x_values.size());
    double mx = 0, mp = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        mp += rp[i];
    }
    mx /= n;
    mp /= n;
    double cov = 0, vx = 0, vp = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        cov += (rx[i] - mx) * (rp[i] - mp);
        vx += (rx[i] - mx) * (rx[i] - mx);
        vp += (rp[i] - mp) * (rp[i] - mp);
    }
    if (vx > 0 && vp > 0) out.spearman_rho = cov / std::sqrt(vx * vp);
    out.direction = out.spearman_rho > 1e-12 ? "positive"
                   : out.spearman_rho < -1e-12 ? "negative"
                                               : "none";
    return out;
}

}  // namespace geoscreen
