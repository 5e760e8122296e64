// forest.hpp — regression random forest (CART trees, variance-reduction
// splits, bootstrap aggregation).
//
// Trees are grown from per-feature presorted row orders: the sort happens
// once per forest, bootstrap resampling replays it with multiplicity counts,
// and each split stably partitions the order arrays, so no per-node sorting
// is ever needed. Every tree depends only on (seed, tree index) and the
// training data, never on thread count or evaluation order, which keeps
// fitted models byte-reproducible.
//
// Split contract:
//   * candidate thresholds are midpoints 0.5*(lo+hi) between consecutive
//     distinct sorted feature values; if rounding collapses the midpoint
//     onto hi it falls back to lo
//   * consecutive values closer than kSplitEps (absolute) yield no
//     candidate, so a column whose range is below kSplitEps is unsplittable
//   * rows with x <= threshold go left
//   * the best split strictly maximizes SSE reduction; ties keep the lowest
//     feature index, then the lowest threshold
//   * leaf values are the mean of the leaf targets, clamped into the leaf's
//     [min, max] target range so constant targets reproduce exactly

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "eeatc/error.hpp"
#include "eeatc/matrix.hpp"
#include "eeatc/rng.hpp"

namespace eeatc {

inline constexpr double kSplitEps = 1e-12;

struct ForestParams {
    std::size_t n_trees = 200;
    std::size_t max_depth = 0;  // 0 = unlimited
    std::size_t min_samples_leaf = 2;
    std::size_t min_samples_split = 4;
    std::size_t mtry = 0;  // features tried per split, 0 = ceil(n_features / 3)
    bool bootstrap = true;
    std::uint64_t seed = 0;

    bool operator==(const ForestParams&) const = default;
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::int32_t left = -1;
    std::int32_t right = -1;
    double threshold = 0.0;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    bool operator==(const Tree&) const = default;
};

struct ForestModel {
    ForestParams params;
    std::size_t n_features = 0;
    std::vector<Tree> trees;

    bool fitted() const { return !trees.empty(); }
    bool operator==(const ForestModel&) const = default;
};

namespace detail {

// Column-major copy of the design matrix plus, per feature, the row ids
// sorted ascending by that feature's value (equal values keep ascending row
// id). Shared by every tree of a forest.
struct ForestWorkspace {
    std::size_t n = 0;
    std::size_t n_feat = 0;
    std::vector<double> col_values;    // n_feat stripes of length n
    std::vector<std::uint32_t> order;  // n_feat stripes of length n

    ForestWorkspace(const Matrix& x) : n(x.rows()), n_feat(x.cols()) {
        col_values.resize(n * n_feat);
        order.resize(n * n_feat);
        for (std::size_t j = 0; j < n_feat; ++j) {
            double* vals = col_values.data() + j * n;
            for (std::size_t r = 0; r < n; ++r)
                vals[r] = x(r, j);
            std::uint32_t* ord = order.data() + j * n;
            std::iota(ord, ord + n, std::uint32_t{0});
            std::stable_sort(ord, ord + n, [vals](std::uint32_t a, std::uint32_t b) {
                return vals[a] < vals[b];
            });
        }
    }

    double value(std::size_t feature, std::uint32_t row) const {
        return col_values[feature * n + row];
    }
};

class TreeBuilder {
public:
    TreeBuilder(const ForestWorkspace& ws, std::span<const double> y,
                const ForestParams& params, std::size_t mtry, std::uint64_t seed)
        : ws_(ws), y_(y), params_(params), mtry_(mtry), rng_(seed) {}

    Tree build() {
        init_sample();
        nodes_.clear();
        grow(0, m_, 0);
        return Tree{std::move(nodes_)};
    }

private:
    // Materializes this tree's sample as one row-id stripe per feature, each
    // in feature-sorted order. A bootstrap draw only produces multiplicity
    // counts; duplicates are emitted while replaying the presorted order.
    void init_sample() {
        const std::size_t n = ws_.n;
        m_ = n;
        cols_.resize(ws_.n_feat * n);
        if (params_.bootstrap) {
            counts_.assign(n, 0);
            for (std::size_t i = 0; i < n; ++i)
                ++counts_[rng_.uniform_index(n)];
            for (std::size_t j = 0; j < ws_.n_feat; ++j) {
                const std::uint32_t* ord = ws_.order.data() + j * n;
                std::uint32_t* out = cols_.data() + j * n;
                std::size_t k = 0;
                for (std::size_t i = 0; i < n; ++i)
                    for (std::uint32_t c = counts_[ord[i]]; c > 0; --c)
                        out[k++] = ord[i];
            }
        } else {
            std::copy(ws_.order.begin(), ws_.order.end(), cols_.begin());
        }
        left_buf_.resize(m_);
        right_buf_.resize(m_);
        feat_ids_.resize(ws_.n_feat);
    }

    // Grows the subtree over stripe range [begin, end); returns its node id.
    std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
        const std::int32_t idx = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();

        const std::uint32_t* rows = cols_.data() + begin;  // stripe of feature 0
        const std::size_t n_node = end - begin;
        double sum = 0.0, y_min = y_[rows[0]], y_max = y_[rows[0]];
        for (std::size_t i = 0; i < n_node; ++i) {
            const double v = y_[rows[i]];
            sum += v;
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
        const double mean = sum / static_cast<double>(n_node);

        const bool at_depth_limit =
            params_.max_depth > 0 && depth >= params_.max_depth;
        if (n_node < params_.min_samples_split || at_depth_limit || y_min == y_max) {
            make_leaf(idx, mean, y_min, y_max);
            return idx;
        }

        // Centered target moments; SSE of any subset is sum(c^2) - sum(c)^2/n.
        double tot_c = 0.0, tot_c2 = 0.0;
        for (std::size_t i = 0; i < n_node; ++i) {
            const double c = y_[rows[i]] - mean;
            tot_c += c;
            tot_c2 += c * c;
        }
        const double parent_sse = tot_c2 - tot_c * tot_c / static_cast<double>(n_node);

        std::iota(feat_ids_.begin(), feat_ids_.end(), std::uint32_t{0});
        std::size_t n_try = ws_.n_feat;
        if (mtry_ < ws_.n_feat) {
            for (std::size_t i = 0; i < mtry_; ++i) {
                const std::size_t j = i + rng_.uniform_index(ws_.n_feat - i);
                std::swap(feat_ids_[i], feat_ids_[j]);
            }
            std::sort(feat_ids_.begin(), feat_ids_.begin() + static_cast<std::ptrdiff_t>(mtry_));
            n_try = mtry_;
        }

        std::int32_t best_feat = -1;
        double best_thresh = 0.0, best_gain = 0.0;
        for (std::size_t f = 0; f < n_try; ++f) {
            const std::size_t j = feat_ids_[f];
            const std::uint32_t* ord = cols_.data() + j * m_ + begin;
            double left_c = 0.0, left_c2 = 0.0;
            for (std::size_t i = 0; i + 1 < n_node; ++i) {
                const double c = y_[ord[i]] - mean;
                left_c += c;
                left_c2 += c * c;
                const std::size_t nl = i + 1, nr = n_node - nl;
                if (nl < params_.min_samples_leaf)
                    continue;
                if (nr < params_.min_samples_leaf)
                    break;
                const double lo = ws_.value(j, ord[i]);
                const double hi = ws_.value(j, ord[i + 1]);
                if (!(hi - lo > kSplitEps))
                    continue;
                const double rc = tot_c - left_c;
                const double sse_l = left_c2 - left_c * left_c / static_cast<double>(nl);
                const double sse_r =
                    (tot_c2 - left_c2) - rc * rc / static_cast<double>(nr);
                const double gain = parent_sse - sse_l - sse_r;
                if (gain > best_gain) {
                    double t = 0.5 * (lo + hi);
                    if (!(t >= lo && t < hi))
                        t = lo;
                    best_feat = static_cast<std::int32_t>(j);
                    best_thresh = t;
                    best_gain = gain;
                }
            }
        }
        if (best_feat < 0) {
            make_leaf(idx, mean, y_min, y_max);
            return idx;
        }

        // Stably partition every feature stripe on the chosen split. The
        // side of a row depends only on its id, so all stripes agree on the
        // left count.
        const std::size_t jf = static_cast<std::size_t>(best_feat);
        std::size_t n_left = 0;
        for (std::size_t j = 0; j < ws_.n_feat; ++j) {
            std::uint32_t* seg = cols_.data() + j * m_ + begin;
            std::size_t nl = 0, nr = 0;
            for (std::size_t i = 0; i < n_node; ++i) {
                if (ws_.value(jf, seg[i]) <= best_thresh)
                    left_buf_[nl++] = seg[i];
                else
                    right_buf_[nr++] = seg[i];
            }
            std::copy(left_buf_.begin(), left_buf_.begin() + static_cast<std::ptrdiff_t>(nl), seg);
            std::copy(right_buf_.begin(), right_buf_.begin() + static_cast<std::ptrdiff_t>(nr),
                      seg + nl);
            n_left = nl;
        }
        const std::size_t split_at = begin + n_left;

        nodes_[idx].feature = best_feat;
        nodes_[idx].threshold = best_thresh;
        const std::int32_t left = grow(begin, split_at, depth + 1);
        const std::int32_t right = grow(split_at, end, depth + 1);
        nodes_[idx].left = left;
        nodes_[idx].right = right;
        return idx;
    }

    void make_leaf(std::int32_t idx, double mean, double y_min, double y_max) {
        nodes_[idx].value = std::clamp(mean, y_min, y_max);
    }

    const ForestWorkspace& ws_;
    std::span<const double> y_;
    const ForestParams& params_;
    std::size_t mtry_;
    SplitMix64 rng_;
    std::size_t m_ = 0;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> cols_;
    std::vector<std::uint32_t> left_buf_, right_buf_;
    std::vector<std::uint32_t> feat_ids_;
    std::vector<TreeNode> nodes_;
};

inline void check_fit_args(const Matrix& x, std::span<const double> y,
                           const ForestParams& params) {
    if (x.rows() != y.size())
        throw ShapeMismatch("forest: " + std::to_string(x.rows()) + " rows vs " +
                            std::to_string(y.size()) + " targets");
    if (x.rows() == 0 || x.cols() == 0)
        throw EmptyInput("forest: empty design matrix");
    if (x.rows() > 0xffffffffULL)
        throw BadConfig("forest: row ids are 32-bit");
    if (params.min_samples_leaf == 0)
        throw BadConfig("forest: min_samples_leaf must be positive");
    if (params.mtry > x.cols())
        throw BadConfig("forest: mtry exceeds feature count");
}

inline std::size_t resolve_mtry(const ForestParams& params, std::size_t n_feat) {
    return params.mtry > 0 ? params.mtry : (n_feat + 2) / 3;
}

} // namespace detail

// Fits a single tree. With bootstrap off and mtry covering all features the
// result is fully determined by the data alone.
inline Tree tree_fit(const Matrix& x, std::span<const double> y,
                     const ForestParams& params = {}, std::uint64_t seed = 0) {
    detail::check_fit_args(x, y, params);
    detail::ForestWorkspace ws(x);
    detail::TreeBuilder builder(ws, y, params, detail::resolve_mtry(params, x.cols()), seed);
    return builder.build();
}

inline double tree_predict_row(const Tree& tree, std::span<const double> row) {
    std::int32_t i = 0;
    while (!tree.nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = tree.nodes[static_cast<std::size_t>(i)];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return tree.nodes[static_cast<std::size_t>(i)].value;
}

inline std::vector<double> tree_predict(const Tree& tree, const Matrix& x) {
    if (tree.nodes.empty())
        throw NotFitted("tree_predict: empty tree");
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        out[r] = tree_predict_row(tree, x.row(r));
    return out;
}

// Fits params.n_trees trees; tree t consumes the substream mix(seed, t), so
// results are identical for any n_threads.
inline ForestModel forest_fit(const Matrix& x, std::span<const double> y,
                              const ForestParams& params = {},
                              unsigned n_threads = 1) {
    detail::check_fit_args(x, y, params);
    if (params.n_trees == 0)
        throw BadConfig("forest: n_trees must be positive");

    ForestModel model;
    model.params = params;
    model.n_features = x.cols();
    model.trees.resize(params.n_trees);

    const detail::ForestWorkspace ws(x);
    const std::size_t mtry = detail::resolve_mtry(params, x.cols());
    auto fit_range = [&](std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t) {
            detail::TreeBuilder builder(ws, y, params, mtry,
                                        SplitMix64::mix(params.seed, t));
            model.trees[t] = builder.build();
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(std::max(1u, n_threads), params.n_trees);
    if (n_workers == 1) {
        fit_range(0, params.n_trees);
    } else {
        std::vector<std::thread> workers;
        workers.reserve(n_workers);
        for (std::size_t w = 0; w < n_workers; ++w) {
            const std::size_t b = params.n_trees * w / n_workers;
            const std::size_t e = params.n_trees * (w + 1) / n_workers;
            workers.emplace_back(fit_range, b, e);
        }
        for (auto& t : workers)
            t.join();
    }
    return model;
}

// Mean over trees, clamped into the per-row [min, max] of the tree outputs
// so an ensemble of identical leaves reproduces the leaf value exactly.
inline std::vector<double> forest_predict(const ForestModel& model, const Matrix& x) {
    if (!model.fitted())
        throw NotFitted("forest_predict: model has no trees");
    if (x.cols() != model.n_features)
        throw ShapeMismatch("forest_predict: " + std::to_string(x.cols()) +
                            " columns vs " + std::to_string(model.n_features) +
                            " expected");
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const auto row = x.row(r);
        double acc = 0.0;
        double mn = 0.0, mx = 0.0;
        for (std::size_t t = 0; t < model.trees.size(); ++t) {
            const double v = tree_predict_row(model.trees[t], row);
            acc += v;
            mn = t == 0 ? v : std::min(mn, v);
            mx = t == 0 ? v : std::max(mx, v);
        }
        out[r] = std::clamp(acc / static_cast<double>(model.trees.size()), mn, mx);
    }
    return out;
}

} // namespace eeatc
