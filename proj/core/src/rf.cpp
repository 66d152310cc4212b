#include "satthermo/rf.hpp"

#include "satthermo/errors.hpp"
#include "satthermo/random.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <numeric>
#include <thread>

#include <fmt/format.h>

namespace satthermo {

double bounded_mean(std::span<const double> values) {
    if (values.empty()) throw InsufficientDataError("mean of an empty sequence");
    double mean = values[0];
    double lo = values[0];
    double hi = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        mean += (values[i] - mean) / static_cast<double>(i + 1);
        lo = std::min(lo, values[i]);
        hi = std::max(hi, values[i]);
    }
    return std::clamp(mean, lo, hi);
}

double RegressionTree::predict(std::span<const double> row) const {
    std::uint32_t i = 0;
    while (!nodes[i].is_leaf()) {
        const auto& n = nodes[i];
        i = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
    if (nodes.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (!nodes[i].is_leaf()) {
            stack.emplace_back(nodes[i].left, d + 1);
            stack.emplace_back(nodes[i].right, d + 1);
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double RfModel::predict(std::span<const double> row) const {
    if (trees.empty()) throw ShapeError("forest has no trees");
    if (row.size() != feature_names.size()) {
        throw ShapeError(fmt::format("forest expects {} features, got {}", feature_names.size(), row.size()));
    }
    double mean = trees[0].predict(row);
    double lo = mean;
    double hi = mean;
    for (std::size_t t = 1; t < trees.size(); ++t) {
        const double v = trees[t].predict(row);
        mean += (v - mean) / static_cast<double>(t + 1);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return std::clamp(mean, lo, hi);
}

double predict_rf(const RfModel& m, double t_ambient, double rh) {
    std::vector<double> row(m.feature_names.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (m.feature_names[j] == kFeatureTemperature) {
            row[j] = t_ambient;
        } else if (m.feature_names[j] == kFeatureHumidity) {
            row[j] = rh;
        } else {
            throw ShapeError(fmt::format("model uses feature '{}' beyond (T, RH)", m.feature_names[j]));
        }
    }
    return m.predict(row);
}

namespace {

double split_threshold(double a, double b) {
    double mid = a + (b - a) / 2.0;
    // Adjacent doubles can round the midpoint up onto b.
    if (mid >= b) mid = a;
    return mid;
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, std::span<const std::size_t> sample, const RfHyperparams& hp)
        : hp_(hp), m_(sample.size()), p_(data.n_features()) {
        xs_.assign(p_, std::vector<double>(m_));
        ys_.resize(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            const auto i = sample[k];
            for (std::size_t f = 0; f < p_; ++f) xs_[f][k] = data.feature(i, f);
            ys_[k] = data.target(i);
        }
        orders_.assign(p_, std::vector<std::uint32_t>(m_));
        for (std::size_t f = 0; f < p_; ++f) {
            auto& ord = orders_[f];
            std::iota(ord.begin(), ord.end(), 0U);
            const auto& x = xs_[f];
            std::sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) {
                return x[a] < x[b] || (x[a] == x[b] && a < b);
            });
        }
        goes_left_.resize(m_);
        scratch_.resize(m_);
        leaf_values_.reserve(m_);
    }

    RegressionTree build() {
        RegressionTree tree;
        if (m_ == 0) throw InsufficientDataError("tree sample is empty");
        struct Work {
            std::size_t begin;
            std::size_t end;
            std::size_t depth;
            std::int64_t parent;  // -1 for root
            bool left;
        };
        std::vector<Work> stack{{0, m_, 0, -1, true}};
        while (!stack.empty()) {
            const Work w = stack.back();
            stack.pop_back();
            const auto index = static_cast<std::uint32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            if (w.parent >= 0) {
                auto& parent = tree.nodes[static_cast<std::size_t>(w.parent)];
                (w.left ? parent.left : parent.right) = index;
            }
            const auto split = find_split(w.begin, w.end, w.depth);
            if (!split) {
                tree.nodes[index].value = leaf_value(w.begin, w.end);
                continue;
            }
            tree.nodes[index].feature = static_cast<int>(split->feature);
            tree.nodes[index].threshold = split->threshold;
            partition(w.begin, w.end, *split);
            const std::size_t mid = w.begin + split->left_count;
            // Right is pushed first so the left subtree is emitted first (preorder).
            stack.push_back({mid, w.end, w.depth + 1, index, false});
            stack.push_back({w.begin, mid, w.depth + 1, index, true});
        }
        return tree;
    }

private:
    struct Split {
        std::size_t feature;
        double threshold;
        std::size_t left_count;
    };

    double leaf_value(std::size_t begin, std::size_t end) {
        leaf_values_.clear();
        for (std::size_t k = begin; k < end; ++k) leaf_values_.push_back(ys_[orders_[0][k]]);
        return bounded_mean(leaf_values_);
    }

    std::optional<Split> find_split(std::size_t begin, std::size_t end, std::size_t depth) const {
        const std::size_t n = end - begin;
        const std::size_t min_leaf = std::max<std::size_t>(hp_.min_samples_leaf, 1);
        if (n < 2 * min_leaf) return std::nullopt;
        if (hp_.max_depth != 0 && depth >= hp_.max_depth) return std::nullopt;

        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t k = begin; k < end; ++k) {
            const double y = ys_[orders_[0][k]];
            sum += y;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        if (lo == hi) return std::nullopt;

        // Maximizing sL^2/nL + sR^2/nR is maximizing the drop in squared error.
        const double parent = sum * sum / static_cast<double>(n);
        double best = -std::numeric_limits<double>::infinity();
        std::optional<Split> out;
        for (std::size_t f = 0; f < p_; ++f) {
            const auto& ord = orders_[f];
            const auto& x = xs_[f];
            double left_sum = 0.0;
            for (std::size_t k = 1; k < n; ++k) {
                left_sum += ys_[ord[begin + k - 1]];
                if (k < min_leaf || n - k < min_leaf) continue;
                const double a = x[ord[begin + k - 1]];
                const double b = x[ord[begin + k]];
                if (!(a < b)) continue;
                const double right_sum = sum - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(k) +
                                     right_sum * right_sum / static_cast<double>(n - k);
                if (score > best) {
                    best = score;
                    out = Split{f, split_threshold(a, b), k};
                }
            }
        }
        if (!out || !(best - parent > 1e-12 * std::max(1.0, std::abs(parent)))) return std::nullopt;
        return out;
    }

    void partition(std::size_t begin, std::size_t end, const Split& split) {
        const auto& x = xs_[split.feature];
        for (std::size_t k = begin; k < end; ++k) {
            const auto pos = orders_[split.feature][k];
            goes_left_[pos] = x[pos] <= split.threshold ? 1 : 0;
        }
        for (auto& ord : orders_) {
            std::size_t l = begin;
            std::size_t r = 0;
            for (std::size_t k = begin; k < end; ++k) {
                const auto pos = ord[k];
                if (goes_left_[pos]) {
                    ord[l++] = pos;
                } else {
                    scratch_[r++] = pos;
                }
            }
            std::copy_n(scratch_.begin(), r, ord.begin() + static_cast<std::ptrdiff_t>(l));
        }
    }

    const RfHyperparams& hp_;
    std::size_t m_;
    std::size_t p_;
    std::vector<std::vector<double>> xs_;
    std::vector<double> ys_;
    std::vector<std::vector<std::uint32_t>> orders_;
    std::vector<unsigned char> goes_left_;
    std::vector<std::uint32_t> scratch_;
    std::vector<double> leaf_values_;
};

}  // namespace

RegressionTree fit_tree(const Dataset& data, std::span<const std::size_t> sample,
                        const RfHyperparams& hp) {
    if (sample.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw InvalidParameterError("tree sample too large");
    }
    return TreeBuilder(data, sample, hp).build();
}

RfModel fit_rf(const Dataset& train, std::uint64_t seed, const RfHyperparams& hp, std::size_t workers) {
    if (train.size() < 10) {
        throw TooFewRowsError(fmt::format("random forest needs at least 10 rows, got {}", train.size()));
    }
    if (hp.n_trees == 0) throw InvalidParameterError("forest needs at least one tree");

    RfModel model;
    model.feature_names = train.feature_names();
    model.hyperparams = hp;
    const auto [lo, hi] = std::minmax_element(train.targets().begin(), train.targets().end());
    model.target_min = *lo;
    model.target_max = *hi;
    model.trees.resize(hp.n_trees);
    model.tree_seeds.resize(hp.n_trees);
    for (std::size_t t = 0; t < hp.n_trees; ++t) model.tree_seeds[t] = derive_seed(seed, "rf-tree", t);

    const std::size_t n = train.size();
    auto grow = [&](std::size_t t) {
        std::vector<std::size_t> sample(n);
        if (hp.bootstrap) {
            Rng rng(model.tree_seeds[t]);
            for (auto& s : sample) s = static_cast<std::size_t>(uniform_below(rng, n));
        } else {
            std::iota(sample.begin(), sample.end(), std::size_t{0});
        }
        model.trees[t] = fit_tree(train, sample, hp);
    };

    workers = std::clamp<std::size_t>(workers, 1, hp.n_trees);
    if (workers == 1) {
        for (std::size_t t = 0; t < hp.n_trees; ++t) grow(t);
        return model;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t t = next++; t < hp.n_trees; t = next++) {
                    try {
                        grow(t);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return model;
}

}  // namespace satthermo
