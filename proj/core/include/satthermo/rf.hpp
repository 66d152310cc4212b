#pragma once

#include "satthermo/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace satthermo {

/// Internal nodes send x[feature] <= threshold to `left`; leaves have feature < 0.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0;
    std::uint32_t left = 0;
    std::uint32_t right = 0;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // preorder, root first

    double predict(std::span<const double> row) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;

    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

struct RfHyperparams {
    std::size_t n_trees = 100;
    std::size_t min_samples_leaf = 5;
    std::size_t max_depth = 0;  // 0 = unlimited
    bool bootstrap = true;

    friend bool operator==(const RfHyperparams&, const RfHyperparams&) = default;
};

struct RfModel {
    std::vector<std::string> feature_names;
    std::vector<RegressionTree> trees;
    std::vector<std::uint64_t> tree_seeds;
    RfHyperparams hyperparams;
    double target_min = 0.0;
    double target_max = 0.0;

    double predict(std::span<const double> row) const;

    friend bool operator==(const RfModel&, const RfModel&) = default;
};

/// Incremental mean clamped to [min, max] of the inputs. Exact for constant
/// input and never leaves the input range.
double bounded_mean(std::span<const double> values);

/// CART regression tree over `sample` (row indices, repeats allowed). Splits
/// maximize the reduction in squared error over every feature; candidate
/// thresholds are midpoints between consecutive distinct values, and ties go
/// to the lower feature index, then the lower threshold. Each child keeps at
/// least `min_samples_leaf` samples; constant-target nodes become leaves.
RegressionTree fit_tree(const Dataset& data, std::span<const std::size_t> sample,
                        const RfHyperparams& hp);

/// Tree t is fit on n draws with replacement from an mt19937_64 seeded by
/// derive_seed(seed, "rf-tree", t). Trees are distributed over `workers`
/// threads; the model does not depend on the worker count.
RfModel fit_rf(const Dataset& train, std::uint64_t seed, const RfHyperparams& hp = {},
               std::size_t workers = 1);

double predict_rf(const RfModel& m, double t_ambient, double rh);

}  // namespace satthermo
