#pragma once

#include "satthermo/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace satthermo {

/// Fully connected layer; weights are row-major (outputs x inputs).
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> biases;

    friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct NnHyperparams {
    std::vector<std::size_t> hidden{10, 5};
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Full-batch up to this many rows, mini-batches of this size beyond it.
    std::size_t batch_cap = 4096;
    std::size_t epochs = 2000;
    /// Stop when the best loss improved by less than `tolerance` over `patience` epochs.
    double tolerance = 1e-8;
    std::size_t patience = 50;

    friend bool operator==(const NnHyperparams&, const NnHyperparams&) = default;
};

struct NnTrainingLog {
    double initial_mse = 0.0;  // standardized target units
    double final_mse = 0.0;
    std::size_t epochs_run = 0;
    bool early_stopped = false;

    friend bool operator==(const NnTrainingLog&, const NnTrainingLog&) = default;
};

/// ReLU multilayer perceptron with an identity output, operating on z-scored
/// inputs and target. Parameters flatten layer by layer as weights then biases.
class NnModel {
public:
    NnModel() = default;
    /// Zero-initialized network for the given layer widths (first = inputs, last = 1).
    NnModel(Standardizer inputs, double target_mean, double target_std,
            std::vector<std::size_t> layer_sizes);

    const Standardizer& input_scaler() const noexcept { return inputs_; }
    double target_mean() const noexcept { return target_mean_; }
    double target_std() const noexcept { return target_std_; }
    const std::vector<std::string>& feature_names() const noexcept { return inputs_.names(); }
    std::vector<std::size_t> layer_sizes() const;
    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    std::size_t parameter_count() const noexcept;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    /// Network output for already-standardized inputs, in standardized target units.
    double forward_standardized(std::span<const double> z) const;
    /// Prediction in raw units.
    double predict(std::span<const double> row) const;

    NnHyperparams hyperparams;
    NnTrainingLog training;

    friend bool operator==(const NnModel&, const NnModel&) = default;

private:
    Standardizer inputs_;
    double target_mean_ = 0.0;
    double target_std_ = 1.0;
    std::vector<DenseLayer> layers_;
};

struct NnGradient {
    double loss = 0.0;              // mean squared error
    std::vector<double> gradient;   // same layout as NnModel::parameters()
};

/// Loss and gradient on a standardized batch: `z_rows` is row-major with one
/// row per entry of `z_targets`.
NnGradient nn_gradient(const NnModel& m, std::span<const double> z_rows,
                       std::span<const double> z_targets);
/// Same on raw rows, standardized with the model's own scalers.
NnGradient nn_gradient(const NnModel& m, const Dataset& batch);

double nn_forward(const NnModel& m, std::span<const double> row);

/// Adam on mean squared error. Weights start U(-sqrt(6/fan_in), sqrt(6/fan_in))
/// from derive_seed(seed, "nn-init"), biases at zero. The parameters with the
/// lowest observed training loss are kept. Needs at least 50 rows.
NnModel fit_nn(const Dataset& train, std::uint64_t seed, const NnHyperparams& hp = {});

}  // namespace satthermo
