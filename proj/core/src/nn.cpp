#include "satthermo/nn.hpp"

#include "satthermo/errors.hpp"
#include "satthermo/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace satthermo {

NnModel::NnModel(Standardizer inputs, double target_mean, double target_std,
                 std::vector<std::size_t> layer_sizes)
    : inputs_(std::move(inputs)), target_mean_(target_mean), target_std_(target_std) {
    if (layer_sizes.size() < 2 || layer_sizes.front() != inputs_.size() || layer_sizes.back() != 1) {
        throw ShapeError("layer sizes must run from the input width to a single output");
    }
    if (!(target_std_ > 0.0)) throw InvalidParameterError("target scale must be positive");
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        if (layer_sizes[l] == 0 || layer_sizes[l + 1] == 0) throw ShapeError("empty layer");
        DenseLayer layer;
        layer.inputs = layer_sizes[l];
        layer.outputs = layer_sizes[l + 1];
        layer.weights.assign(layer.inputs * layer.outputs, 0.0);
        layer.biases.assign(layer.outputs, 0.0);
        layers_.push_back(std::move(layer));
    }
}

std::vector<std::size_t> NnModel::layer_sizes() const {
    std::vector<std::size_t> sizes;
    if (layers_.empty()) return sizes;
    sizes.push_back(layers_.front().inputs);
    for (const auto& l : layers_) sizes.push_back(l.outputs);
    return sizes;
}

std::size_t NnModel::parameter_count() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.weights.size() + l.biases.size();
    return n;
}

std::vector<double> NnModel::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& l : layers_) {
        flat.insert(flat.end(), l.weights.begin(), l.weights.end());
        flat.insert(flat.end(), l.biases.begin(), l.biases.end());
    }
    return flat;
}

void NnModel::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ShapeError(fmt::format("expected {} parameters, got {}", parameter_count(), flat.size()));
    }
    auto it = flat.begin();
    for (auto& l : layers_) {
        std::copy_n(it, l.weights.size(), l.weights.begin());
        it += static_cast<std::ptrdiff_t>(l.weights.size());
        std::copy_n(it, l.biases.size(), l.biases.begin());
        it += static_cast<std::ptrdiff_t>(l.biases.size());
    }
}

double NnModel::forward_standardized(std::span<const double> z) const {
    if (layers_.empty()) throw ShapeError("network has no layers");
    if (z.size() != layers_.front().inputs) {
        throw ShapeError(fmt::format("network expects {} inputs, got {}", layers_.front().inputs, z.size()));
    }
    std::vector<double> act(z.begin(), z.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        next.assign(layer.outputs, 0.0);
        for (std::size_t o = 0; o < layer.outputs; ++o) {
            double s = layer.biases[o];
            const double* w = layer.weights.data() + o * layer.inputs;
            for (std::size_t i = 0; i < layer.inputs; ++i) s += w[i] * act[i];
            next[o] = (l + 1 < layers_.size()) ? std::max(s, 0.0) : s;
        }
        act.swap(next);
    }
    return act[0];
}

double NnModel::predict(std::span<const double> row) const {
    return forward_standardized(inputs_.transform(row)) * target_std_ + target_mean_;
}

double nn_forward(const NnModel& m, std::span<const double> row) { return m.predict(row); }

NnGradient nn_gradient(const NnModel& m, std::span<const double> z_rows,
                       std::span<const double> z_targets) {
    const auto& layers = m.layers();
    if (layers.empty()) throw ShapeError("network has no layers");
    const std::size_t width = layers.front().inputs;
    const std::size_t n = z_targets.size();
    if (n == 0 || z_rows.size() != n * width) {
        throw ShapeError(fmt::format("batch of {} values does not match {} targets x {} inputs",
                                     z_rows.size(), n, width));
    }

    NnGradient out;
    out.gradient.assign(m.parameter_count(), 0.0);

    // Offsets of each layer's weights and biases in the flat layout.
    std::vector<std::size_t> w_off(layers.size());
    std::vector<std::size_t> b_off(layers.size());
    std::size_t off = 0;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        w_off[l] = off;
        off += layers[l].weights.size();
        b_off[l] = off;
        off += layers[l].biases.size();
    }

    // acts[0] is the input, acts[l+1] the post-activation of layer l.
    std::vector<std::vector<double>> acts(layers.size() + 1);
    std::vector<std::vector<double>> pre(layers.size());
    std::vector<double> delta;
    std::vector<double> prev_delta;
    const double scale = 2.0 / static_cast<double>(n);
    double sse = 0.0;

    for (std::size_t r = 0; r < n; ++r) {
        acts[0].assign(z_rows.begin() + static_cast<std::ptrdiff_t>(r * width),
                       z_rows.begin() + static_cast<std::ptrdiff_t>((r + 1) * width));
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const auto& layer = layers[l];
            pre[l].assign(layer.outputs, 0.0);
            acts[l + 1].assign(layer.outputs, 0.0);
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                double s = layer.biases[o];
                const double* w = layer.weights.data() + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) s += w[i] * acts[l][i];
                pre[l][o] = s;
                acts[l + 1][o] = (l + 1 < layers.size()) ? std::max(s, 0.0) : s;
            }
        }
        const double residual = acts.back()[0] - z_targets[r];
        sse += residual * residual;

        delta.assign(1, scale * residual);
        for (std::size_t l = layers.size(); l-- > 0;) {
            const auto& layer = layers[l];
            for (std::size_t o = 0; o < layer.outputs; ++o) {
                const double d = delta[o];
                if (d == 0.0) continue;
                double* gw = out.gradient.data() + w_off[l] + o * layer.inputs;
                for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += d * acts[l][i];
                out.gradient[b_off[l] + o] += d;
            }
            if (l == 0) break;
            prev_delta.assign(layer.inputs, 0.0);
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                if (pre[l - 1][i] <= 0.0) continue;  // ReLU gate
                double s = 0.0;
                for (std::size_t o = 0; o < layer.outputs; ++o) s += layer.weights[o * layer.inputs + i] * delta[o];
                prev_delta[i] = s;
            }
            delta.swap(prev_delta);
        }
    }
    out.loss = sse / static_cast<double>(n);
    return out;
}

namespace {

struct StandardizedBatch {
    std::vector<double> rows;
    std::vector<double> targets;
};

StandardizedBatch standardize(const NnModel& m, const Dataset& ds) {
    StandardizedBatch b;
    b.rows.reserve(ds.size() * ds.n_features());
    b.targets.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto z = m.input_scaler().transform(ds.row(i));
        b.rows.insert(b.rows.end(), z.begin(), z.end());
        b.targets.push_back((ds.target(i) - m.target_mean()) / m.target_std());
    }
    return b;
}

}  // namespace

NnGradient nn_gradient(const NnModel& m, const Dataset& batch) {
    const auto b = standardize(m, batch);
    return nn_gradient(m, b.rows, b.targets);
}

NnModel fit_nn(const Dataset& train, std::uint64_t seed, const NnHyperparams& hp) {
    if (train.size() < 50) {
        throw TooFewRowsError(fmt::format("NN training needs at least 50 rows, got {}", train.size()));
    }
    if (hp.epochs == 0 || hp.batch_cap == 0 || !(hp.learning_rate > 0.0)) {
        throw InvalidParameterError("NN epochs, batch cap and learning rate must be positive");
    }
    const auto scaler = Standardizer::fit(train);
    const auto tm = moments(train.targets());
    std::vector<std::size_t> sizes{train.n_features()};
    sizes.insert(sizes.end(), hp.hidden.begin(), hp.hidden.end());
    sizes.push_back(1);
    NnModel model(scaler, tm.mean, tm.stddev > 0.0 ? tm.stddev : 1.0, sizes);

    {
        Rng rng(derive_seed(seed, "nn-init"));
        for (auto& layer : model.layers()) {
            const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs));
            for (auto& w : layer.weights) w = (2.0 * uniform01(rng) - 1.0) * limit;
        }
    }

    const auto data = standardize(model, train);
    const std::size_t n = train.size();
    const std::size_t width = train.n_features();
    const bool full_batch = n <= hp.batch_cap;

    auto params = model.parameters();
    std::vector<double> m1(params.size(), 0.0);
    std::vector<double> m2(params.size(), 0.0);
    std::size_t step = 0;
    auto adam = [&](const std::vector<double>& g) {
        ++step;
        const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
        for (std::size_t k = 0; k < params.size(); ++k) {
            m1[k] = hp.beta1 * m1[k] + (1.0 - hp.beta1) * g[k];
            m2[k] = hp.beta2 * m2[k] + (1.0 - hp.beta2) * g[k] * g[k];
            params[k] -= hp.learning_rate * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + hp.epsilon);
        }
        model.set_parameters(params);
    };

    const double initial = nn_gradient(model, data.rows, data.targets).loss;
    if (!std::isfinite(initial)) throw DivergenceError(0);
    double best = initial;
    auto best_params = params;
    std::vector<double> best_history;
    best_history.reserve(hp.epochs + 1);

    auto consider = [&](double loss, std::size_t epoch) {
        if (!std::isfinite(loss)) throw DivergenceError(epoch);
        if (loss < best) {
            best = loss;
            best_params = params;
        }
    };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> batch_rows;
    std::vector<double> batch_targets;

    NnTrainingLog log;
    log.initial_mse = initial;
    std::size_t epoch = 0;
    for (; epoch < hp.epochs; ++epoch) {
        if (full_batch) {
            const auto g = nn_gradient(model, data.rows, data.targets);
            consider(g.loss, epoch);  // loss of the parameters before this step
            adam(g.gradient);
        } else {
            Rng rng(derive_seed(seed, "nn-epoch", epoch));
            shuffle(std::span<std::size_t>(order), rng);
            for (std::size_t begin = 0; begin < n; begin += hp.batch_cap) {
                const std::size_t end = std::min(n, begin + hp.batch_cap);
                batch_rows.clear();
                batch_targets.clear();
                for (std::size_t k = begin; k < end; ++k) {
                    const auto i = order[k];
                    batch_rows.insert(batch_rows.end(), data.rows.begin() + static_cast<std::ptrdiff_t>(i * width),
                                      data.rows.begin() + static_cast<std::ptrdiff_t>((i + 1) * width));
                    batch_targets.push_back(data.targets[i]);
                }
                adam(nn_gradient(model, batch_rows, batch_targets).gradient);
            }
            consider(nn_gradient(model, data.rows, data.targets).loss, epoch);
        }
        best_history.push_back(best);
        if (epoch >= hp.patience &&
            best_history[epoch - hp.patience] - best_history[epoch] < hp.tolerance) {
            log.early_stopped = true;
            ++epoch;
            break;
        }
    }
    if (full_batch) consider(nn_gradient(model, data.rows, data.targets).loss, epoch);

    model.set_parameters(best_params);
    log.final_mse = best;
    log.epochs_run = epoch;
    model.training = log;
    model.hyperparams = hp;
    return model;
}

}  // namespace satthermo
