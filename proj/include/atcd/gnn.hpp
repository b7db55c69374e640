#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "atcd/graph.hpp"
#include "atcd/rng.hpp"

// Two GATv2 attention layers followed by a node head and a sum-pooled graph
// head, each predicting three clearance-count quantiles. Gradients are
// hand-derived reverse mode over the explicit forward pass below; no
// autodiff tape is involved, which keeps training cheap and the gradient
// check exact.

namespace atcd::gnn {

struct Dims {
    int d_in = 16;
    int d_edge = 2;
    int hidden = 64;
    int head_hidden = 32;
    int n_quantiles = 3;
};

struct ParamBlock {
    std::string name;
    int rows = 0;
    int cols = 0;  // 1 for vectors
    std::size_t offset = 0;
    std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

// All parameters live in one flat vector; the block table names slices of
// it. The optimizer, the gradient check and the checkpoint writer all work
// on the flat view.
struct ModelParams {
    Dims dims;
    std::vector<ParamBlock> blocks;
    std::vector<double> values;

    static ModelParams zeros(const Dims& dims);
    // Uniform fan-in initialization, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    static ModelParams init(const Dims& dims, Rng& rng);

    const ParamBlock& block(const std::string& name) const;
    double* data(const std::string& name);
    const double* data(const std::string& name) const;
    // Name of the block containing flat index i, for diagnostics.
    const std::string& block_of(std::size_t i) const;
};

struct ModelOutput {
    std::vector<std::array<double, 3>> node_q;  // raw quantile triples per node
    std::array<double, 3> graph_q{};            // raw quantile triple, sum pooled
};

ModelOutput model_forward(const ModelParams& p, const ScenarioGraph& g);

// Per-node attention rows of one layer (1 or 2). Row i holds the weights
// over the node's neighbourhood in the same order as its adjacency list
// (neighbours ascending, self last); each row sums to 1.
std::vector<std::vector<double>> attention_weights(const ModelParams& p, const ScenarioGraph& g,
                                                   int layer);

struct TrainConfig {
    int epochs = 50;
    int batch_size = 8;
    double learning_rate = 1e-3;
    double weight_decay = 0.03;
    std::array<double, 3> quantiles{0.1, 0.5, 0.9};
    std::array<double, 3> bucket_percentiles{10.0, 50.0, 90.0};
    double loss_mix = 0.5;  // weight of the node term; graph term gets 1 - loss_mix
    std::uint64_t seed = 0;
    Dims dims;
};

// Mean pinball loss over the three quantiles for one target.
double pinball_loss(double y, const std::array<double, 3>& y_hat,
                    const std::array<double, 3>& quantiles = {0.1, 0.5, 0.9});

// loss_mix * mean node pinball (over every node of every batch graph)
// + (1 - loss_mix) * mean graph pinball (over batch graphs). All graphs must
// carry labels.
double total_loss(const ModelParams& p, const std::vector<const ScenarioGraph*>& batch,
                  const TrainConfig& cfg);

// total_loss plus its exact gradient with respect to every parameter.
double loss_and_gradients(const ModelParams& p, const std::vector<const ScenarioGraph*>& batch,
                          const TrainConfig& cfg, std::vector<double>& grads);

struct AdamWState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
};

void adamw_step(ModelParams& p, const std::vector<double>& grads, AdamWState& state,
                const TrainConfig& cfg);

// Sorts the raw quantile triple ascending and clamps at zero; returns
// (q10, median, q90) as used at inference time.
std::array<double, 3> postprocess_quantiles(const std::array<double, 3>& raw);

}  // namespace atcd::gnn
