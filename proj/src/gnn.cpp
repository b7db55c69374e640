#include "atcd/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "atcd/errors.hpp"

namespace atcd::gnn {

namespace {

constexpr double kLeakySlope = 0.2;

using Rows = std::vector<std::vector<double>>;
// Per node: (neighbour index, edge id) pairs, neighbours ascending, self
// last with edge id -1.
using Adjacency = std::vector<std::vector<std::pair<int, int>>>;

Adjacency build_adjacency(const ScenarioGraph& g) {
    Adjacency adj(g.node_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        const auto [i, j] = g.edges[e];
        adj[i].emplace_back(j, e);
        adj[j].emplace_back(i, e);
    }
    for (int i = 0; i < g.node_count(); ++i) {
        std::sort(adj[i].begin(), adj[i].end());
        adj[i].emplace_back(i, -1);
    }
    return adj;
}

// y += M x, M row-major (rows x cols).
void mat_vec_add(const double* m, int rows, int cols, const double* x, double* y) {
    for (int r = 0; r < rows; ++r) {
        double acc = 0.0;
        const double* row = m + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] += acc;
    }
}

// dM += dy outer x; dx += M^T dy.
void mat_vec_backward(const double* m, int rows, int cols, const double* x, const double* dy,
                      double* dm, double* dx) {
    for (int r = 0; r < rows; ++r) {
        const double g = dy[r];
        const double* row = m + static_cast<std::size_t>(r) * cols;
        double* drow = dm + static_cast<std::size_t>(r) * cols;
        for (int c = 0; c < cols; ++c) {
            drow[c] += g * x[c];
            if (dx) dx[c] += row[c] * g;
        }
    }
}

struct LayerTrace {
    Rows s;                  // n x h, W_s x_i
    Rows t;                  // n x h, W_t x_i
    Rows z;                  // n x (entries*h), scoring pre-activations
    Rows alpha;              // n x entries, attention weights
    Rows out;                // n x h, pre anything downstream
};

struct LayerParams {
    const double* w_s;
    const double* w_t;
    const double* w_e;
    const double* a;
    const double* b;
    int h;
    int d;
    int d_e;
};

struct LayerGrads {
    double* w_s;
    double* w_t;
    double* w_e;
    double* a;
    double* b;
};

void gat_forward(const LayerParams& lp, const Rows& x, const Adjacency& adj,
                 const std::vector<std::array<double, 2>>& edge_feats, LayerTrace& tr) {
    const int n = static_cast<int>(x.size());
    const int h = lp.h;
    tr.s.assign(n, std::vector<double>(h, 0.0));
    tr.t.assign(n, std::vector<double>(h, 0.0));
    tr.z.resize(n);
    tr.alpha.resize(n);
    tr.out.assign(n, std::vector<double>(h, 0.0));
    for (int i = 0; i < n; ++i) {
        mat_vec_add(lp.w_s, h, lp.d, x[i].data(), tr.s[i].data());
        mat_vec_add(lp.w_t, h, lp.d, x[i].data(), tr.t[i].data());
    }
    for (int i = 0; i < n; ++i) {
        const auto& entries = adj[i];
        const int m = static_cast<int>(entries.size());
        tr.z[i].assign(static_cast<std::size_t>(m) * h, 0.0);
        std::vector<double> scores(m);
        for (int k = 0; k < m; ++k) {
            const auto [j, eid] = entries[k];
            double* z = tr.z[i].data() + static_cast<std::size_t>(k) * h;
            for (int c = 0; c < h; ++c) z[c] = tr.s[i][c] + tr.t[j][c];
            if (eid >= 0) mat_vec_add(lp.w_e, h, lp.d_e, edge_feats[eid].data(), z);
            double score = 0.0;
            for (int c = 0; c < h; ++c) {
                const double u = z[c] > 0.0 ? z[c] : kLeakySlope * z[c];
                score += lp.a[c] * u;
            }
            scores[k] = score;
        }
        double max_score = scores[0];
        for (int k = 1; k < m; ++k) max_score = std::max(max_score, scores[k]);
        double denom = 0.0;
        tr.alpha[i].resize(m);
        for (int k = 0; k < m; ++k) {
            tr.alpha[i][k] = std::exp(scores[k] - max_score);
            denom += tr.alpha[i][k];
        }
        for (int k = 0; k < m; ++k) tr.alpha[i][k] /= denom;
        for (int k = 0; k < m; ++k) {
            const int j = entries[k].first;
            const double w = tr.alpha[i][k];
            for (int c = 0; c < h; ++c) tr.out[i][c] += w * tr.t[j][c];
        }
        for (int c = 0; c < h; ++c) tr.out[i][c] += lp.b[c];
    }
}

// d_out is consumed; d_x (n x d) accumulates the input gradient when given.
void gat_backward(const LayerParams& lp, const Rows& x, const Adjacency& adj,
                  const std::vector<std::array<double, 2>>& edge_feats, const LayerTrace& tr,
                  const Rows& d_out, LayerGrads& lg, Rows* d_x) {
    const int n = static_cast<int>(x.size());
    const int h = lp.h;
    Rows ds(n, std::vector<double>(h, 0.0));
    Rows dt(n, std::vector<double>(h, 0.0));
    for (int i = 0; i < n; ++i) {
        const auto& entries = adj[i];
        const int m = static_cast<int>(entries.size());
        for (int c = 0; c < h; ++c) lg.b[c] += d_out[i][c];
        // Aggregation path: out_i = sum_k alpha_ik t_j.
        std::vector<double> d_alpha(m, 0.0);
        for (int k = 0; k < m; ++k) {
            const int j = entries[k].first;
            const double w = tr.alpha[i][k];
            double acc = 0.0;
            for (int c = 0; c < h; ++c) {
                acc += d_out[i][c] * tr.t[j][c];
                dt[j][c] += w * d_out[i][c];
            }
            d_alpha[k] = acc;
        }
        // Softmax backward.
        double dot = 0.0;
        for (int k = 0; k < m; ++k) dot += tr.alpha[i][k] * d_alpha[k];
        for (int k = 0; k < m; ++k) {
            const double de = tr.alpha[i][k] * (d_alpha[k] - dot);
            if (de == 0.0) continue;
            const auto [j, eid] = entries[k];
            const double* z = tr.z[i].data() + static_cast<std::size_t>(k) * h;
            for (int c = 0; c < h; ++c) {
                const double u = z[c] > 0.0 ? z[c] : kLeakySlope * z[c];
                lg.a[c] += de * u;
                const double dz = de * lp.a[c] * (z[c] > 0.0 ? 1.0 : kLeakySlope);
                ds[i][c] += dz;
                dt[j][c] += dz;
                if (eid >= 0) {
                    double* row = lg.w_e + static_cast<std::size_t>(c) * lp.d_e;
                    for (int q = 0; q < lp.d_e; ++q) row[q] += dz * edge_feats[eid][q];
                }
            }
        }
    }
    for (int i = 0; i < n; ++i) {
        mat_vec_backward(lp.w_s, h, lp.d, x[i].data(), ds[i].data(), lg.w_s,
                         d_x ? (*d_x)[i].data() : nullptr);
        mat_vec_backward(lp.w_t, h, lp.d, x[i].data(), dt[i].data(), lg.w_t,
                         d_x ? (*d_x)[i].data() : nullptr);
    }
}

struct HeadTrace {
    std::vector<double> hidden;  // post ReLU
};

void head_forward(const double* w1, const double* b1, const double* w2, const double* b2,
                  int hh, int d, const double* in, HeadTrace& tr, std::array<double, 3>& out) {
    tr.hidden.assign(hh, 0.0);
    mat_vec_add(w1, hh, d, in, tr.hidden.data());
    for (int c = 0; c < hh; ++c) {
        tr.hidden[c] += b1[c];
        if (tr.hidden[c] < 0.0) tr.hidden[c] = 0.0;
    }
    out = {b2[0], b2[1], b2[2]};
    mat_vec_add(w2, 3, hh, tr.hidden.data(), out.data());
}

void head_backward(const double* w1, const double* w2, int hh, int d, const double* in,
                   const HeadTrace& tr, const std::array<double, 3>& d_out, double* gw1,
                   double* gb1, double* gw2, double* gb2, double* d_in) {
    std::vector<double> d_hidden(hh, 0.0);
    mat_vec_backward(w2, 3, hh, tr.hidden.data(), d_out.data(), gw2, d_hidden.data());
    for (int q = 0; q < 3; ++q) gb2[q] += d_out[q];
    for (int c = 0; c < hh; ++c) {
        if (tr.hidden[c] <= 0.0) d_hidden[c] = 0.0;  // ReLU gate
        gb1[c] += d_hidden[c];
    }
    mat_vec_backward(w1, hh, d, in, d_hidden.data(), gw1, d_in);
}

struct Trace {
    Adjacency adj;
    Rows x1;       // node features
    LayerTrace l1;
    Rows h1;       // ELU(l1.out), layer 2 input
    LayerTrace l2; // l2.out is the final embedding
    std::vector<HeadTrace> node_heads;
    std::vector<double> pooled;
    HeadTrace graph_head;
};

LayerParams layer_params(const ModelParams& p, int layer) {
    const std::string pre = layer == 1 ? "l1." : "l2.";
    return {p.data(pre + "w_s"), p.data(pre + "w_t"), p.data(pre + "w_e"),
            p.data(pre + "a"),   p.data(pre + "b"),   p.dims.hidden,
            layer == 1 ? p.dims.d_in : p.dims.hidden, p.dims.d_edge};
}

LayerGrads layer_grads(const ModelParams& p, std::vector<double>& grads, int layer) {
    const std::string pre = layer == 1 ? "l1." : "l2.";
    auto at = [&](const std::string& name) { return grads.data() + p.block(name).offset; };
    return {at(pre + "w_s"), at(pre + "w_t"), at(pre + "w_e"), at(pre + "a"), at(pre + "b")};
}

ModelOutput forward_traced(const ModelParams& p, const ScenarioGraph& g, Trace& tr) {
    const int n = g.node_count();
    if (n == 0) throw data_error("model_forward: graph has no nodes");
    if (static_cast<int>(g.node_features[0].size()) != p.dims.d_in)
        throw data_error("model_forward: node feature width does not match model");
    for (const auto& row : g.node_features)
        for (double v : row)
            if (!std::isfinite(v)) throw numeric_error("model_forward: non-finite node feature");
    for (const auto& ef : g.edge_features)
        for (double v : ef)
            if (!std::isfinite(v)) throw numeric_error("model_forward: non-finite edge feature");

    tr.adj = build_adjacency(g);
    tr.x1 = g.node_features;
    gat_forward(layer_params(p, 1), tr.x1, tr.adj, g.edge_features, tr.l1);
    const int h = p.dims.hidden;
    tr.h1.assign(n, std::vector<double>(h));
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < h; ++c) {
            const double v = tr.l1.out[i][c];
            tr.h1[i][c] = v > 0.0 ? v : std::expm1(v);  // ELU
        }
    gat_forward(layer_params(p, 2), tr.h1, tr.adj, g.edge_features, tr.l2);

    ModelOutput out;
    out.node_q.resize(n);
    tr.node_heads.resize(n);
    const int hh = p.dims.head_hidden;
    for (int i = 0; i < n; ++i)
        head_forward(p.data("node.w1"), p.data("node.b1"), p.data("node.w2"), p.data("node.b2"),
                     hh, h, tr.l2.out[i].data(), tr.node_heads[i], out.node_q[i]);
    tr.pooled.assign(h, 0.0);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < h; ++c) tr.pooled[c] += tr.l2.out[i][c];
    head_forward(p.data("graph.w1"), p.data("graph.b1"), p.data("graph.w2"), p.data("graph.b2"),
                 hh, h, tr.pooled.data(), tr.graph_head, out.graph_q);
    for (const auto& q : out.node_q)
        for (double v : q)
            if (!std::isfinite(v)) throw numeric_error("model_forward: non-finite node output");
    for (double v : out.graph_q)
        if (!std::isfinite(v)) throw numeric_error("model_forward: non-finite graph output");
    return out;
}

// d pinball / d y_hat for one quantile, unscaled.
double pinball_grad(double y, double y_hat, double q) {
    if (y_hat > y) return 1.0 - q;
    if (y_hat < y) return -q;
    return 0.0;
}

}  // namespace

ModelParams ModelParams::zeros(const Dims& dims) {
    ModelParams p;
    p.dims = dims;
    std::size_t offset = 0;
    auto add = [&](const std::string& name, int rows, int cols) {
        p.blocks.push_back({name, rows, cols, offset});
        offset += static_cast<std::size_t>(rows) * cols;
    };
    const int h = dims.hidden, hh = dims.head_hidden;
    add("l1.w_s", h, dims.d_in);
    add("l1.w_t", h, dims.d_in);
    add("l1.w_e", h, dims.d_edge);
    add("l1.a", h, 1);
    add("l1.b", h, 1);
    add("l2.w_s", h, h);
    add("l2.w_t", h, h);
    add("l2.w_e", h, dims.d_edge);
    add("l2.a", h, 1);
    add("l2.b", h, 1);
    add("node.w1", hh, h);
    add("node.b1", hh, 1);
    add("node.w2", dims.n_quantiles, hh);
    add("node.b2", dims.n_quantiles, 1);
    add("graph.w1", hh, h);
    add("graph.b1", hh, 1);
    add("graph.w2", dims.n_quantiles, hh);
    add("graph.b2", dims.n_quantiles, 1);
    p.values.assign(offset, 0.0);
    return p;
}

ModelParams ModelParams::init(const Dims& dims, Rng& rng) {
    ModelParams p = zeros(dims);
    for (const auto& blk : p.blocks) {
        const bool bias = blk.name.ends_with(".b") || blk.name.ends_with(".b1") ||
                          blk.name.ends_with(".b2");
        if (bias) continue;  // biases start at zero
        // Attention vectors scale by the hidden width, matrices by their
        // input width.
        const int fan_in = blk.cols > 1 ? blk.cols : blk.rows;
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < blk.size(); ++i)
            p.values[blk.offset + i] = rng.uniform(-bound, bound);
    }
    return p;
}

const ParamBlock& ModelParams::block(const std::string& name) const {
    for (const auto& b : blocks)
        if (b.name == name) return b;
    throw std::invalid_argument("unknown parameter block: " + name);
}

double* ModelParams::data(const std::string& name) { return values.data() + block(name).offset; }

const double* ModelParams::data(const std::string& name) const {
    return values.data() + block(name).offset;
}

const std::string& ModelParams::block_of(std::size_t i) const {
    for (const auto& b : blocks)
        if (i >= b.offset && i < b.offset + b.size()) return b.name;
    throw std::invalid_argument("parameter index out of range");
}

ModelOutput model_forward(const ModelParams& p, const ScenarioGraph& g) {
    Trace tr;
    return forward_traced(p, g, tr);
}

std::vector<std::vector<double>> attention_weights(const ModelParams& p, const ScenarioGraph& g,
                                                   int layer) {
    if (layer != 1 && layer != 2) throw std::invalid_argument("attention layer must be 1 or 2");
    Trace tr;
    forward_traced(p, g, tr);
    return layer == 1 ? tr.l1.alpha : tr.l2.alpha;
}

double pinball_loss(double y, const std::array<double, 3>& y_hat,
                    const std::array<double, 3>& quantiles) {
    double acc = 0.0;
    for (int k = 0; k < 3; ++k) {
        const double r = y - y_hat[k];
        acc += std::max(quantiles[k] * r, (quantiles[k] - 1.0) * r);
    }
    return acc / 3.0;
}

double total_loss(const ModelParams& p, const std::vector<const ScenarioGraph*>& batch,
                  const TrainConfig& cfg) {
    if (batch.empty()) throw std::invalid_argument("total_loss: empty batch");
    double node_sum = 0.0, graph_sum = 0.0;
    long node_count = 0;
    for (const ScenarioGraph* g : batch) {
        if (!g->label_per_node || !g->label_total)
            throw data_error("total_loss: batch graph is missing labels");
        const ModelOutput out = model_forward(p, *g);
        for (int i = 0; i < g->node_count(); ++i) {
            node_sum += pinball_loss((*g->label_per_node)[i], out.node_q[i], cfg.quantiles);
            ++node_count;
        }
        graph_sum += pinball_loss(*g->label_total, out.graph_q, cfg.quantiles);
    }
    return cfg.loss_mix * node_sum / static_cast<double>(node_count) +
           (1.0 - cfg.loss_mix) * graph_sum / static_cast<double>(batch.size());
}

double loss_and_gradients(const ModelParams& p, const std::vector<const ScenarioGraph*>& batch,
                          const TrainConfig& cfg, std::vector<double>& grads) {
    if (batch.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
    grads.assign(p.values.size(), 0.0);
    long node_count = 0;
    for (const ScenarioGraph* g : batch) {
        if (!g->label_per_node || !g->label_total)
            throw data_error("loss_and_gradients: batch graph is missing labels");
        node_count += g->node_count();
    }
    const double node_scale = cfg.loss_mix / (3.0 * static_cast<double>(node_count));
    const double graph_scale = (1.0 - cfg.loss_mix) / (3.0 * static_cast<double>(batch.size()));
    double node_sum = 0.0, graph_sum = 0.0;
    const int h = p.dims.hidden, hh = p.dims.head_hidden;
    auto gptr = [&](const std::string& name) { return grads.data() + p.block(name).offset; };

    for (const ScenarioGraph* gp : batch) {
        const ScenarioGraph& g = *gp;
        Trace tr;
        const ModelOutput out = forward_traced(p, g, tr);
        const int n = g.node_count();

        // Loss and output gradients.
        std::vector<std::array<double, 3>> d_node_q(n);
        std::array<double, 3> d_graph_q{};
        for (int i = 0; i < n; ++i) {
            const double y = (*g.label_per_node)[i];
            node_sum += pinball_loss(y, out.node_q[i], cfg.quantiles);
            for (int k = 0; k < 3; ++k)
                d_node_q[i][k] = node_scale * pinball_grad(y, out.node_q[i][k], cfg.quantiles[k]);
        }
        const double yg = *g.label_total;
        graph_sum += pinball_loss(yg, out.graph_q, cfg.quantiles);
        for (int k = 0; k < 3; ++k)
            d_graph_q[k] = graph_scale * pinball_grad(yg, out.graph_q[k], cfg.quantiles[k]);

        // Heads.
        Rows d_emb(n, std::vector<double>(h, 0.0));
        for (int i = 0; i < n; ++i)
            head_backward(p.data("node.w1"), p.data("node.w2"), hh, h, tr.l2.out[i].data(),
                          tr.node_heads[i], d_node_q[i], gptr("node.w1"), gptr("node.b1"),
                          gptr("node.w2"), gptr("node.b2"), d_emb[i].data());
        std::vector<double> d_pooled(h, 0.0);
        head_backward(p.data("graph.w1"), p.data("graph.w2"), hh, h, tr.pooled.data(),
                      tr.graph_head, d_graph_q, gptr("graph.w1"), gptr("graph.b1"),
                      gptr("graph.w2"), gptr("graph.b2"), d_pooled.data());
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < h; ++c) d_emb[i][c] += d_pooled[c];

        // Layer 2, ELU, layer 1.
        Rows d_h1(n, std::vector<double>(h, 0.0));
        LayerGrads lg2 = layer_grads(p, grads, 2);
        gat_backward(layer_params(p, 2), tr.h1, tr.adj, g.edge_features, tr.l2, d_emb, lg2, &d_h1);
        Rows d_out1(n, std::vector<double>(h));
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < h; ++c) {
                const double pre = tr.l1.out[i][c];
                d_out1[i][c] = d_h1[i][c] * (pre > 0.0 ? 1.0 : std::exp(pre));
            }
        LayerGrads lg1 = layer_grads(p, grads, 1);
        gat_backward(layer_params(p, 1), tr.x1, tr.adj, g.edge_features, tr.l1, d_out1, lg1,
                     nullptr);
    }
    for (std::size_t i = 0; i < grads.size(); ++i)
        if (!std::isfinite(grads[i]))
            throw numeric_error("non-finite gradient in block " + p.block_of(i));
    return cfg.loss_mix * node_sum / static_cast<double>(node_count) +
           (1.0 - cfg.loss_mix) * graph_sum / static_cast<double>(batch.size());
}

void adamw_step(ModelParams& p, const std::vector<double>& grads, AdamWState& state,
                const TrainConfig& cfg) {
    if (grads.size() != p.values.size())
        throw std::invalid_argument("adamw_step: gradient size mismatch");
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (state.m.empty()) {
        state.m.assign(p.values.size(), 0.0);
        state.v.assign(p.values.size(), 0.0);
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        p.values[i] -= cfg.learning_rate *
                       (mhat / (std::sqrt(vhat) + eps) + cfg.weight_decay * p.values[i]);
    }
}

std::array<double, 3> postprocess_quantiles(const std::array<double, 3>& raw) {
    std::array<double, 3> q = raw;
    std::sort(q.begin(), q.end());
    for (double& v : q) v = std::max(0.0, v);
    return q;
}

}  // namespace atcd::gnn
