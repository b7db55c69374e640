#include "atcd/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "atcd/errors.hpp"
#include "atcd/rng.hpp"
#include "doctest.h"

using namespace atcd;
using namespace atcd::gnn;

namespace {

// A small graph with random features and labels; no scenario plumbing needed
// because ScenarioGraph is a plain container.
ScenarioGraph toy_graph(int n, std::uint64_t seed, double edge_prob = 0.5) {
    Rng rng = Rng::substream(seed, "toy-graph");
    ScenarioGraph g;
    g.sector_id = "TOY";
    for (int i = 0; i < n; ++i) {
        g.node_ids.push_back("AC" + std::to_string(i));
        std::vector<double> row(kNodeFeatureCount);
        for (auto& v : row) v = rng.uniform(-1.0, 1.0);
        g.node_features.push_back(std::move(row));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < edge_prob) {
                g.edges.emplace_back(i, j);
                g.edge_features.push_back({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
            }
    std::vector<int> labels;
    int total = 0;
    for (int i = 0; i < n; ++i) {
        labels.push_back(static_cast<int>(rng.below(4)));
        total += labels.back();
    }
    g.label_per_node = labels;
    g.label_total = total;
    return g;
}

ModelParams seeded_params(std::uint64_t seed, Dims dims = Dims{}) {
    Rng rng = Rng::substream(seed, "params");
    return ModelParams::init(dims, rng);
}

double leaky(double v) { return v > 0.0 ? v : 0.2 * v; }
double elu(double v) { return v > 0.0 ? v : std::expm1(v); }

// Dense re-evaluation of one attention layer, straight from the definition.
std::vector<std::vector<double>> dense_layer(const ModelParams& p, const std::string& pre,
                                             const ScenarioGraph& g,
                                             const std::vector<std::vector<double>>& x, int d) {
    const int n = static_cast<int>(x.size());
    const int h = p.dims.hidden;
    const double* w_s = p.data(pre + "w_s");
    const double* w_t = p.data(pre + "w_t");
    const double* w_e = p.data(pre + "w_e");
    const double* a = p.data(pre + "a");
    const double* b = p.data(pre + "b");

    auto matvec = [&](const double* m, const double* v, int rows, int cols) {
        std::vector<double> out(rows, 0.0);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) out[r] += m[r * cols + c] * v[c];
        return out;
    };

    std::vector<std::vector<double>> s(n), t(n), out(n, std::vector<double>(h, 0.0));
    for (int i = 0; i < n; ++i) {
        s[i] = matvec(w_s, x[i].data(), h, d);
        t[i] = matvec(w_t, x[i].data(), h, d);
    }
    for (int i = 0; i < n; ++i) {
        // Neighbourhood in adjacency order: neighbours ascending, self last.
        std::vector<std::pair<int, int>> entries;
        for (int e = 0; e < g.edge_count(); ++e) {
            const auto [u, v] = g.edges[e];
            if (u == i) entries.emplace_back(v, e);
            if (v == i) entries.emplace_back(u, e);
        }
        std::sort(entries.begin(), entries.end());
        entries.emplace_back(i, -1);

        std::vector<double> scores;
        for (const auto& [j, eid] : entries) {
            double score = 0.0;
            for (int c = 0; c < h; ++c) {
                double z = s[i][c] + t[j][c];
                if (eid >= 0)
                    for (int q = 0; q < 2; ++q) z += w_e[c * 2 + q] * g.edge_features[eid][q];
                score += a[c] * leaky(z);
            }
            scores.push_back(score);
        }
        const double mx = *std::max_element(scores.begin(), scores.end());
        double denom = 0.0;
        for (double& sc : scores) {
            sc = std::exp(sc - mx);
            denom += sc;
        }
        for (std::size_t k = 0; k < entries.size(); ++k) {
            const double alpha = scores[k] / denom;
            for (int c = 0; c < h; ++c) out[i][c] += alpha * t[entries[k].first][c];
        }
        for (int c = 0; c < h; ++c) out[i][c] += b[c];
    }
    return out;
}

std::array<double, 3> dense_head(const ModelParams& p, const std::string& pre,
                                 const std::vector<double>& in) {
    const int hh = p.dims.head_hidden;
    const int h = p.dims.hidden;
    const double* w1 = p.data(pre + "w1");
    const double* b1 = p.data(pre + "b1");
    const double* w2 = p.data(pre + "w2");
    const double* b2 = p.data(pre + "b2");
    std::vector<double> hidden(hh, 0.0);
    for (int r = 0; r < hh; ++r) {
        for (int c = 0; c < h; ++c) hidden[r] += w1[r * h + c] * in[c];
        hidden[r] = std::max(0.0, hidden[r] + b1[r]);
    }
    std::array<double, 3> out{b2[0], b2[1], b2[2]};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < hh; ++c) out[r] += w2[r * hh + c] * hidden[c];
    return out;
}

}  // namespace

TEST_CASE("pinball loss matches hand-evaluated cases") {
    CHECK(pinball_loss(5.0, {5.0, 5.0, 5.0}) == doctest::Approx(0.0));
    // q=0.1 and q=0.9 each miss by 2 on the cheap side, the median is exact.
    CHECK(pinball_loss(10.0, {8.0, 10.0, 12.0}) == doctest::Approx(0.4 / 3.0));
}

TEST_CASE("pinball loss is non-negative on random draws") {
    Rng rng = Rng::substream(17, "pinball");
    for (int i = 0; i < 1000; ++i) {
        const double y = rng.uniform(0.0, 20.0);
        const std::array<double, 3> q{rng.uniform(-5.0, 25.0), rng.uniform(-5.0, 25.0),
                                      rng.uniform(-5.0, 25.0)};
        CHECK(pinball_loss(y, q) >= 0.0);
    }
}

TEST_CASE("attention rows sum to one over each neighbourhood") {
    const ScenarioGraph g = toy_graph(6, 21, 0.6);
    const ModelParams p = seeded_params(3);
    for (int layer : {1, 2}) {
        const auto rows = attention_weights(p, g, layer);
        REQUIRE(rows.size() == 6);
        for (int i = 0; i < 6; ++i) {
            double sum = 0.0;
            for (double w : rows[i]) sum += w;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("edgeless graph attends only to itself") {
    ScenarioGraph g = toy_graph(4, 22, 0.0);
    REQUIRE(g.edge_count() == 0);
    const ModelParams p = seeded_params(4);
    for (int layer : {1, 2}) {
        const auto rows = attention_weights(p, g, layer);
        for (const auto& row : rows) {
            REQUIRE(row.size() == 1);
            CHECK(row[0] == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("edgeless node outputs depend only on the node's own features") {
    ScenarioGraph g = toy_graph(5, 23, 0.0);
    const ModelParams p = seeded_params(5);
    const ModelOutput base = model_forward(p, g);

    // Scrambling every other node must not move node 2's quantiles.
    Rng rng = Rng::substream(23, "scramble");
    for (int i = 0; i < 5; ++i) {
        if (i == 2) continue;
        for (auto& v : g.node_features[i]) v = rng.uniform(-1.0, 1.0);
    }
    const ModelOutput moved = model_forward(p, g);
    for (int q = 0; q < 3; ++q) CHECK(moved.node_q[2][q] == base.node_q[2][q]);
}

TEST_CASE("nodes with identical features and no edges get identical outputs") {
    ScenarioGraph g = toy_graph(2, 24, 0.0);
    g.node_features[1] = g.node_features[0];
    const ModelParams p = seeded_params(6);
    const ModelOutput out = model_forward(p, g);
    for (int q = 0; q < 3; ++q) CHECK(out.node_q[0][q] == out.node_q[1][q]);
}

TEST_CASE("forward matches a dense re-evaluation of the formula") {
    ScenarioGraph g = toy_graph(3, 25, 1.0);
    REQUIRE(g.edge_count() == 3);
    const ModelParams p = seeded_params(7);
    const ModelOutput out = model_forward(p, g);

    const auto l1 = dense_layer(p, "l1.", g, g.node_features, p.dims.d_in);
    std::vector<std::vector<double>> h1 = l1;
    for (auto& row : h1)
        for (auto& v : row) v = elu(v);
    const auto l2 = dense_layer(p, "l2.", g, h1, p.dims.hidden);

    std::vector<double> pooled(p.dims.hidden, 0.0);
    for (const auto& row : l2)
        for (int c = 0; c < p.dims.hidden; ++c) pooled[c] += row[c];

    for (int i = 0; i < 3; ++i) {
        const auto node = dense_head(p, "node.", l2[i]);
        for (int q = 0; q < 3; ++q)
            CHECK(out.node_q[i][q] == doctest::Approx(node[q]).epsilon(1e-10));
    }
    const auto graph = dense_head(p, "graph.", pooled);
    for (int q = 0; q < 3; ++q)
        CHECK(out.graph_q[q] == doctest::Approx(graph[q]).epsilon(1e-10));
}

TEST_CASE("permuting node order permutes node outputs and keeps the graph head") {
    const ScenarioGraph g = toy_graph(5, 26, 0.5);
    const ModelParams p = seeded_params(8);
    const ModelOutput base = model_forward(p, g);

    const std::vector<int> perm{3, 0, 4, 1, 2};  // new index of old node i
    ScenarioGraph h = g;
    for (int i = 0; i < 5; ++i) {
        h.node_features[perm[i]] = g.node_features[i];
        h.node_ids[perm[i]] = g.node_ids[i];
    }
    for (int e = 0; e < g.edge_count(); ++e) {
        int a = perm[g.edges[e].first], b = perm[g.edges[e].second];
        if (a > b) std::swap(a, b);
        h.edges[e] = {a, b};
    }
    const ModelOutput permuted = model_forward(p, h);
    for (int i = 0; i < 5; ++i)
        for (int q = 0; q < 3; ++q)
            CHECK(permuted.node_q[perm[i]][q] == doctest::Approx(base.node_q[i][q]).epsilon(1e-9));
    for (int q = 0; q < 3; ++q)
        CHECK(permuted.graph_q[q] == doctest::Approx(base.graph_q[q]).epsilon(1e-9));
}

TEST_CASE("forward is reproducible for a fixed seed and graph") {
    const ScenarioGraph g = toy_graph(4, 27, 0.5);
    const ModelParams p1 = seeded_params(9);
    const ModelParams p2 = seeded_params(9);
    const ModelOutput a = model_forward(p1, g);
    const ModelOutput b = model_forward(p2, g);
    for (int q = 0; q < 3; ++q) CHECK(a.graph_q[q] == b.graph_q[q]);
    for (int i = 0; i < 4; ++i)
        for (int q = 0; q < 3; ++q) CHECK(a.node_q[i][q] == b.node_q[i][q]);
}

TEST_CASE("non-finite node features are rejected") {
    ScenarioGraph g = toy_graph(3, 28, 0.5);
    g.node_features[1][4] = std::nan("");
    const ModelParams p = seeded_params(10);
    CHECK_THROWS_WITH_AS(model_forward(p, g), doctest::Contains("non-finite node feature"),
                         numeric_error);
}

TEST_CASE("total loss endpoints and composition") {
    const ScenarioGraph g1 = toy_graph(4, 29, 0.5);
    const ScenarioGraph g2 = toy_graph(3, 30, 0.5);
    const std::vector<const ScenarioGraph*> batch{&g1, &g2};
    const ModelParams p = seeded_params(11);

    TrainConfig cfg;
    cfg.loss_mix = 0.5;
    const double mixed = total_loss(p, batch, cfg);

    // Re-evaluate both terms straight from pinball_loss calls.
    double node_term = 0.0;
    int node_count = 0;
    double graph_term = 0.0;
    for (const ScenarioGraph* g : batch) {
        const ModelOutput out = model_forward(p, *g);
        for (int i = 0; i < g->node_count(); ++i) {
            node_term += pinball_loss((*g->label_per_node)[i], out.node_q[i]);
            ++node_count;
        }
        graph_term += pinball_loss(*g->label_total, out.graph_q);
    }
    node_term /= node_count;
    graph_term /= batch.size();
    CHECK(mixed == doctest::Approx(0.5 * node_term + 0.5 * graph_term).epsilon(1e-12));

    cfg.loss_mix = 1.0;
    CHECK(total_loss(p, batch, cfg) == doctest::Approx(node_term).epsilon(1e-12));
    cfg.loss_mix = 0.0;
    CHECK(total_loss(p, batch, cfg) == doctest::Approx(graph_term).epsilon(1e-12));
}

TEST_CASE("perfect predictions give zero loss and zero gradients") {
    // All-zero parameters predict zero everywhere; zero labels make that a
    // perfect fit, so nothing flows back.
    ScenarioGraph g = toy_graph(4, 31, 0.5);
    g.label_per_node = std::vector<int>{0, 0, 0, 0};
    g.label_total = 0;
    const ModelParams p = ModelParams::zeros(Dims{});
    const std::vector<const ScenarioGraph*> batch{&g};
    TrainConfig cfg;
    CHECK(total_loss(p, batch, cfg) == 0.0);
    std::vector<double> grads;
    CHECK(loss_and_gradients(p, batch, cfg, grads) == 0.0);
    for (double gr : grads) CHECK(gr == 0.0);
}

TEST_CASE("missing labels in a batch are rejected") {
    ScenarioGraph g = toy_graph(3, 32, 0.5);
    g.label_per_node.reset();
    g.label_total.reset();
    const ModelParams p = seeded_params(12);
    const std::vector<const ScenarioGraph*> batch{&g};
    TrainConfig cfg;
    CHECK_THROWS_WITH_AS(total_loss(p, batch, cfg), doctest::Contains("missing labels"),
                         data_error);
    std::vector<double> grads;
    CHECK_THROWS_WITH_AS(loss_and_gradients(p, batch, cfg, grads),
                         doctest::Contains("missing labels"), data_error);
}

TEST_CASE("analytic gradients match central finite differences") {
    const ScenarioGraph g1 = toy_graph(5, 33, 0.5);
    const ScenarioGraph g2 = toy_graph(3, 34, 0.7);
    const std::vector<const ScenarioGraph*> batch{&g1, &g2};
    ModelParams p = seeded_params(13);
    TrainConfig cfg;

    std::vector<double> grads;
    loss_and_gradients(p, batch, cfg, grads);
    REQUIRE(grads.size() == p.values.size());

    Rng rng = Rng::substream(13, "gradcheck");
    const double h = 1e-5;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t i = rng.below(p.values.size());
        const double saved = p.values[i];
        p.values[i] = saved + h;
        const double up = total_loss(p, batch, cfg);
        p.values[i] = saved - h;
        const double down = total_loss(p, batch, cfg);
        p.values[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double scale = std::max({std::abs(numeric), std::abs(grads[i]), 1e-6});
        INFO("parameter block ", p.block_of(i));
        CHECK(std::abs(numeric - grads[i]) / scale < 1e-4);
    }
}

TEST_CASE("gradients are deterministic for fixed params and batch") {
    const ScenarioGraph g = toy_graph(4, 35, 0.5);
    const std::vector<const ScenarioGraph*> batch{&g};
    const ModelParams p = seeded_params(14);
    TrainConfig cfg;
    std::vector<double> a, b;
    const double la = loss_and_gradients(p, batch, cfg, a);
    const double lb = loss_and_gradients(p, batch, cfg, b);
    CHECK(la == lb);
    CHECK(a == b);
}

TEST_CASE("adamw leaves parameters alone on zero gradient without decay") {
    ModelParams p = seeded_params(15);
    const std::vector<double> before = p.values;
    AdamWState state;
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step(p, std::vector<double>(p.values.size(), 0.0), state, cfg);
    CHECK(p.values == before);
    CHECK(state.step == 1);
}

TEST_CASE("adamw with zero gradient applies pure decoupled decay") {
    ModelParams p = seeded_params(16);
    const std::vector<double> before = p.values;
    AdamWState state;
    TrainConfig cfg;
    adamw_step(p, std::vector<double>(p.values.size(), 0.0), state, cfg);
    const double shrink = 1.0 - cfg.learning_rate * cfg.weight_decay;
    for (std::size_t i = 0; i < before.size(); ++i)
        CHECK(p.values[i] == doctest::Approx(before[i] * shrink).epsilon(1e-12));
}

TEST_CASE("adamw first step matches the hand-computed update") {
    ModelParams p = ModelParams::zeros(Dims{});
    p.values[0] = 0.5;
    p.values[1] = -0.25;
    std::vector<double> grads(p.values.size(), 0.0);
    grads[0] = 0.2;
    grads[1] = -0.1;
    AdamWState state;
    TrainConfig cfg;  // lr 1e-3, decay 0.01
    adamw_step(p, grads, state, cfg);

    // With zero moments the bias corrections cancel the decay rates exactly:
    // mhat = g, vhat = g^2.
    auto expected = [&](double theta, double g) {
        const double mhat = g;
        const double vhat = g * g;
        return theta - cfg.learning_rate * (mhat / (std::sqrt(vhat) + 1e-8) +
                                            cfg.weight_decay * theta);
    };
    CHECK(p.values[0] == doctest::Approx(expected(0.5, 0.2)).epsilon(1e-12));
    CHECK(p.values[1] == doctest::Approx(expected(-0.25, -0.1)).epsilon(1e-12));
    CHECK(p.values[2] == 0.0);
    CHECK(state.step == 1);
}

TEST_CASE("postprocess sorts the quantile triple and clamps at zero") {
    const auto sorted = postprocess_quantiles({3.0, -1.0, 2.0});
    CHECK(sorted[0] == 0.0);
    CHECK(sorted[1] == 2.0);
    CHECK(sorted[2] == 3.0);

    const auto kept = postprocess_quantiles({0.5, 1.0, 2.0});
    CHECK(kept[0] == 0.5);
    CHECK(kept[1] == 1.0);
    CHECK(kept[2] == 2.0);

    const auto clamped = postprocess_quantiles({-3.0, -2.0, -1.0});
    CHECK(clamped[0] == 0.0);
    CHECK(clamped[1] == 0.0);
    CHECK(clamped[2] == 0.0);
}
