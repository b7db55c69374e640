#include "atcd/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <sstream>
#include <thread>

#include "atcd/errors.hpp"
#include "atcd/stats.hpp"

namespace atcd {

namespace {

void validate_config(const gnn::TrainConfig& cfg) {
    if (cfg.epochs < 0 || cfg.epochs > 50)
        throw config_error("epochs must be in [0, 50]");
    if (cfg.batch_size < 1) throw config_error("batch_size must be at least 1");
    if (cfg.loss_mix < 0.0 || cfg.loss_mix > 1.0)
        throw config_error("loss_mix must be in [0, 1]");
    for (int k = 0; k < 3; ++k) {
        if (cfg.quantiles[k] <= 0.0 || cfg.quantiles[k] >= 1.0)
            throw config_error("quantiles must lie strictly inside (0, 1)");
        if (k > 0 && cfg.quantiles[k] <= cfg.quantiles[k - 1])
            throw config_error("quantiles must be strictly increasing");
    }
}

std::vector<ScenarioGraph> build_labeled_graphs(const std::vector<Scenario>& scenarios,
                                                const NormalizationStats& stats) {
    std::vector<ScenarioGraph> graphs;
    graphs.reserve(scenarios.size());
    for (const auto& s : scenarios) {
        graphs.push_back(build_graph(s, stats));
        if (!graphs.back().label_total)
            throw data_error("scenario at t=" + std::to_string(s.timestamp) +
                             " has no labels; cannot train on it");
    }
    return graphs;
}

std::vector<const ScenarioGraph*> all_ptrs(const std::vector<ScenarioGraph>& graphs) {
    std::vector<const ScenarioGraph*> ptrs;
    ptrs.reserve(graphs.size());
    for (const auto& g : graphs) ptrs.push_back(&g);
    return ptrs;
}

double graph_median_mae(const gnn::ModelParams& params,
                        const std::vector<ScenarioGraph>& graphs) {
    double acc = 0.0;
    for (const auto& g : graphs) {
        const auto q = gnn::postprocess_quantiles(gnn::model_forward(params, g).graph_q);
        acc += std::abs(q[1] - static_cast<double>(*g.label_total));
    }
    return acc / static_cast<double>(graphs.size());
}

}  // namespace

WeightedSampler::WeightedSampler(const std::vector<double>& targets,
                                 const std::array<double, 3>& percentiles, Rng rng)
    : rng_(rng) {
    if (targets.empty()) throw std::invalid_argument("weighted sampler needs targets");
    edges_ = {stats::percentile(targets, percentiles[0]),
              stats::percentile(targets, percentiles[1]),
              stats::percentile(targets, percentiles[2])};
    std::vector<std::vector<std::size_t>> buckets(4);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double t = targets[i];
        int b = 3;
        if (t <= edges_[0]) b = 0;
        else if (t <= edges_[1]) b = 1;
        else if (t <= edges_[2]) b = 2;
        buckets[b].push_back(i);
    }
    for (auto& b : buckets)
        if (!b.empty()) buckets_.push_back(std::move(b));
    if (buckets_.size() == 1)
        std::cerr << "warning: all training targets fall into one sampling bucket; "
                     "falling back to uniform sampling\n";
}

std::size_t WeightedSampler::next() {
    const auto& bucket = buckets_[rng_.below(buckets_.size())];
    return bucket[rng_.below(bucket.size())];
}

ModelCheckpoint train_fold(const std::vector<Scenario>& train, const std::vector<Scenario>& val,
                           const gnn::TrainConfig& cfg, int fold_id) {
    validate_config(cfg);
    if (train.empty() || val.empty())
        throw std::invalid_argument("train_fold needs non-empty train and val splits");

    const NormalizationStats norm = fit_normalization(train);
    const std::vector<ScenarioGraph> train_graphs = build_labeled_graphs(train, norm);
    const std::vector<ScenarioGraph> val_graphs = build_labeled_graphs(val, norm);
    const std::vector<const ScenarioGraph*> train_all = all_ptrs(train_graphs);
    const std::vector<const ScenarioGraph*> val_all = all_ptrs(val_graphs);

    gnn::TrainConfig fold_cfg = cfg;
    fold_cfg.dims.d_in = kNodeFeatureCount;
    fold_cfg.dims.d_edge = kEdgeFeatureCount;

    Rng init_rng = Rng::substream(cfg.seed, "init", static_cast<std::uint64_t>(fold_id));
    gnn::ModelParams params = gnn::ModelParams::init(fold_cfg.dims, init_rng);
    gnn::AdamWState opt_state;

    std::vector<double> targets;
    targets.reserve(train_graphs.size());
    for (const auto& g : train_graphs) targets.push_back(static_cast<double>(*g.label_total));
    WeightedSampler sampler(targets, cfg.bucket_percentiles,
                            Rng::substream(cfg.seed, "sampler", static_cast<std::uint64_t>(fold_id)));

    ModelCheckpoint best;
    best.stats = norm;
    best.config = fold_cfg;
    best.fold_id = fold_id;

    MetricPoint init_point;
    init_point.epoch = 0;
    init_point.train_loss = gnn::total_loss(params, train_all, fold_cfg);
    init_point.val_loss = gnn::total_loss(params, val_all, fold_cfg);
    init_point.val_mae = graph_median_mae(params, val_graphs);
    best.trace.push_back(init_point);
    best.params = params;
    double best_val = init_point.val_loss;

    const int batches_per_epoch =
        static_cast<int>((train_graphs.size() + cfg.batch_size - 1) / cfg.batch_size);
    std::vector<double> grads;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        double epoch_loss = 0.0;
        for (int b = 0; b < batches_per_epoch; ++b) {
            std::vector<const ScenarioGraph*> batch;
            batch.reserve(cfg.batch_size);
            for (int k = 0; k < cfg.batch_size; ++k)
                batch.push_back(&train_graphs[sampler.next()]);
            const double loss = gnn::loss_and_gradients(params, batch, fold_cfg, grads);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "training diverged: non-finite loss in fold " << fold_id << " epoch "
                    << epoch << " (last val loss " << best.trace.back().val_loss << ")";
                throw numeric_error(msg.str());
            }
            gnn::adamw_step(params, grads, opt_state, fold_cfg);
            epoch_loss += loss;
        }
        MetricPoint point;
        point.epoch = epoch;
        point.train_loss = epoch_loss / batches_per_epoch;
        point.val_loss = gnn::total_loss(params, val_all, fold_cfg);
        point.val_mae = graph_median_mae(params, val_graphs);
        best.trace.push_back(point);
        if (point.val_loss < best_val) {
            best_val = point.val_loss;
            best.params = params;
        }
    }
    return best;
}

CrossValResult cross_validate(const std::vector<Scenario>& dataset, int k,
                              const gnn::TrainConfig& cfg, int threads) {
    validate_config(cfg);
    if (k < 2) throw std::invalid_argument("cross_validate needs k >= 2");
    if (static_cast<int>(dataset.size()) < k)
        throw std::invalid_argument("cross_validate needs at least k scenarios");

    const std::size_t n = dataset.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng split_rng = Rng::substream(cfg.seed, "fold-split");
    split_rng.shuffle(order);

    // Contiguous chunks of the shuffled order form the k test splits.
    std::vector<std::size_t> chunk_start(k + 1, 0);
    const std::size_t base = n / k, rem = n % k;
    for (int f = 0; f < k; ++f)
        chunk_start[f + 1] = chunk_start[f] + base + (static_cast<std::size_t>(f) < rem ? 1 : 0);

    std::vector<ModelCheckpoint> members(k);
    std::vector<FoldReport> reports(k);
    std::vector<std::exception_ptr> failures(k);

    auto run_fold = [&](int f) {
        try {
            std::vector<Scenario> test, rest;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t pos = order[i];
                if (i >= chunk_start[f] && i < chunk_start[f + 1])
                    test.push_back(dataset[pos]);
                else
                    rest.push_back(dataset[pos]);
            }
            std::size_t n_train = static_cast<std::size_t>(0.8 * static_cast<double>(rest.size()));
            n_train = std::min(std::max<std::size_t>(n_train, 1), rest.size() - 1);
            std::vector<Scenario> train(rest.begin(), rest.begin() + n_train);
            std::vector<Scenario> val(rest.begin() + n_train, rest.end());

            ModelCheckpoint ckpt = train_fold(train, val, cfg, f);

            std::vector<double> errors;
            errors.reserve(test.size());
            for (const auto& s : test) {
                const ScenarioGraph g = build_graph(s, ckpt.stats);
                if (!g.label_total) throw data_error("test scenario has no labels");
                const auto q = gnn::postprocess_quantiles(
                    gnn::model_forward(ckpt.params, g).graph_q);
                errors.push_back(std::abs(q[1] - static_cast<double>(*g.label_total)));
            }
            FoldReport rep;
            rep.fold_id = f;
            rep.test_mae = stats::mean(errors);
            rep.test_ci95 = errors.size() >= 2
                                ? 1.96 * stats::sample_stdev(errors) /
                                      std::sqrt(static_cast<double>(errors.size()))
                                : 0.0;
            double best_val = ckpt.trace.front().val_loss;
            int best_epoch = 0;
            for (const auto& pt : ckpt.trace)
                if (pt.val_loss < best_val) {
                    best_val = pt.val_loss;
                    best_epoch = pt.epoch;
                }
            rep.best_val_loss = best_val;
            rep.best_epoch = best_epoch;
            members[f] = std::move(ckpt);
            reports[f] = rep;
        } catch (...) {
            failures[f] = std::current_exception();
        }
    };

    if (threads <= 1) {
        for (int f = 0; f < k; ++f) run_fold(f);
    } else {
        std::atomic<int> next_fold{0};
        auto worker = [&]() {
            for (;;) {
                const int f = next_fold.fetch_add(1);
                if (f >= k) return;
                run_fold(f);
            }
        };
        std::vector<std::thread> pool;
        const int n_workers = std::min(threads, k);
        pool.reserve(n_workers);
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (int f = 0; f < k; ++f)
        if (failures[f]) std::rethrow_exception(failures[f]);

    CrossValResult result;
    result.ensemble.members = std::move(members);
    result.folds = std::move(reports);
    return result;
}

EnsemblePrediction ensemble_predict(const Ensemble& e, const ScenarioGraph& g) {
    if (e.members.empty()) throw std::invalid_argument("ensemble has no members");
    const gnn::Dims& d0 = e.members.front().params.dims;
    for (const auto& m : e.members) {
        const gnn::Dims& d = m.params.dims;
        if (d.d_in != d0.d_in || d.d_edge != d0.d_edge || d.hidden != d0.hidden ||
            d.head_hidden != d0.head_hidden || d.n_quantiles != d0.n_quantiles)
            throw data_error("ensemble members have mismatched dimensions");
    }
    EnsemblePrediction pred;
    pred.node_medians.assign(g.node_count(), 0.0);
    for (const auto& m : e.members) {
        const gnn::ModelOutput out = gnn::model_forward(m.params, g);
        for (int i = 0; i < g.node_count(); ++i)
            pred.node_medians[i] += gnn::postprocess_quantiles(out.node_q[i])[1];
        const auto q = gnn::postprocess_quantiles(out.graph_q);
        pred.graph_p10 += q[0];
        pred.graph_median += q[1];
        pred.graph_p90 += q[2];
    }
    const double scale = 1.0 / static_cast<double>(e.members.size());
    for (double& v : pred.node_medians) v *= scale;
    pred.graph_p10 *= scale;
    pred.graph_median *= scale;
    pred.graph_p90 *= scale;
    return pred;
}

}  // namespace atcd
