#include "atcd/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "atcd/errors.hpp"
#include "atcd/features.hpp"
#include "atcd/rng.hpp"
#include "atcd/stats.hpp"

namespace atcd::analysis {

namespace {

std::vector<double> abs_errors(const std::vector<double>& preds,
                               const std::vector<double>& targets) {
    std::vector<double> e(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) e[i] = std::abs(preds[i] - targets[i]);
    return e;
}

double mae_of(const Ensemble& e, const std::vector<ScenarioGraph>& graphs) {
    double total = 0.0;
    for (const auto& g : graphs) {
        const auto pred = ensemble_predict(e, g);
        total += std::abs(pred.graph_median - static_cast<double>(*g.label_total));
    }
    return total / static_cast<double>(graphs.size());
}

void require_labeled(const std::vector<Scenario>& scenarios) {
    if (scenarios.empty()) throw data_error("no scenarios to evaluate");
    for (const auto& s : scenarios)
        if (!s.has_labels())
            throw data_error("scenario at t=" + std::to_string(s.timestamp) + " has no labels");
}

DeltaMae summarize_repeats(double base, const std::vector<double>& repeat_maes) {
    DeltaMae d;
    d.base_mae = base;
    d.delta_mae = stats::mean(repeat_maes) - base;
    d.ci95 = repeat_maes.size() < 2
                 ? 0.0
                 : 1.96 * stats::sample_stdev(repeat_maes) /
                       std::sqrt(static_cast<double>(repeat_maes.size()));
    return d;
}

}  // namespace

std::pair<double, double> mae_with_ci(const std::vector<double>& preds,
                                      const std::vector<double>& targets) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("prediction/target length mismatch");
    if (preds.size() < 2) throw std::invalid_argument("need at least 2 samples for a CI");
    const auto errors = abs_errors(preds, targets);
    const double mae = stats::mean(errors);
    const double ci = 1.96 * stats::sample_stdev(errors) /
                      std::sqrt(static_cast<double>(errors.size()));
    return {mae, ci};
}

std::vector<BucketStat> bucketed_errors(const std::vector<double>& preds,
                                        const std::vector<double>& targets) {
    if (preds.size() != targets.size())
        throw std::invalid_argument("prediction/target length mismatch");
    if (preds.empty()) throw std::invalid_argument("no samples to bucket");
    const double e10 = stats::percentile(targets, 10.0);
    const double e50 = stats::percentile(targets, 50.0);
    const double e90 = stats::percentile(targets, 90.0);
    const double lo = *std::min_element(targets.begin(), targets.end());
    const double hi = *std::max_element(targets.begin(), targets.end());
    const std::array<std::pair<double, double>, 4> bounds = {
        std::pair{lo, e10}, {e10, e50}, {e50, e90}, {e90, hi}};

    std::array<std::vector<std::size_t>, 4> members;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double t = targets[i];
        std::size_t b = t <= e10 ? 0 : t <= e50 ? 1 : t <= e90 ? 2 : 3;
        members[b].push_back(i);
    }
    std::vector<BucketStat> out(4);
    for (std::size_t b = 0; b < 4; ++b) {
        out[b].lo = bounds[b].first;
        out[b].hi = bounds[b].second;
        out[b].count = members[b].size();
        if (members[b].empty()) continue;
        std::vector<double> abs_e, signed_e;
        for (std::size_t i : members[b]) {
            abs_e.push_back(std::abs(preds[i] - targets[i]));
            signed_e.push_back(preds[i] - targets[i]);
        }
        out[b].mae = stats::mean(abs_e);
        out[b].median_signed_error = stats::median(signed_e);
    }
    return out;
}

std::vector<ScenarioGraph> build_eval_graphs(const Ensemble& e,
                                             const std::vector<Scenario>& scenarios) {
    if (e.members.empty()) throw data_error("empty ensemble");
    require_labeled(scenarios);
    std::vector<ScenarioGraph> graphs;
    graphs.reserve(scenarios.size());
    for (const auto& s : scenarios) graphs.push_back(build_graph(s, e.members.front().stats));
    return graphs;
}

EvalVectors ensemble_eval_vectors(const Ensemble& e,
                                  const std::vector<ScenarioGraph>& graphs) {
    EvalVectors v;
    v.preds.reserve(graphs.size());
    v.targets.reserve(graphs.size());
    for (const auto& g : graphs) {
        if (!g.label_total) throw data_error("graph without labels in evaluation set");
        v.preds.push_back(ensemble_predict(e, g).graph_median);
        v.targets.push_back(static_cast<double>(*g.label_total));
    }
    return v;
}

std::vector<std::string> importance_feature_names() {
    std::vector<std::string> names = node_feature_names();
    names.push_back("edge_separation");
    names.push_back("edge_closing");
    return names;
}

DeltaMae permutation_importance(const Ensemble& e, const std::vector<Scenario>& test,
                                const std::string& feature, const PermutationOptions& options) {
    if (options.repeats < 1) throw std::invalid_argument("repeats must be >= 1");
    const auto& node_names = node_feature_names();
    const auto node_it = std::find(node_names.begin(), node_names.end(), feature);
    const bool is_edge = feature == "edge_separation" || feature == "edge_closing";
    if (node_it == node_names.end() && !is_edge)
        throw std::invalid_argument("unknown feature: " + feature);

    const auto base_graphs = build_eval_graphs(e, test);
    const double base = mae_of(e, base_graphs);
    const auto& stats_ref = e.members.front().stats;

    std::vector<double> repeat_maes;
    repeat_maes.reserve(static_cast<std::size_t>(options.repeats));
    for (int r = 0; r < options.repeats; ++r) {
        Rng rng = Rng::substream(options.seed, "permutation", static_cast<std::uint64_t>(r));
        if (is_edge) {
            const std::size_t col = feature == "edge_separation" ? 0 : 1;
            auto graphs = base_graphs;
            std::vector<double> column;
            for (const auto& g : graphs)
                for (const auto& ef : g.edge_features) column.push_back(ef[col]);
            if (!options.identity) rng.shuffle(column);
            std::size_t at = 0;
            for (auto& g : graphs)
                for (auto& ef : g.edge_features) ef[col] = column[at++];
            repeat_maes.push_back(mae_of(e, graphs));
        } else {
            const int slot = static_cast<int>(node_it - node_names.begin());
            auto scenarios = test;
            std::vector<double> column;
            for (const auto& s : scenarios)
                for (const auto& a : s.aircraft) column.push_back(raw_node_feature(a, slot));
            if (!options.identity) rng.shuffle(column);
            std::size_t at = 0;
            for (auto& s : scenarios)
                for (auto& a : s.aircraft) set_raw_node_feature(a, slot, column[at++]);
            std::vector<ScenarioGraph> graphs;
            graphs.reserve(scenarios.size());
            for (const auto& s : scenarios) graphs.push_back(build_graph(s, stats_ref));
            repeat_maes.push_back(mae_of(e, graphs));
        }
    }
    return summarize_repeats(base, repeat_maes);
}

DeltaMae structure_ablation_eval(const Ensemble& e, const std::vector<Scenario>& test,
                                 AblationMode mode, const AblationOptions& options) {
    if (options.samples < 1) throw std::invalid_argument("samples must be >= 1");
    const auto base_graphs = build_eval_graphs(e, test);
    const double base = mae_of(e, base_graphs);

    std::vector<double> sample_maes;
    if (mode == AblationMode::edgeless) {
        std::vector<ScenarioGraph> graphs;
        graphs.reserve(base_graphs.size());
        for (const auto& g : base_graphs) graphs.push_back(strip_edges(g));
        sample_maes.push_back(mae_of(e, graphs));
    } else {
        for (int k = 0; k < options.samples; ++k) {
            Rng sub = Rng::substream(options.seed, "structure", static_cast<std::uint64_t>(k));
            std::vector<ScenarioGraph> graphs;
            graphs.reserve(base_graphs.size());
            for (const auto& g : base_graphs)
                graphs.push_back(randomize_edges(g, sub.next_u64()));
            sample_maes.push_back(mae_of(e, graphs));
        }
    }
    return summarize_repeats(base, sample_maes);
}

double wilcoxon_signed_rank(const std::vector<double>& errors_a,
                            const std::vector<double>& errors_b) {
    if (errors_a.size() != errors_b.size())
        throw std::invalid_argument("paired samples must have equal length");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < errors_a.size(); ++i) {
        const double d = errors_a[i] - errors_b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw data_error("all paired differences are zero");
    const std::size_t n = diffs.size();
    if (n < 10) throw data_error("need at least 10 non-zero differences");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return std::abs(diffs[i]) < std::abs(diffs[j]);
    });
    std::vector<double> rank(n);
    double tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) rank[order[k]] = avg_rank;
        const double t = static_cast<double>(j - i);
        tie_term += t * t * t - t;
        i = j;
    }
    double w_plus = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (diffs[k] > 0.0) w_plus += rank[k];

    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) throw data_error("degenerate rank variance (all differences tied)");
    double num = w_plus - mean;
    // Continuity correction toward the mean.
    if (num > 0.5) num -= 0.5;
    else if (num < -0.5) num += 0.5;
    else num = 0.0;
    const double z = num / std::sqrt(var);
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("length mismatch");
    if (x.size() < 2) throw std::invalid_argument("need at least 2 points");
    const double mx = stats::mean(x);
    const double my = stats::mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw numeric_error("correlation undefined for constant input");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace atcd::analysis
