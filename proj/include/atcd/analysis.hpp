#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "atcd/graph.hpp"
#include "atcd/train.hpp"
#include "atcd/types.hpp"

// Evaluation statistics: MAE with confidence intervals, bucketed error
// profiles, permutation feature importance, structure ablations, Wilcoxon
// signed-rank and Pearson correlation.

namespace atcd::analysis {

// Mean absolute error and 1.96 * SEM of the absolute errors.
std::pair<double, double> mae_with_ci(const std::vector<double>& preds,
                                      const std::vector<double>& targets);

struct BucketStat {
    double lo = 0.0;  // bucket boundary, inclusive on the high side
    double hi = 0.0;
    std::size_t count = 0;
    double mae = 0.0;
    double median_signed_error = 0.0;  // median(pred - target)
};

// Errors split by target value into 4 buckets at the p10/p50/p90 target
// percentiles. Bucket counts sum to the sample count.
std::vector<BucketStat> bucketed_errors(const std::vector<double>& preds,
                                        const std::vector<double>& targets);

// Graphs for every scenario, encoded with the ensemble's reference
// statistics (member 0). Scenarios must carry labels.
std::vector<ScenarioGraph> build_eval_graphs(const Ensemble& e,
                                             const std::vector<Scenario>& scenarios);

// Graph-level predictions (ensemble median) next to the label totals.
struct EvalVectors {
    std::vector<double> preds;
    std::vector<double> targets;
};
EvalVectors ensemble_eval_vectors(const Ensemble& e,
                                  const std::vector<ScenarioGraph>& graphs);

struct DeltaMae {
    double base_mae = 0.0;
    double delta_mae = 0.0;  // mean permuted MAE minus base MAE
    double ci95 = 0.0;       // over repeats/samples
};

struct PermutationOptions {
    int repeats = 20;
    std::uint64_t seed = 0;
    bool identity = false;  // test hook: apply the identity permutation
};

// Shuffles one feature's values globally across the whole test set (a single
// permutation per repeat), rebuilds the graphs and reports the MAE change.
// `feature` is a node feature name or "edge_separation"/"edge_closing".
DeltaMae permutation_importance(const Ensemble& e, const std::vector<Scenario>& test,
                                const std::string& feature, const PermutationOptions& options = {});

// Feature names accepted by permutation_importance, node features first.
std::vector<std::string> importance_feature_names();

enum class AblationMode { random_edges, edgeless };

struct AblationOptions {
    int samples = 20;
    std::uint64_t seed = 0;
};

// MAE change when the learned edge structure is replaced by random edges
// (per-sample) or removed entirely (deterministic, one sample).
DeltaMae structure_ablation_eval(const Ensemble& e, const std::vector<Scenario>& test,
                                 AblationMode mode, const AblationOptions& options = {});

// Two-sided p for paired samples via the normal approximation with tie
// correction. Zero differences are dropped; fewer than 10 remaining pairs is
// a data_error.
double wilcoxon_signed_rank(const std::vector<double>& errors_a,
                            const std::vector<double>& errors_b);

// Sample correlation coefficient. Constant input is a numeric_error.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace atcd::analysis
