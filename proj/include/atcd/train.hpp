#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "atcd/features.hpp"
#include "atcd/gnn.hpp"
#include "atcd/graph.hpp"
#include "atcd/rng.hpp"
#include "atcd/types.hpp"

// Fold training, cross-validation ensembling and checkpoint persistence.

namespace atcd {

inline constexpr const char* kCheckpointVersion = "atcd-ckpt-v1";
inline constexpr const char* kEnsembleVersion = "atcd-ensemble-v1";

struct MetricPoint {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_mae = 0.0;  // graph-head median MAE on the validation split
};

struct ModelCheckpoint {
    std::string version = kCheckpointVersion;
    gnn::ModelParams params;
    NormalizationStats stats;
    gnn::TrainConfig config;
    int fold_id = -1;
    std::vector<MetricPoint> trace;
};

struct Ensemble {
    std::vector<ModelCheckpoint> members;
};

// Draws training indices by first picking one of four target-value buckets
// (edges at the 10th/50th/90th percentile of the training targets) uniformly
// and then an element within the bucket uniformly, with replacement. With a
// single non-empty bucket this degenerates to plain uniform sampling and a
// warning is logged once.
class WeightedSampler {
  public:
    WeightedSampler(const std::vector<double>& targets,
                    const std::array<double, 3>& percentiles, Rng rng);

    std::size_t next();
    const std::array<double, 3>& edges() const { return edges_; }
    std::size_t bucket_count() const { return buckets_.size(); }
    bool single_bucket() const { return buckets_.size() == 1; }

  private:
    std::vector<std::vector<std::size_t>> buckets_;
    std::array<double, 3> edges_{};
    Rng rng_;
};

// Trains one fold: fits normalization on the train split, runs at most
// cfg.epochs epochs of weighted mini-batch AdamW and keeps the parameters
// from the epoch with the lowest validation loss (initialization included).
ModelCheckpoint train_fold(const std::vector<Scenario>& train, const std::vector<Scenario>& val,
                           const gnn::TrainConfig& cfg, int fold_id = 0);

struct FoldReport {
    int fold_id = 0;
    double test_mae = 0.0;
    double test_ci95 = 0.0;
    double best_val_loss = 0.0;
    int best_epoch = 0;
};

struct CrossValResult {
    Ensemble ensemble;
    std::vector<FoldReport> folds;
};

// k-fold cross-validation: deterministic shuffled partition into k test
// chunks, remaining data split 80/20 into train/val per fold. Folds train in
// parallel when threads > 1; results are identical either way.
CrossValResult cross_validate(const std::vector<Scenario>& dataset, int k,
                              const gnn::TrainConfig& cfg, int threads = 1);

struct EnsemblePrediction {
    std::vector<double> node_medians;
    double graph_median = 0.0;
    double graph_p10 = 0.0;
    double graph_p90 = 0.0;
};

// Mean over members of the per-member sorted-and-clamped quantile outputs.
EnsemblePrediction ensemble_predict(const Ensemble& e, const ScenarioGraph& g);

void save_checkpoint(const std::filesystem::path& path, const ModelCheckpoint& ckpt);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

// Directory layout: fold_<id>/model.ckpt plus ensemble.manifest.
void save_ensemble(const std::filesystem::path& dir, const Ensemble& e);
Ensemble load_ensemble(const std::filesystem::path& dir);

}  // namespace atcd
