#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kale/config.hpp"
#include "kale/evaluate.hpp"
#include "kale/interpret.hpp"
#include "kale/loaddata.hpp"
#include "kale/metrics_log.hpp"
#include "kale/nn.hpp"
#include "kale/rng.hpp"

namespace kale {

struct TrainReport {
    std::string run_id;
    std::size_t epochs = 0;
    /// Per-epoch records (epochs 1..E) followed by the final evaluation,
    /// which is tagged with epoch E.
    std::vector<MetricRecord> records;
    std::vector<MetricValue> final_metrics;
    /// Test-split outputs: decision scores (mpca), predicted classes on the
    /// target domain (dann) or predicted affinities (deepdta).
    std::vector<double> test_outputs;
    /// Ground truth aligned with test_outputs.
    std::vector<double> test_targets;
    std::optional<WeightMap> weight_map;
    double wall_seconds = 0.0;
    std::string config_text;

    /// Final metric by name; throws SchemaError when absent.
    double final_metric(std::string_view name) const;
};

/// Where a run writes its metrics CSV and models. Without a directory the
/// pipeline only returns the report.
struct RunOutput {
    std::string run_id = "run";
    std::optional<std::filesystem::path> dir;
};

/// "run-<seed>-<first 8 hex of sha256(dump_config(cfg))>".
std::string make_run_id(const Config& cfg);

// ---------------------------------------------------------------------------
// Defaults
// ---------------------------------------------------------------------------

/// Built-in configuration tree of a subcommand ("mpca", "dann", "deepdta").
/// Every tree has DATASET, SOLVER (SEED, BASE_LR, MAX_EPOCHS, ...), MODEL and
/// OUTPUT_DIR.
Config default_config(std::string_view subcommand);

TensorPatternParams tensor_pattern_params(const Config& cfg);
BlobParams blob_params(const Config& cfg);
DtaParams dta_params(const Config& cfg);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainerHooks {
    /// Prepares the epoch's batches from the epoch's rng and returns how many
    /// there are.
    std::function<std::size_t(std::size_t epoch, RngStream& rng)> begin_epoch;
    /// Runs forward/backward for one batch and returns its loss; gradients
    /// are left accumulated for the optimizer step that follows.
    std::function<double(std::size_t epoch, std::size_t batch)> train_batch;
    /// Evaluation after the epoch's updates.
    std::function<std::vector<MetricRecord>(std::size_t epoch)> evaluate;
};

/// For each epoch e = 1..epochs: begin_epoch with rng.child(e), then
/// train_batch and one optimizer step per batch, then a "loss" train record
/// (mean batch loss) and the evaluate records. Throws NonFiniteError naming
/// the epoch and batch when a batch loss is not finite.
std::vector<MetricRecord> trainer_loop(std::span<nn::Net* const> nets, nn::Optimizer& optimizer,
                                       std::size_t epochs, RngStream rng, const TrainerHooks& hooks,
                                       const std::string& run_id);

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/// split -> optional standardization -> MPCA -> top-k features by training
/// variance -> linear classifier -> test accuracy and AUC -> weight map.
TrainReport run_mpca_pipeline(const Dataset& dataset, const Config& cfg, const RunOutput& out = {});

enum class Adaptation { dann, dan_mmd, none };
Adaptation adaptation_from_string(const std::string& name);
std::string to_string(Adaptation a);

struct DannConfig {
    Adaptation adaptation = Adaptation::dann;
    double lambda_max = 1.0;
    double gamma = 10.0;
    /// Weight of the domain loss (dann) or the MMD term (dan_mmd).
    double trade_off = 1.0;
    std::vector<double> mmd_bandwidths{0.5, 1.0, 2.0, 4.0};

    static DannConfig from_config(const Config& cfg);
};

/// lambda_max * (2 / (1 + exp(-gamma * p)) - 1).
double lambda_schedule(double progress, double lambda_max, double gamma);

/// Feature extractor + class head trained on labeled source batches, with the
/// chosen adaptation term on paired target batches. Target labels are read
/// only for the per-epoch "target" accuracy, which is oracle reporting.
TrainReport run_dann_pipeline(const MultiDomainDataset& md, const Config& cfg, const RunOutput& out = {});

/// Parameters of the extractor and class head after a DANN run, for
/// trajectory comparisons.
struct DannNets {
    nn::Net extractor;
    nn::Net class_head;
    nn::Net domain_head;
};
TrainReport run_dann_pipeline(const MultiDomainDataset& md, const Config& cfg, const RunOutput& out,
                              std::optional<DannNets>* nets_out);

/// Independent drug and target sequence CNNs -> concatenated features ->
/// MLP decoder, trained with MSE. Reports test MSE and concordance index.
TrainReport run_deepdta_pipeline(const SequencePairDataset& data, const Config& cfg, const RunOutput& out = {});

/// Generates the subcommand's synthetic dataset from cfg and runs its pipeline.
TrainReport run_pipeline(std::string_view subcommand, const Config& cfg, const RunOutput& out = {});

}  // namespace kale
