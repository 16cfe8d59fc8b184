#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pfl/apple.hpp"
#include "pfl/numerics.hpp"
#include "pfl/partition.hpp"

namespace pfl {

enum class Algorithm { Apple, FedAvg, FedAvgLocal, FedAvgFt, FedProxFt, Separate };

std::string algorithm_name(Algorithm a);

enum class DataSource { Synthetic, Idx, Csv };

struct DataConfig {
    DataSource source = DataSource::Synthetic;
    // synthetic
    int num_classes = 10;
    int feature_dim = 16;
    int train_per_class = 200;
    int test_per_class = 100;
    double center_scale = 1.0;
    double noise_sigma = 1.0;
    std::optional<std::uint64_t> seed;  // defaults to a stream of the run seed
    // idx
    std::string train_images, train_labels, test_images, test_labels;
    // csv
    std::string train_csv, test_csv, label_column;
};

struct SchedulerConfig {
    SchedulerKind kind = SchedulerKind::ConstantZero;
    double mu = 0.0;
    double cutoff_fraction = 0.2;  // L as a fraction of total rounds
    double epsilon = 1e-3;
};

// Complete experiment description; a run is a pure function of this.
struct RunConfig {
    ModelSpec model;
    DataConfig data;
    PartitionSpec partition;
    bool partition_seed_explicit = false;
    Algorithm algorithm = Algorithm::Apple;
    int rounds = 160;
    int local_epochs = 5;
    int batch_size = 256;
    double lr_net = 0.01;
    double lr_dr = 0.001;
    double momentum = 0.9;
    SchedulerConfig scheduler;
    int budget_m = 0;  // 0 = unlimited
    double mu_prox = 0.0;
    int finetune_epochs = 5;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    SchedulerSpec scheduler_spec() const;  // resolves L from the fraction
    bool budget_unlimited() const { return budget_m == 0; }
};

// Strict parse: unknown keys rejected, typed errors carry JSON-pointer
// paths. Defaults applied for absent optional fields.
RunConfig parse_config_json(const std::string& json_text);
RunConfig parse_config_file(const std::string& path);

// Canonical (sorted-key) JSON with all defaults applied; used verbatim as
// the provenance header of every output file.
std::string config_to_json(const RunConfig& config);

// Loads train/test sets per config.data (synthetic source generates one
// pool per class and splits it train/test so both draw from identical
// class distributions).
struct DataPair {
    Dataset train;
    Dataset test;
};
DataPair load_data(const RunConfig& config);

// Partition seed defaults to the run seed unless explicitly configured.
PartitionSpec resolved_partition(const RunConfig& config);

}  // namespace pfl
