#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pfl/dataset.hpp"

namespace pfl {

enum class PartitionScheme { Pathological, Practical, Iid };

std::vector<double> default_shard_fractions();  // [0.8, 0.1] + ten x [0.01]

struct PartitionSpec {
    PartitionScheme scheme = PartitionScheme::Pathological;
    int num_clients = 12;
    std::uint64_t seed = 0;
    int classes_per_client = 2;                              // pathological
    std::vector<double> shard_fractions = default_shard_fractions();  // practical
};

struct ClientShard {
    Dataset train;
    Dataset test;
    std::vector<int> train_indices;  // rows into the source train set
    std::vector<int> test_indices;   // rows into the source test set
    std::string provenance;
};

struct FederatedSplit {
    std::vector<ClientShard> clients;
};

FederatedSplit partition_pathological(const Dataset& train, const Dataset& test,
                                      const PartitionSpec& spec);
FederatedSplit partition_practical(const Dataset& train, const Dataset& test,
                                   const PartitionSpec& spec);
FederatedSplit partition_iid(const Dataset& train, const Dataset& test,
                             const PartitionSpec& spec);

FederatedSplit make_partition(const Dataset& train, const Dataset& test,
                              const PartitionSpec& spec);

// Exact shard sizes for one class: largest-remainder rounding of
// fractions * total, so the sizes sum to total.
std::vector<int> largest_remainder_sizes(int total, const std::vector<double>& fractions);

// JSON manifest (train/test indices and provenance per client) so a split
// can be frozen and reused; config_json, when nonempty, is embedded for
// provenance.
std::string split_manifest(const FederatedSplit& split, const PartitionSpec& spec,
                           const std::string& config_json = "");

}  // namespace pfl
