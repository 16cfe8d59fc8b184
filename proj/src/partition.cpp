#include "pfl/partition.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "pfl/errors.hpp"
#include "pfl/rng.hpp"

namespace pfl {

namespace {

void validate_pair(const Dataset& train, const Dataset& test) {
    if (train.feature_dim != test.feature_dim) {
        throw DataError("train/test feature_dim mismatch");
    }
    if (train.num_classes != test.num_classes) {
        throw DataError("train/test num_classes mismatch");
    }
    if (train.size() < 1) throw DataError("empty train set");
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

void materialize(const Dataset& train, const Dataset& test, FederatedSplit& split) {
    for (auto& c : split.clients) {
        c.train = subset(train, c.train_indices);
        c.test = subset(test, c.test_indices);
    }
}

}  // namespace

std::vector<double> default_shard_fractions() {
    std::vector<double> f = {0.8, 0.1};
    f.insert(f.end(), 10, 0.01);
    return f;
}

std::vector<int> largest_remainder_sizes(int total, const std::vector<double>& fractions) {
    const std::size_t k = fractions.size();
    std::vector<int> sizes(k, 0);
    std::vector<std::pair<double, std::size_t>> remainders(k);
    int assigned = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const double target = fractions[i] * total;
        sizes[i] = static_cast<int>(target);
        remainders[i] = {target - sizes[i], i};
        assigned += sizes[i];
    }
    // Break remainder ties by lower shard index for determinism.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int j = 0; j < total - assigned; ++j) {
        sizes[remainders[static_cast<std::size_t>(j) % k].second] += 1;
    }
    return sizes;
}

FederatedSplit partition_pathological(const Dataset& train, const Dataset& test,
                                      const PartitionSpec& spec) {
    validate_pair(train, test);
    const int N = spec.num_clients;
    const int K = spec.classes_per_client;
    const int C = train.num_classes;
    if (K > C) throw ConfigError("classes_per_client exceeds number of classes");
    if (N < 1) throw ConfigError("num_clients must be positive");

    auto train_pools = rows_by_class(train);
    auto test_pools = rows_by_class(test);
    Rng rng(derive_seed(spec.seed, Stream::Partition));

    constexpr int kMaxRetries = 1000;
    for (int attempt = 0; attempt < kMaxRetries; ++attempt) {
        // Draw K distinct classes per client.
        std::vector<std::vector<int>> assigned(N);
        std::vector<std::vector<int>> takers(C);
        for (int i = 0; i < N; ++i) {
            std::vector<int> classes(C);
            std::iota(classes.begin(), classes.end(), 0);
            for (int k = 0; k < K; ++k) {
                const int j = k + static_cast<int>(rng.below(static_cast<std::uint64_t>(C - k)));
                std::swap(classes[k], classes[j]);
            }
            assigned[i].assign(classes.begin(), classes.begin() + K);
            std::sort(assigned[i].begin(), assigned[i].end());
            for (int c : assigned[i]) takers[c].push_back(i);
        }

        // Every nonempty class needs a taker, or its samples would be dropped.
        bool covered = true;
        for (int c = 0; c < C; ++c) {
            if (!train_pools[c].empty() && takers[c].empty()) {
                covered = false;
                break;
            }
        }
        if (!covered) continue;

        FederatedSplit split;
        split.clients.resize(N);

        // Shuffled pools; takers receive contiguous slices.
        auto tr = train_pools;
        auto te = test_pools;
        for (int c = 0; c < C; ++c) {
            rng.shuffle(tr[c]);
            rng.shuffle(te[c]);
        }

        bool exhausted = false;
        for (int c = 0; c < C && !exhausted; ++c) {
            std::size_t tr_pos = 0, te_pos = 0;
            for (std::size_t t = 0; t < takers[c].size(); ++t) {
                const int client = takers[c][t];
                const bool last = (t + 1 == takers[c].size());
                const std::size_t tr_left = tr[c].size() - tr_pos;
                const std::size_t te_left = te[c].size() - te_pos;
                if (tr_left == 0) {
                    exhausted = true;
                    break;
                }
                std::size_t tr_take, te_take;
                if (last) {
                    tr_take = tr_left;
                    te_take = te_left;
                } else {
                    const double frac = rng.uniform_range(0.3, 1.0);
                    tr_take = std::clamp<std::size_t>(
                        static_cast<std::size_t>(std::llround(frac * static_cast<double>(tr_left))),
                        1, tr_left);
                    te_take = std::min<std::size_t>(
                        static_cast<std::size_t>(std::llround(frac * static_cast<double>(te_left))),
                        te_left);
                }
                auto& shard = split.clients[client];
                shard.train_indices.insert(shard.train_indices.end(), tr[c].begin() + tr_pos,
                                           tr[c].begin() + tr_pos + tr_take);
                shard.test_indices.insert(shard.test_indices.end(), te[c].begin() + te_pos,
                                          te[c].begin() + te_pos + te_take);
                tr_pos += tr_take;
                te_pos += te_take;
            }
        }
        if (exhausted) continue;

        for (int i = 0; i < N; ++i) {
            std::sort(split.clients[i].train_indices.begin(), split.clients[i].train_indices.end());
            std::sort(split.clients[i].test_indices.begin(), split.clients[i].test_indices.end());
            split.clients[i].provenance = "pathological classes " + join_ints(assigned[i]);
        }
        materialize(train, test, split);
        return split;
    }
    throw DataError("pathological partition: class pools exhausted after " +
                    std::to_string(kMaxRetries) + " assignment attempts");
}

FederatedSplit partition_practical(const Dataset& train, const Dataset& test,
                                   const PartitionSpec& spec) {
    validate_pair(train, test);
    const int N = spec.num_clients;
    const int C = train.num_classes;
    if (static_cast<int>(spec.shard_fractions.size()) != N) {
        throw ConfigError("practical partition needs one shard fraction per client (" +
                          std::to_string(spec.shard_fractions.size()) + " fractions, " +
                          std::to_string(N) + " clients)");
    }
    double frac_sum = 0.0;
    for (double f : spec.shard_fractions) {
        if (f <= 0.0) throw ConfigError("shard fractions must be positive");
        frac_sum += f;
    }
    if (std::abs(frac_sum - 1.0) > 1e-9) {
        throw ConfigError("shard fractions must sum to 1");
    }

    auto train_pools = rows_by_class(train);
    auto test_pools = rows_by_class(test);
    Rng rng(derive_seed(spec.seed, Stream::Partition));

    FederatedSplit split;
    split.clients.resize(N);
    std::vector<std::vector<int>> shard_of(N);  // per client, shard index per class

    for (int c = 0; c < C; ++c) {
        rng.shuffle(train_pools[c]);
        rng.shuffle(test_pools[c]);
        const int n_c = static_cast<int>(train_pools[c].size());
        const auto tr_sizes = largest_remainder_sizes(n_c, spec.shard_fractions);
        const auto te_sizes =
            largest_remainder_sizes(static_cast<int>(test_pools[c].size()), spec.shard_fractions);
        for (int k = 0; k < N; ++k) {
            if (tr_sizes[k] == 0) {
                if (n_c >= 100) {
                    throw DataError("class " + std::to_string(c) + " (" + std::to_string(n_c) +
                                    " samples) produced an empty shard despite >= 100 samples");
                }
                std::cerr << "warning: class " << c << " has only " << n_c
                          << " samples; shard " << k << " is empty\n";
            }
        }

        // One shard per client: client i takes shard perm[i] of this class.
        std::vector<int> perm(N);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);

        std::vector<int> tr_offset(N + 1, 0), te_offset(N + 1, 0);
        for (int k = 0; k < N; ++k) {
            tr_offset[k + 1] = tr_offset[k] + tr_sizes[k];
            te_offset[k + 1] = te_offset[k] + te_sizes[k];
        }
        for (int i = 0; i < N; ++i) {
            const int k = perm[i];
            auto& shard = split.clients[i];
            shard.train_indices.insert(shard.train_indices.end(),
                                       train_pools[c].begin() + tr_offset[k],
                                       train_pools[c].begin() + tr_offset[k + 1]);
            shard.test_indices.insert(shard.test_indices.end(),
                                      test_pools[c].begin() + te_offset[k],
                                      test_pools[c].begin() + te_offset[k + 1]);
            shard_of[i].push_back(k);
        }
    }

    for (int i = 0; i < N; ++i) {
        std::sort(split.clients[i].train_indices.begin(), split.clients[i].train_indices.end());
        std::sort(split.clients[i].test_indices.begin(), split.clients[i].test_indices.end());
        split.clients[i].provenance = "practical shards " + join_ints(shard_of[i]);
    }
    materialize(train, test, split);
    return split;
}

FederatedSplit partition_iid(const Dataset& train, const Dataset& test,
                             const PartitionSpec& spec) {
    validate_pair(train, test);
    const int N = spec.num_clients;
    Rng rng(derive_seed(spec.seed, Stream::Partition));

    FederatedSplit split;
    split.clients.resize(N);
    auto deal = [&](const Dataset& d, auto member) {
        std::vector<int> idx(d.size());
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        for (int i = 0; i < d.size(); ++i) {
            (split.clients[i % N].*member).push_back(idx[i]);
        }
    };
    deal(train, &ClientShard::train_indices);
    deal(test, &ClientShard::test_indices);
    for (int i = 0; i < N; ++i) {
        std::sort(split.clients[i].train_indices.begin(), split.clients[i].train_indices.end());
        std::sort(split.clients[i].test_indices.begin(), split.clients[i].test_indices.end());
        split.clients[i].provenance = "iid";
    }
    materialize(train, test, split);
    return split;
}

FederatedSplit make_partition(const Dataset& train, const Dataset& test,
                              const PartitionSpec& spec) {
    switch (spec.scheme) {
        case PartitionScheme::Pathological:
            return partition_pathological(train, test, spec);
        case PartitionScheme::Practical:
            return partition_practical(train, test, spec);
        case PartitionScheme::Iid:
            return partition_iid(train, test, spec);
    }
    throw ConfigError("unknown partition scheme");
}

std::string split_manifest(const FederatedSplit& split, const PartitionSpec& spec,
                           const std::string& config_json) {
    nlohmann::json j;
    switch (spec.scheme) {
        case PartitionScheme::Pathological: j["scheme"] = "pathological"; break;
        case PartitionScheme::Practical: j["scheme"] = "practical"; break;
        case PartitionScheme::Iid: j["scheme"] = "iid"; break;
    }
    j["num_clients"] = spec.num_clients;
    j["seed"] = spec.seed;
    if (!config_json.empty()) j["config"] = nlohmann::json::parse(config_json);
    j["clients"] = nlohmann::json::array();
    for (const auto& c : split.clients) {
        nlohmann::json jc;
        jc["train_indices"] = c.train_indices;
        jc["test_indices"] = c.test_indices;
        jc["provenance"] = c.provenance;
        j["clients"].push_back(std::move(jc));
    }
    return j.dump(2) + "\n";
}

}  // namespace pfl
