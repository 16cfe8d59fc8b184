#include "pfl/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pfl/errors.hpp"

namespace pfl {

using nlohmann::json;

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Apple: return "apple";
        case Algorithm::FedAvg: return "fedavg";
        case Algorithm::FedAvgLocal: return "fedavg_local";
        case Algorithm::FedAvgFt: return "fedavg_ft";
        case Algorithm::FedProxFt: return "fedprox_ft";
        case Algorithm::Separate: return "separate";
    }
    throw ConfigError("unknown algorithm");
}

SchedulerSpec RunConfig::scheduler_spec() const {
    SchedulerSpec s;
    s.kind = scheduler.kind;
    s.mu = scheduler.mu;
    s.epsilon = scheduler.epsilon;
    s.cutoff_round = std::max(1, static_cast<int>(std::llround(scheduler.cutoff_fraction * rounds)));
    return s;
}

namespace {

[[noreturn]] void fail(const std::string& pointer, const std::string& msg) {
    throw ConfigError(pointer + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& pointer,
                    const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!known.count(it.key())) fail(pointer + "/" + it.key(), "unknown key");
    }
}

const json* find(const json& obj, const std::string& key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& pointer, const std::string& key,
                  double fallback, bool required = false) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) fail(pointer + "/" + key, "missing required key");
        return fallback;
    }
    if (!v->is_number()) fail(pointer + "/" + key, "expected a number");
    return v->get<double>();
}

int get_int(const json& obj, const std::string& pointer, const std::string& key, int fallback,
            bool required = false) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) fail(pointer + "/" + key, "missing required key");
        return fallback;
    }
    if (!v->is_number_integer()) fail(pointer + "/" + key, "expected an integer");
    return v->get<int>();
}

std::string get_string(const json& obj, const std::string& pointer, const std::string& key,
                       const std::string& fallback, bool required = false) {
    const json* v = find(obj, key);
    if (!v) {
        if (required) fail(pointer + "/" + key, "missing required key");
        return fallback;
    }
    if (!v->is_string()) fail(pointer + "/" + key, "expected a string");
    return v->get<std::string>();
}

ModelSpec parse_model(const json& j) {
    if (!j.is_object()) fail("/model", "expected an object");
    reject_unknown(j, "/model", {"kind", "input_dim", "num_classes", "hidden_dim"});
    ModelSpec m;
    const std::string kind = get_string(j, "/model", "kind", "", true);
    if (kind == "softmax_regression") {
        m.kind = ModelKind::SoftmaxRegression;
    } else if (kind == "mlp_1hidden") {
        m.kind = ModelKind::Mlp1Hidden;
    } else {
        fail("/model/kind", "expected 'softmax_regression' or 'mlp_1hidden'");
    }
    m.input_dim = get_int(j, "/model", "input_dim", 0, true);
    m.num_classes = get_int(j, "/model", "num_classes", 0, true);
    m.hidden_dim = get_int(j, "/model", "hidden_dim", 0, m.kind == ModelKind::Mlp1Hidden);
    if (m.input_dim < 1) fail("/model/input_dim", "must be positive");
    if (m.num_classes < 2) fail("/model/num_classes", "must be at least 2");
    if (m.kind == ModelKind::Mlp1Hidden && m.hidden_dim < 1) {
        fail("/model/hidden_dim", "must be positive");
    }
    return m;
}

DataConfig parse_data(const json& j) {
    if (!j.is_object()) fail("/data", "expected an object");
    DataConfig d;
    const std::string source = get_string(j, "/data", "source", "", true);
    if (source == "synthetic") {
        d.source = DataSource::Synthetic;
        reject_unknown(j, "/data",
                       {"source", "num_classes", "feature_dim", "train_per_class",
                        "test_per_class", "center_scale", "noise_sigma", "seed"});
        d.num_classes = get_int(j, "/data", "num_classes", d.num_classes);
        d.feature_dim = get_int(j, "/data", "feature_dim", d.feature_dim);
        d.train_per_class = get_int(j, "/data", "train_per_class", d.train_per_class);
        d.test_per_class = get_int(j, "/data", "test_per_class", d.test_per_class);
        d.center_scale = get_number(j, "/data", "center_scale", d.center_scale);
        d.noise_sigma = get_number(j, "/data", "noise_sigma", d.noise_sigma);
        if (const json* v = find(j, "seed")) {
            if (!v->is_number_unsigned()) fail("/data/seed", "expected an unsigned integer");
            d.seed = v->get<std::uint64_t>();
        }
        if (d.num_classes < 2) fail("/data/num_classes", "must be at least 2");
        if (d.feature_dim < 1) fail("/data/feature_dim", "must be positive");
        if (d.train_per_class < 1) fail("/data/train_per_class", "must be positive");
        if (d.test_per_class < 1) fail("/data/test_per_class", "must be positive");
        if (d.center_scale <= 0) fail("/data/center_scale", "must be positive");
        if (d.noise_sigma < 0) fail("/data/noise_sigma", "must be nonnegative");
    } else if (source == "idx") {
        d.source = DataSource::Idx;
        reject_unknown(j, "/data",
                       {"source", "train_images", "train_labels", "test_images", "test_labels"});
        d.train_images = get_string(j, "/data", "train_images", "", true);
        d.train_labels = get_string(j, "/data", "train_labels", "", true);
        d.test_images = get_string(j, "/data", "test_images", "", true);
        d.test_labels = get_string(j, "/data", "test_labels", "", true);
    } else if (source == "csv") {
        d.source = DataSource::Csv;
        reject_unknown(j, "/data", {"source", "train_csv", "test_csv", "label_column"});
        d.train_csv = get_string(j, "/data", "train_csv", "", true);
        d.test_csv = get_string(j, "/data", "test_csv", "", true);
        d.label_column = get_string(j, "/data", "label_column", "", true);
    } else {
        fail("/data/source", "expected 'synthetic', 'idx' or 'csv'");
    }
    return d;
}

void parse_partition(const json& j, RunConfig& cfg) {
    if (!j.is_object()) fail("/partition", "expected an object");
    reject_unknown(j, "/partition",
                   {"scheme", "num_clients", "seed", "classes_per_client", "shard_fractions"});
    PartitionSpec& p = cfg.partition;
    const std::string scheme = get_string(j, "/partition", "scheme", "pathological");
    if (scheme == "pathological") {
        p.scheme = PartitionScheme::Pathological;
    } else if (scheme == "practical") {
        p.scheme = PartitionScheme::Practical;
    } else if (scheme == "iid") {
        p.scheme = PartitionScheme::Iid;
    } else {
        fail("/partition/scheme", "expected 'pathological', 'practical' or 'iid'");
    }
    p.num_clients = get_int(j, "/partition", "num_clients", p.num_clients);
    if (p.num_clients < 1) fail("/partition/num_clients", "must be positive");
    p.classes_per_client = get_int(j, "/partition", "classes_per_client", p.classes_per_client);
    if (p.classes_per_client < 1) fail("/partition/classes_per_client", "must be positive");
    if (const json* v = find(j, "seed")) {
        if (!v->is_number_unsigned()) fail("/partition/seed", "expected an unsigned integer");
        p.seed = v->get<std::uint64_t>();
        cfg.partition_seed_explicit = true;
    }
    if (const json* v = find(j, "shard_fractions")) {
        if (!v->is_array() || v->empty()) fail("/partition/shard_fractions", "expected an array");
        p.shard_fractions.clear();
        for (std::size_t i = 0; i < v->size(); ++i) {
            const json& e = (*v)[i];
            if (!e.is_number()) {
                fail("/partition/shard_fractions/" + std::to_string(i), "expected a number");
            }
            p.shard_fractions.push_back(e.get<double>());
        }
    } else if (p.scheme == PartitionScheme::Practical &&
               static_cast<int>(p.shard_fractions.size()) != p.num_clients) {
        fail("/partition/shard_fractions",
             "defaults assume 12 clients; specify fractions for " +
                 std::to_string(p.num_clients) + " clients");
    }
}

void parse_scheduler(const json& j, SchedulerConfig& s) {
    if (!j.is_object()) fail("/scheduler", "expected an object");
    reject_unknown(j, "/scheduler", {"kind", "mu", "cutoff_fraction", "epsilon"});
    const std::string kind = get_string(j, "/scheduler", "kind", "constant_zero");
    if (kind == "cosine") {
        s.kind = SchedulerKind::Cosine;
    } else if (kind == "exponential") {
        s.kind = SchedulerKind::Exponential;
    } else if (kind == "constant_zero") {
        s.kind = SchedulerKind::ConstantZero;
    } else {
        fail("/scheduler/kind", "expected 'cosine', 'exponential' or 'constant_zero'");
    }
    s.mu = get_number(j, "/scheduler", "mu", s.mu);
    if (s.mu < 0) fail("/scheduler/mu", "must be nonnegative");
    s.cutoff_fraction = get_number(j, "/scheduler", "cutoff_fraction", s.cutoff_fraction);
    if (s.cutoff_fraction <= 0 || s.cutoff_fraction > 1) {
        fail("/scheduler/cutoff_fraction", "must be in (0, 1]");
    }
    s.epsilon = get_number(j, "/scheduler", "epsilon", s.epsilon);
    if (s.epsilon <= 0 || s.epsilon >= 1) fail("/scheduler/epsilon", "must be in (0, 1)");
}

}  // namespace

RunConfig parse_config_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown(j, "",
                   {"model", "data", "partition", "algorithm", "rounds", "local_epochs",
                    "batch_size", "lr_net", "lr_dr", "momentum", "scheduler", "budget_m",
                    "mu_prox", "finetune_epochs", "seed", "output_dir"});

    RunConfig cfg;
    const json* model = find(j, "model");
    if (!model) fail("/model", "missing required key");
    cfg.model = parse_model(*model);
    const json* data = find(j, "data");
    if (!data) fail("/data", "missing required key");
    cfg.data = parse_data(*data);
    if (const json* part = find(j, "partition")) parse_partition(*part, cfg);

    const std::string algo = get_string(j, "", "algorithm", "", true);
    if (algo == "apple") {
        cfg.algorithm = Algorithm::Apple;
    } else if (algo == "fedavg") {
        cfg.algorithm = Algorithm::FedAvg;
    } else if (algo == "fedavg_local") {
        cfg.algorithm = Algorithm::FedAvgLocal;
    } else if (algo == "fedavg_ft") {
        cfg.algorithm = Algorithm::FedAvgFt;
    } else if (algo == "fedprox_ft") {
        cfg.algorithm = Algorithm::FedProxFt;
    } else if (algo == "separate") {
        cfg.algorithm = Algorithm::Separate;
    } else {
        fail("/algorithm", "unknown algorithm '" + algo + "'");
    }

    cfg.rounds = get_int(j, "", "rounds", cfg.rounds);
    if (cfg.rounds < 0) fail("/rounds", "must be nonnegative");
    cfg.local_epochs = get_int(j, "", "local_epochs", cfg.local_epochs);
    if (cfg.local_epochs < 0) fail("/local_epochs", "must be nonnegative");
    cfg.batch_size = get_int(j, "", "batch_size", cfg.batch_size);
    if (cfg.batch_size < 1) fail("/batch_size", "must be positive");
    cfg.lr_net = get_number(j, "", "lr_net", cfg.lr_net);
    if (cfg.lr_net < 0) fail("/lr_net", "must be nonnegative");
    cfg.lr_dr = get_number(j, "", "lr_dr", cfg.lr_dr);
    if (cfg.lr_dr < 0) fail("/lr_dr", "must be nonnegative");
    cfg.momentum = get_number(j, "", "momentum", cfg.momentum);
    if (cfg.momentum < 0 || cfg.momentum >= 1) fail("/momentum", "must be in [0, 1)");
    if (const json* sched = find(j, "scheduler")) parse_scheduler(*sched, cfg.scheduler);
    cfg.budget_m = get_int(j, "", "budget_m", cfg.budget_m);
    if (cfg.budget_m < 0) fail("/budget_m", "must be nonnegative (0 = unlimited)");
    if (cfg.budget_m > cfg.partition.num_clients - 1) {
        fail("/budget_m", "must be at most num_clients - 1");
    }
    cfg.mu_prox = get_number(j, "", "mu_prox", cfg.mu_prox);
    if (cfg.mu_prox < 0) fail("/mu_prox", "must be nonnegative");
    if (cfg.algorithm == Algorithm::FedProxFt && cfg.mu_prox <= 0) {
        fail("/mu_prox", "fedprox_ft requires a positive mu_prox");
    }
    cfg.finetune_epochs = get_int(j, "", "finetune_epochs", cfg.finetune_epochs);
    if (cfg.finetune_epochs < 0) fail("/finetune_epochs", "must be nonnegative");
    if (const json* v = find(j, "seed")) {
        if (!v->is_number_unsigned()) fail("/seed", "expected an unsigned integer");
        cfg.seed = v->get<std::uint64_t>();
    }
    cfg.output_dir = get_string(j, "", "output_dir", cfg.output_dir);

    // Cross-field checks.
    if (cfg.data.source == DataSource::Synthetic) {
        if (cfg.model.input_dim != cfg.data.feature_dim) {
            fail("/model/input_dim", "must equal /data/feature_dim for synthetic data");
        }
        if (cfg.model.num_classes != cfg.data.num_classes) {
            fail("/model/num_classes", "must equal /data/num_classes for synthetic data");
        }
        if (cfg.partition.classes_per_client > cfg.data.num_classes) {
            fail("/partition/classes_per_client", "exceeds /data/num_classes");
        }
    }
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_json(buf.str());
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    json m;
    m["kind"] = cfg.model.kind == ModelKind::SoftmaxRegression ? "softmax_regression" : "mlp_1hidden";
    m["input_dim"] = cfg.model.input_dim;
    m["num_classes"] = cfg.model.num_classes;
    if (cfg.model.kind == ModelKind::Mlp1Hidden) m["hidden_dim"] = cfg.model.hidden_dim;
    j["model"] = m;

    json d;
    switch (cfg.data.source) {
        case DataSource::Synthetic:
            d["source"] = "synthetic";
            d["num_classes"] = cfg.data.num_classes;
            d["feature_dim"] = cfg.data.feature_dim;
            d["train_per_class"] = cfg.data.train_per_class;
            d["test_per_class"] = cfg.data.test_per_class;
            d["center_scale"] = cfg.data.center_scale;
            d["noise_sigma"] = cfg.data.noise_sigma;
            if (cfg.data.seed) d["seed"] = *cfg.data.seed;
            break;
        case DataSource::Idx:
            d["source"] = "idx";
            d["train_images"] = cfg.data.train_images;
            d["train_labels"] = cfg.data.train_labels;
            d["test_images"] = cfg.data.test_images;
            d["test_labels"] = cfg.data.test_labels;
            break;
        case DataSource::Csv:
            d["source"] = "csv";
            d["train_csv"] = cfg.data.train_csv;
            d["test_csv"] = cfg.data.test_csv;
            d["label_column"] = cfg.data.label_column;
            break;
    }
    j["data"] = d;

    json p;
    switch (cfg.partition.scheme) {
        case PartitionScheme::Pathological: p["scheme"] = "pathological"; break;
        case PartitionScheme::Practical: p["scheme"] = "practical"; break;
        case PartitionScheme::Iid: p["scheme"] = "iid"; break;
    }
    p["num_clients"] = cfg.partition.num_clients;
    p["classes_per_client"] = cfg.partition.classes_per_client;
    p["shard_fractions"] = cfg.partition.shard_fractions;
    if (cfg.partition_seed_explicit) p["seed"] = cfg.partition.seed;
    j["partition"] = p;

    j["algorithm"] = algorithm_name(cfg.algorithm);
    j["rounds"] = cfg.rounds;
    j["local_epochs"] = cfg.local_epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr_net"] = cfg.lr_net;
    j["lr_dr"] = cfg.lr_dr;
    j["momentum"] = cfg.momentum;

    json s;
    switch (cfg.scheduler.kind) {
        case SchedulerKind::Cosine: s["kind"] = "cosine"; break;
        case SchedulerKind::Exponential: s["kind"] = "exponential"; break;
        case SchedulerKind::ConstantZero: s["kind"] = "constant_zero"; break;
    }
    s["mu"] = cfg.scheduler.mu;
    s["cutoff_fraction"] = cfg.scheduler.cutoff_fraction;
    s["epsilon"] = cfg.scheduler.epsilon;
    j["scheduler"] = s;

    j["budget_m"] = cfg.budget_m;
    j["mu_prox"] = cfg.mu_prox;
    j["finetune_epochs"] = cfg.finetune_epochs;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    return j.dump();
}

DataPair load_data(const RunConfig& cfg) {
    DataPair out;
    switch (cfg.data.source) {
        case DataSource::Synthetic: {
            // One pool per class, split so train and test share the exact
            // class centers and therefore the same distributions.
            const std::uint64_t seed =
                cfg.data.seed ? *cfg.data.seed : derive_seed(cfg.seed, Stream::Synthetic);
            const int per_class = cfg.data.train_per_class + cfg.data.test_per_class;
            const Dataset pool =
                synth_clusters(cfg.data.num_classes, cfg.data.feature_dim, per_class,
                               cfg.data.center_scale, cfg.data.noise_sigma, seed);
            std::vector<int> train_rows, test_rows;
            for (int c = 0; c < cfg.data.num_classes; ++c) {
                const int base = c * per_class;  // synth emits class-major
                for (int s = 0; s < cfg.data.train_per_class; ++s) train_rows.push_back(base + s);
                for (int s = cfg.data.train_per_class; s < per_class; ++s) {
                    test_rows.push_back(base + s);
                }
            }
            out.train = subset(pool, train_rows);
            out.test = subset(pool, test_rows);
            break;
        }
        case DataSource::Idx:
            out.train = load_idx(cfg.data.train_images, cfg.data.train_labels);
            out.test = load_idx(cfg.data.test_images, cfg.data.test_labels);
            break;
        case DataSource::Csv:
            out.train = load_csv(cfg.data.train_csv, cfg.data.label_column);
            out.test = load_csv(cfg.data.test_csv, cfg.data.label_column);
            break;
    }
    // Loaders infer num_classes from the labels they saw; unify.
    const int classes = std::max(out.train.num_classes, out.test.num_classes);
    out.train.num_classes = classes;
    out.test.num_classes = classes;
    if (out.train.feature_dim != cfg.model.input_dim) {
        throw ConfigError("model input_dim " + std::to_string(cfg.model.input_dim) +
                          " does not match data feature_dim " +
                          std::to_string(out.train.feature_dim));
    }
    if (classes > cfg.model.num_classes) {
        throw ConfigError("data contains " + std::to_string(classes) +
                          " classes, model covers only " + std::to_string(cfg.model.num_classes));
    }
    out.train.num_classes = cfg.model.num_classes;
    out.test.num_classes = cfg.model.num_classes;
    return out;
}

PartitionSpec resolved_partition(const RunConfig& cfg) {
    PartitionSpec p = cfg.partition;
    if (!cfg.partition_seed_explicit) p.seed = cfg.seed;
    return p;
}

}  // namespace pfl
