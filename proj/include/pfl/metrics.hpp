#pragma once

#include <span>
#include <string>
#include <vector>

#include "pfl/dataset.hpp"
#include "pfl/numerics.hpp"

namespace pfl {

struct MetricRow {
    int round = 0;
    int client = 0;
    double train_loss = 0.0;
    double penalized_loss = 0.0;
    double test_accuracy = 0.0;
    std::string algorithm;
};

// Client-side DR snapshot, one per client per round.
struct DRTrace {
    int round = 0;
    int client = 0;
    std::vector<double> weights;
};

// Fraction of argmax-correct predictions; logit ties break toward the
// lowest class index.
double client_accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& test);

// Best mean client test accuracy: max over rounds of the unweighted mean
// over clients. Every (round, client) cell must be present.
double bmcta(std::span<const MetricRow> rows);

// %.17g: shortest fixed-precision form that round-trips a double exactly.
std::string format_g17(double v);

std::string quote_csv(const std::string& field);

// Streaming CSV sink; writes the optional "# provenance" line and the
// header up front, then appends rows and flushes after each write.
class MetricsCsvWriter {
public:
    MetricsCsvWriter(const std::string& path, const std::string& provenance = "");
    void append(std::span<const MetricRow> rows);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

class DrTraceCsvWriter {
public:
    DrTraceCsvWriter(const std::string& path, int num_models, const std::string& provenance = "");
    void append(std::span<const DRTrace> traces);

private:
    std::string path_;
    int num_models_;
};

void write_metrics_csv(const std::string& path, std::span<const MetricRow> rows,
                       const std::string& provenance = "");
void write_dr_trace_csv(const std::string& path, std::span<const DRTrace> traces, int num_models,
                        const std::string& provenance = "");

// Parses a metrics.csv produced by this repo ("# ..." lines are skipped).
std::vector<MetricRow> read_metrics_csv(const std::string& path);

}  // namespace pfl
