#include "pfl/dataset.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pfl/errors.hpp"

namespace pfl {

Batch gather_batch(const Dataset& data, std::span<const int> rows) {
    Batch b;
    b.rows = static_cast<int>(rows.size());
    b.inputs.reserve(rows.size() * static_cast<std::size_t>(data.feature_dim));
    b.labels.reserve(rows.size());
    for (int r : rows) {
        auto x = data.row(r);
        b.inputs.insert(b.inputs.end(), x.begin(), x.end());
        b.labels.push_back(data.labels[r]);
    }
    return b;
}

Batch full_batch(const Dataset& data) {
    Batch b;
    b.rows = data.size();
    b.inputs = data.inputs;
    b.labels = data.labels;
    return b;
}

namespace {

std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off,
                        const std::string& path) {
    if (off + 4 > b.size()) {
        throw DataError("'" + path + "' truncated at offset " + std::to_string(off));
    }
    return (static_cast<std::uint32_t>(b[off]) << 24) | (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) | static_cast<std::uint32_t>(b[off + 3]);
}

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const auto img = read_file_bytes(images_path);
    const auto lab = read_file_bytes(labels_path);

    const std::uint32_t img_magic = read_be32(img, 0, images_path);
    if (img_magic != kIdxImagesMagic) {
        std::ostringstream os;
        os << "'" << images_path << "': wrong magic 0x" << std::hex << img_magic
           << " at offset 0 (expected 0x803 image file)";
        throw DataError(os.str());
    }
    const std::uint32_t lab_magic = read_be32(lab, 0, labels_path);
    if (lab_magic != kIdxLabelsMagic) {
        std::ostringstream os;
        os << "'" << labels_path << "': wrong magic 0x" << std::hex << lab_magic
           << " at offset 0 (expected 0x801 label file)";
        throw DataError(os.str());
    }

    const std::uint32_t n_img = read_be32(img, 4, images_path);
    const std::uint32_t rows = read_be32(img, 8, images_path);
    const std::uint32_t cols = read_be32(img, 12, images_path);
    const std::uint32_t n_lab = read_be32(lab, 4, labels_path);
    if (n_img != n_lab) {
        throw DataError("image count " + std::to_string(n_img) + " != label count " +
                        std::to_string(n_lab));
    }
    const std::size_t pixels = static_cast<std::size_t>(n_img) * rows * cols;
    if (img.size() != 16 + pixels) {
        throw DataError("'" + images_path + "' truncated: expected " + std::to_string(16 + pixels) +
                        " bytes, have " + std::to_string(img.size()));
    }
    if (lab.size() != 8 + n_lab) {
        throw DataError("'" + labels_path + "' truncated: expected " + std::to_string(8 + n_lab) +
                        " bytes, have " + std::to_string(lab.size()));
    }

    Dataset d;
    d.feature_dim = static_cast<int>(rows * cols);
    d.inputs.resize(pixels);
    for (std::size_t i = 0; i < pixels; ++i) d.inputs[i] = img[16 + i] / 255.0;
    d.labels.resize(n_lab);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_lab; ++i) {
        d.labels[i] = lab[8 + i];
        max_label = std::max(max_label, d.labels[i]);
    }
    d.num_classes = max_label + 1;
    return d;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, int line_no, const std::string& path) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || *end != '\0' || errno == ERANGE) {
        throw DataError("'" + path + "' line " + std::to_string(line_no) + ": non-numeric cell '" +
                        cell + "'");
    }
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "': empty file");
    const auto header = split_csv_line(line);
    int label_col = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == label_column) {
            label_col = static_cast<int>(c);
            break;
        }
    }
    if (label_col < 0) {
        throw DataError("'" + path + "': label column '" + label_column + "' not found in header");
    }

    Dataset d;
    d.feature_dim = static_cast<int>(header.size()) - 1;
    int line_no = 1;
    int max_label = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw DataError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_cell(cells[c], line_no, path);
            if (static_cast<int>(c) == label_col) {
                if (v != static_cast<double>(static_cast<int>(v)) || v < 0) {
                    throw DataError("'" + path + "' line " + std::to_string(line_no) +
                                    ": label must be a nonnegative integer, got '" + cells[c] + "'");
                }
                d.labels.push_back(static_cast<int>(v));
                max_label = std::max(max_label, d.labels.back());
            } else {
                d.inputs.push_back(v);
            }
        }
    }
    if (d.labels.empty()) throw DataError("'" + path + "': no data rows");
    d.num_classes = max_label + 1;
    return d;
}

Dataset synth_clusters(int num_classes, int feature_dim, int samples_per_class,
                       double class_center_scale, double noise_sigma, std::uint64_t seed) {
    if (num_classes < 1 || feature_dim < 1 || samples_per_class < 1) {
        throw ConfigError("synth_clusters needs positive class/dim/sample counts");
    }
    Rng rng(seed);
    std::vector<double> centers(static_cast<std::size_t>(num_classes) * feature_dim);
    for (double& v : centers) v = class_center_scale * rng.gaussian();

    Dataset d;
    d.num_classes = num_classes;
    d.feature_dim = feature_dim;
    d.inputs.reserve(static_cast<std::size_t>(num_classes) * samples_per_class * feature_dim);
    d.labels.reserve(static_cast<std::size_t>(num_classes) * samples_per_class);
    for (int c = 0; c < num_classes; ++c) {
        const double* mu = centers.data() + static_cast<std::size_t>(c) * feature_dim;
        for (int s = 0; s < samples_per_class; ++s) {
            for (int k = 0; k < feature_dim; ++k) {
                d.inputs.push_back(mu[k] + noise_sigma * rng.gaussian());
            }
            d.labels.push_back(c);
        }
    }
    return d;
}

std::vector<std::vector<int>> rows_by_class(const Dataset& data) {
    std::vector<std::vector<int>> out(data.num_classes);
    for (int i = 0; i < data.size(); ++i) out[data.labels[i]].push_back(i);
    return out;
}

Dataset subset(const Dataset& data, std::span<const int> rows) {
    Dataset d;
    d.num_classes = data.num_classes;
    d.feature_dim = data.feature_dim;
    d.inputs.reserve(rows.size() * static_cast<std::size_t>(data.feature_dim));
    d.labels.reserve(rows.size());
    for (int r : rows) {
        auto x = data.row(r);
        d.inputs.insert(d.inputs.end(), x.begin(), x.end());
        d.labels.push_back(data.labels[r]);
    }
    return d;
}

}  // namespace pfl
