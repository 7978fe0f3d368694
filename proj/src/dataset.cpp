#include "metaconf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "metaconf/errors.hpp"
#include "metaconf/rng.hpp"

namespace metaconf {

void Dataset::validate() const {
    if (labels.size() != size() || origin.size() != size() || ids.size() != size())
        fail(ErrorCode::InvalidArgument, "dataset: per-sample arrays disagree with N");
    if (num_classes < 2)
        fail(ErrorCode::InvalidArgument, "dataset: needs at least 2 classes");
    for (std::size_t i = 0; i < size(); ++i) {
        if (origin[i] == Origin::InDomain) {
            if (labels[i] < 0 || labels[i] >= num_classes)
                fail(ErrorCode::InvalidArgument, "dataset: in-domain label out of range");
        } else if (labels[i] != kOodLabel) {
            fail(ErrorCode::InvalidArgument, "dataset: ood sample without sentinel label");
        }
    }
    if (!features.all_finite())
        fail(ErrorCode::InvalidArgument, "dataset: non-finite feature value");
}

namespace {

bool parse_double(std::string_view cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_label(std::string_view cell, int& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

std::vector<std::string_view> split_cells(std::string_view line, std::vector<std::string_view>& cells) {
    cells.clear();
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    return s;
}

void finish_classes(Dataset& d, int declared_classes, const std::string& path) {
    int max_label = -1;
    for (int l : d.labels) max_label = std::max(max_label, l);
    if (declared_classes > 0) {
        d.num_classes = declared_classes;
    } else {
        d.num_classes = max_label + 1;
    }
    if (d.num_classes < 2)
        fail(ErrorCode::FormatError, path + ": needs at least 2 classes, found " +
                                         std::to_string(d.num_classes));
}

} // namespace

Dataset load_csv(const std::string& path, int declared_classes, std::int64_t id_offset) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open: " + path);

    Dataset d;
    std::vector<double> values;
    std::size_t cols = 0;
    std::string line;
    std::vector<std::string_view> cells;
    std::size_t line_no = 0;
    std::size_t rows = 0;
    bool first_data_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty()) continue;
        split_cells(sv, cells);
        if (first_data_line) {
            first_data_line = false;
            // Header row detection: non-numeric first cell.
            double probe;
            if (!parse_double(trim(cells.front()), probe)) continue;
        }
        if (cols == 0) cols = cells.size();
        if (cells.size() != cols || cols < 2)
            fail(ErrorCode::FormatError,
                 path + ": ragged row at line " + std::to_string(line_no));
        for (std::size_t c = 0; c + 1 < cols; ++c) {
            double v;
            if (!parse_double(trim(cells[c]), v) || !std::isfinite(v))
                fail(ErrorCode::FormatError,
                     path + ": bad feature value at line " + std::to_string(line_no));
            values.push_back(v);
        }
        int label;
        if (!parse_label(trim(cells.back()), label) || label < 0)
            fail(ErrorCode::FormatError,
                 path + ": bad label at line " + std::to_string(line_no));
        if (declared_classes > 0 && label >= declared_classes)
            fail(ErrorCode::FormatError,
                 path + ": label " + std::to_string(label) + " out of range at line " +
                     std::to_string(line_no));
        d.labels.push_back(label);
        ++rows;
    }
    if (rows == 0) fail(ErrorCode::FormatError, path + ": no data rows");

    d.features = Matrix(rows, cols - 1);
    d.features.data() = std::move(values);
    d.origin.assign(rows, Origin::InDomain);
    d.ids.resize(rows);
    std::iota(d.ids.begin(), d.ids.end(), id_offset);
    finish_classes(d, declared_classes, path);
    d.validate();
    return d;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        fail(ErrorCode::FormatError, path + ": truncated header");
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

} // namespace

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path,
                      int declared_classes, std::int64_t id_offset) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) fail(ErrorCode::IoError, "cannot open: " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) fail(ErrorCode::IoError, "cannot open: " + labels_path);

    if (read_be32(img, images_path) != 0x00000803u)
        fail(ErrorCode::FormatError, images_path + ": bad idx image magic");
    std::uint32_t n = read_be32(img, images_path);
    std::uint32_t rows = read_be32(img, images_path);
    std::uint32_t cols = read_be32(img, images_path);

    if (read_be32(lab, labels_path) != 0x00000801u)
        fail(ErrorCode::FormatError, labels_path + ": bad idx label magic");
    std::uint32_t n_labels = read_be32(lab, labels_path);
    if (n != n_labels)
        fail(ErrorCode::FormatError, "idx pair: image count " + std::to_string(n) +
                                         " != label count " + std::to_string(n_labels));
    if (n == 0) fail(ErrorCode::FormatError, images_path + ": empty idx file");

    const std::size_t dim = std::size_t(rows) * cols;
    Dataset d;
    d.features = Matrix(n, dim);
    std::vector<unsigned char> buffer(dim);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!img.read(reinterpret_cast<char*>(buffer.data()),
                      static_cast<std::streamsize>(dim)))
            fail(ErrorCode::FormatError, images_path + ": truncated image data");
        for (std::size_t j = 0; j < dim; ++j)
            d.features.at(i, j) = static_cast<double>(buffer[j]) / 255.0;
    }
    d.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        char b;
        if (!lab.read(&b, 1))
            fail(ErrorCode::FormatError, labels_path + ": truncated label data");
        int label = static_cast<int>(static_cast<unsigned char>(b));
        if (declared_classes > 0 && label >= declared_classes)
            fail(ErrorCode::FormatError, labels_path + ": label " + std::to_string(label) +
                                             " out of range at sample " + std::to_string(i));
        d.labels[i] = label;
    }
    d.origin.assign(n, Origin::InDomain);
    d.ids.resize(n);
    std::iota(d.ids.begin(), d.ids.end(), id_offset);
    finish_classes(d, declared_classes, images_path);
    d.validate();
    return d;
}

void save_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open for writing: " + path);
    char buf[32];
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t j = 0; j < dataset.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.features.at(i, j));
            out << buf << ',';
        }
        out << dataset.labels[i] << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "write failed: " + path);
}

namespace {

Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.features = Matrix(rows.size(), d.dim());
    out.num_classes = d.num_classes;
    out.labels.reserve(rows.size());
    out.origin.reserve(rows.size());
    out.ids.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t src = rows[r];
        auto src_row = d.features.row(src);
        std::copy(src_row.begin(), src_row.end(), out.features.row(r).begin());
        out.labels.push_back(d.labels[src]);
        out.origin.push_back(d.origin[src]);
        out.ids.push_back(d.ids[src]);
    }
    return out;
}

} // namespace

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
    dataset.validate();
    const std::size_t n = dataset.size();
    if (n < 3) fail(ErrorCode::InvalidArgument, "split: need at least 3 samples");
    if (spec.train_base < 0 || spec.train_meta < 0 || spec.dev < 0)
        fail(ErrorCode::InvalidArgument, "split: negative fraction");
    if (std::abs(spec.train_base + spec.train_meta + spec.dev - 1.0) > 1e-9)
        fail(ErrorCode::InvalidArgument, "split: fractions must sum to 1");

    const double dn = static_cast<double>(n);
    std::size_t n_base = static_cast<std::size_t>(spec.train_base * dn);
    const std::size_t n_meta = static_cast<std::size_t>(spec.train_meta * dn);
    const std::size_t n_dev = static_cast<std::size_t>(spec.dev * dn);
    n_base += n - (n_base + n_meta + n_dev); // remainder to train-base
    if (n_base == 0 || n_meta == 0 || n_dev == 0)
        fail(ErrorCode::InvalidArgument, "split: a required subset would be empty");

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(perm);

    SplitResult result;
    result.train_base = take_rows(dataset, {perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_base)});
    result.train_meta = take_rows(dataset, {perm.begin() + static_cast<std::ptrdiff_t>(n_base),
                                            perm.begin() + static_cast<std::ptrdiff_t>(n_base + n_meta)});
    result.dev = take_rows(dataset, {perm.begin() + static_cast<std::ptrdiff_t>(n_base + n_meta), perm.end()});
    return result;
}

Dataset inject_label_noise(const Dataset& dataset, const NoiseSpec& spec) {
    dataset.validate();
    if (spec.rate < 0.0 || spec.rate > 1.0)
        fail(ErrorCode::InvalidArgument, "noise: rate must lie in [0,1]");
    for (auto o : dataset.origin)
        if (o != Origin::InDomain)
            fail(ErrorCode::InvalidArgument, "noise: dataset must be fully in-domain");
    if (dataset.num_classes < 2)
        fail(ErrorCode::InvalidArgument, "noise: need at least 2 classes");

    Dataset out = dataset;
    const std::size_t n = dataset.size();
    const std::size_t count = static_cast<std::size_t>(spec.rate * static_cast<double>(n));
    if (count == 0) return out;

    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(perm);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t idx = perm[i];
        const int old = out.labels[idx];
        // uniform over the complement of the original label
        int drawn = static_cast<int>(rng.below(static_cast<std::uint64_t>(dataset.num_classes - 1)));
        out.labels[idx] = drawn >= old ? drawn + 1 : drawn;
    }
    return out;
}

Dataset pool_ood(const Dataset& in_test, const Dataset& ood) {
    in_test.validate();
    if (ood.size() > 0 && ood.dim() != in_test.dim())
        fail(ErrorCode::InvalidArgument, "pool: feature dimensionality mismatch");

    Dataset out;
    const std::size_t n = in_test.size() + ood.size();
    out.features = Matrix(n, in_test.dim());
    out.num_classes = in_test.num_classes;
    out.labels.reserve(n);
    out.origin.reserve(n);
    out.ids.reserve(n);
    for (std::size_t i = 0; i < in_test.size(); ++i) {
        auto row = in_test.features.row(i);
        std::copy(row.begin(), row.end(), out.features.row(i).begin());
        out.labels.push_back(in_test.labels[i]);
        out.origin.push_back(Origin::InDomain);
        out.ids.push_back(in_test.ids[i]);
    }
    for (std::size_t i = 0; i < ood.size(); ++i) {
        auto row = ood.features.row(i);
        std::copy(row.begin(), row.end(), out.features.row(in_test.size() + i).begin());
        out.labels.push_back(kOodLabel);
        out.origin.push_back(Origin::OutOfDomain);
        out.ids.push_back(ood.ids[i]);
    }
    return out;
}

Dataset generate_clusters(const SyntheticSpec& spec, std::int64_t id_offset) {
    if (spec.classes < 2 || spec.clusters_per_class < 1 || spec.dim < 1 || spec.samples == 0)
        fail(ErrorCode::InvalidArgument, "generator: bad spec");

    Rng rng(spec.seed);
    const std::size_t n_centers =
        static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.clusters_per_class);
    Matrix centers(n_centers, spec.dim);
    for (double& v : centers.data()) v = spec.center_scale * rng.normal();

    Dataset d;
    d.features = Matrix(spec.samples, spec.dim);
    d.num_classes = spec.classes;
    d.labels.resize(spec.samples);
    d.origin.assign(spec.samples, Origin::InDomain);
    d.ids.resize(spec.samples);
    std::iota(d.ids.begin(), d.ids.end(), id_offset);
    for (std::size_t i = 0; i < spec.samples; ++i) {
        const int label = static_cast<int>(i % static_cast<std::size_t>(spec.classes));
        const std::size_t cluster = rng.below(static_cast<std::uint64_t>(spec.clusters_per_class));
        const std::size_t center =
            static_cast<std::size_t>(label) * static_cast<std::size_t>(spec.clusters_per_class) + cluster;
        for (int j = 0; j < spec.dim; ++j)
            d.features.at(i, static_cast<std::size_t>(j)) =
                centers.at(center, static_cast<std::size_t>(j)) + spec.cluster_scale * rng.normal();
        d.labels[i] = label;
    }
    return d;
}

} // namespace metaconf
