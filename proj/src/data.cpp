#include "gatelab/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>

namespace gatelab {
namespace data {

Vec Dataset::input(std::size_t s) const {
    Vec v(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) v[i] = x(i, s);
    return v;
}

Dataset gen_experiment1(int n, std::uint64_t seed) {
    if (n < 1) throw DimensionError("gen_experiment1: n must be >= 1");
    Prng rng(seed);
    Dataset ds;
    ds.name = "experiment1";
    ds.seed = seed;
    ds.x = Matrix(1, n, 1.0);
    ds.y.resize(n);
    for (double& v : ds.y) v = rng.next_uniform(-1.0, 1.0);
    return ds;
}

Dataset gen_experiment2(int n, std::uint64_t seed) {
    if (n < 1) throw DimensionError("gen_experiment2: n must be >= 1");
    Prng rng(seed);
    Dataset ds;
    ds.name = "experiment2";
    ds.seed = seed;
    ds.x = Matrix(2, n);
    ds.y.resize(n);
    for (int s = 0; s < n; ++s) {
        ds.x(0, s) = rng.next_uniform(-1.0, 1.0);
        ds.x(1, s) = rng.next_uniform(-1.0, 1.0);
    }
    for (double& v : ds.y) v = rng.next_uniform(-1.0, 1.0);
    return ds;
}

Dataset gen_two_gaussians(int n, int d_in, double separation, std::uint64_t seed) {
    if (n < 2) throw DimensionError("gen_two_gaussians: n must be >= 2");
    Prng rng(seed);
    Dataset ds;
    ds.name = "two-gaussians";
    ds.seed = seed;
    ds.x = Matrix(d_in, n);
    ds.y.resize(n);
    const double shift = separation / (2.0 * std::sqrt(static_cast<double>(d_in)));
    for (int s = 0; s < n; ++s) {
        const double label = s % 2 == 0 ? -1.0 : 1.0;
        for (int i = 0; i < d_in; ++i) ds.x(i, s) = 0.5 * rng.next_gaussian() + label * shift;
        ds.y[s] = label;
    }
    return ds;
}

namespace {

bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end != '\0') {
        if (!std::isspace(static_cast<unsigned char>(*end))) return false;
        ++end;
    }
    return true;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, int d_in) {
    std::ifstream in(path);
    if (!in) throw FormatError("load_csv: cannot open '" + path + "'");

    std::vector<Vec> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv_line(line);
        Vec row;
        row.reserve(cells.size());
        bool numeric = true;
        for (const std::string& cell : cells) {
            double v;
            if (!parse_double(cell, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first_content_line) {  // header
                first_content_line = false;
                continue;
            }
            throw ParseError("load_csv: non-numeric cell at line " + std::to_string(lineno));
        }
        first_content_line = false;
        if (static_cast<int>(row.size()) != d_in + 1)
            throw ParseError("load_csv: line " + std::to_string(lineno) + " has " +
                             std::to_string(row.size()) + " columns, expected " +
                             std::to_string(d_in + 1));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("load_csv: no data rows in '" + path + "'");

    Dataset ds;
    ds.name = path;
    ds.x = Matrix(d_in, rows.size());
    ds.y.resize(rows.size());
    for (std::size_t s = 0; s < rows.size(); ++s) {
        for (int i = 0; i < d_in; ++i) ds.x(i, s) = rows[s][i];
        ds.y[s] = rows[s][d_in];
    }
    return ds;
}

void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("save_csv: cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < ds.x.rows; ++i) out << "x" << i + 1 << ",";
    out << "y\n";
    out.precision(17);
    for (std::size_t s = 0; s < ds.n(); ++s) {
        for (std::size_t i = 0; i < ds.x.rows; ++i) out << ds.x(i, s) << ",";
        out << ds.y[s] << "\n";
    }
    if (!out) throw FormatError("save_csv: write failed");
}

namespace {

std::uint32_t read_be_u32(std::istream& in, const char* what) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError(std::string("IDX: truncated while reading ") + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx_binary_mnist(const std::string& images_path, const std::string& labels_path,
                              int class_a, int class_b, int limit) {
    if (class_a == class_b) throw NotApplicableError("binary MNIST needs two distinct classes");
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw FormatError("IDX: cannot open '" + images_path + "'");
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw FormatError("IDX: cannot open '" + labels_path + "'");

    if (read_be_u32(img, "image magic") != 0x00000803u)
        throw FormatError("IDX: bad image magic, expected 0x00000803");
    if (read_be_u32(lab, "label magic") != 0x00000801u)
        throw FormatError("IDX: bad label magic, expected 0x00000801");

    const std::uint32_t n_img = read_be_u32(img, "image count");
    const std::uint32_t rows = read_be_u32(img, "rows");
    const std::uint32_t cols = read_be_u32(img, "cols");
    const std::uint32_t n_lab = read_be_u32(lab, "label count");
    if (n_img != n_lab) throw FormatError("IDX: image/label counts differ");

    const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
    std::vector<Vec> keep_x;
    Vec keep_y;
    int count_a = 0, count_b = 0;
    std::vector<unsigned char> buf(pixels);
    for (std::uint32_t s = 0; s < n_img; ++s) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels));
        if (!img) throw FormatError("IDX: truncated image payload");
        char lc;
        lab.read(&lc, 1);
        if (!lab) throw FormatError("IDX: truncated label payload");
        const int label = static_cast<unsigned char>(lc);
        double target;
        if (label == class_a) {
            if (count_a >= limit) continue;
            ++count_a;
            target = -1.0;
        } else if (label == class_b) {
            if (count_b >= limit) continue;
            ++count_b;
            target = 1.0;
        } else {
            continue;
        }
        Vec xv(pixels);
        for (std::size_t i = 0; i < pixels; ++i) xv[i] = buf[i] / 255.0;
        keep_x.push_back(std::move(xv));
        keep_y.push_back(target);
        if (count_a >= limit && count_b >= limit) break;
    }
    if (keep_x.empty())
        throw NotApplicableError("IDX: no examples of classes " + std::to_string(class_a) +
                                 "/" + std::to_string(class_b) + " found");

    Dataset ds;
    ds.name = "binary-mnist-" + std::to_string(class_a) + std::to_string(class_b);
    ds.x = Matrix(pixels, keep_x.size());
    ds.y = keep_y;
    for (std::size_t s = 0; s < keep_x.size(); ++s)
        for (std::size_t i = 0; i < pixels; ++i) ds.x(i, s) = keep_x[s][i];
    return ds;
}

std::pair<Dataset, Dataset> shuffle_split(const Dataset& ds, double frac, std::uint64_t seed) {
    if (frac <= 0.0 || frac >= 1.0) throw NumericError("shuffle_split: frac must be in (0,1)");
    const std::size_t n = ds.n();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Prng rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
        std::swap(order[i - 1], order[j]);
    }
    const std::size_t n1 = std::max<std::size_t>(
        1, std::min(n - 1, static_cast<std::size_t>(std::lround(frac * n))));

    auto take = [&](std::size_t begin, std::size_t end, const char* tag) {
        Dataset part;
        part.name = ds.name + tag;
        part.seed = seed;
        part.x = Matrix(ds.x.rows, end - begin);
        part.y.resize(end - begin);
        for (std::size_t k = begin; k < end; ++k) {
            for (std::size_t i = 0; i < ds.x.rows; ++i) part.x(i, k - begin) = ds.x(i, order[k]);
            part.y[k - begin] = ds.y[order[k]];
        }
        return part;
    };
    return {take(0, n1, "-train"), take(n1, n, "-test")};
}

}  // namespace data
}  // namespace gatelab
