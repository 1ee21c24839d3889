#ifndef GATELAB_DATA_HPP
#define GATELAB_DATA_HPP

#include <cstdint>
#include <string>

#include "gatelab/linalg.hpp"

namespace gatelab {
namespace data {

struct Dataset {
    Matrix x;  // d_in x n
    Vec y;     // n labels/targets
    std::string name;
    std::uint64_t seed = 0;

    std::size_t n() const { return x.cols; }
    std::size_t d_in() const { return x.rows; }
    Vec input(std::size_t s) const;
};

// x_s = 1 for all s, y_s ~ unif[-1, 1]; the rank-1 worst case
Dataset gen_experiment1(int n, std::uint64_t seed);

// x_s ~ unif([-1,1]^2), y_s ~ unif[-1, 1]
Dataset gen_experiment2(int n, std::uint64_t seed);

// two Gaussians in d_in dimensions with +-1 labels; the synthetic
// stand-in for the generalization comparisons
Dataset gen_two_gaussians(int n, int d_in, double separation, std::uint64_t seed);

// numeric CSV with d_in feature columns plus one label column; a
// non-numeric first line is treated as a header
Dataset load_csv(const std::string& path, int d_in);
void save_csv(const std::string& path, const Dataset& ds);

// IDX image/label pair filtered to two classes: class_a -> -1,
// class_b -> +1, pixels scaled to [0,1], first `limit` examples kept
// per class
Dataset load_idx_binary_mnist(const std::string& images_path, const std::string& labels_path,
                              int class_a, int class_b, int limit);

// seeded shuffle then split; first part has round(frac * n) examples
std::pair<Dataset, Dataset> shuffle_split(const Dataset& ds, double frac, std::uint64_t seed);

}  // namespace data
}  // namespace gatelab

#endif
