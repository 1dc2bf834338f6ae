#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mlbfgs/rng.hpp"

namespace mlbfgs {

/// In-memory classification dataset: n rows of m features plus an integer
/// label in [0, classes).
struct Dataset {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t classes = 0;
    std::vector<double> features;  // row-major, n * m
    std::vector<int> labels;

    const double* row(std::size_t i) const { return features.data() + i * m; }
    void validate() const;
};

/// k Gaussian clusters with unit within-cluster spread and centroids at
/// pairwise distance `separation`; labels assigned round-robin so classes are
/// balanced. Deterministic given the stream.
Dataset synth_blobs(RngStream& rng, std::size_t n, std::size_t m, std::size_t classes,
                    double separation);

/// Headerless CSV: m feature columns followed by one integer label column.
/// Malformed rows raise ParseError carrying the 1-based line number.
Dataset load_dataset_csv(const std::string& path);

}  // namespace mlbfgs
