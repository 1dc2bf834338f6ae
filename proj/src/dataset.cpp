#include "mlbfgs/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

void Dataset::validate() const {
    if (n == 0) throw std::invalid_argument("Dataset: no samples");
    if (features.size() != n * m) throw std::invalid_argument("Dataset: feature size mismatch");
    if (labels.size() != n) throw std::invalid_argument("Dataset: label count mismatch");
    for (double f : features) {
        if (!std::isfinite(f)) throw std::invalid_argument("Dataset: non-finite feature");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= classes) {
            throw std::invalid_argument("Dataset: label out of range");
        }
    }
}

Dataset synth_blobs(RngStream& rng, std::size_t n, std::size_t m, std::size_t classes,
                    double separation) {
    if (classes < 2 || n < classes) {
        throw std::invalid_argument("synth_blobs: need n >= classes >= 2");
    }
    // Centroids on orthogonal axes scaled so any two sit `separation` apart.
    // When classes exceed the feature dimension, fall back to random unit
    // directions (distances then only approximate the request).
    std::vector<std::vector<double>> means(classes, std::vector<double>(m, 0.0));
    const double scale = separation / std::sqrt(2.0);
    for (std::size_t c = 0; c < classes; ++c) {
        if (c < m) {
            means[c][c] = scale;
        } else {
            double nrm = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                means[c][j] = rng.next_gaussian();
                nrm += means[c][j] * means[c][j];
            }
            nrm = std::sqrt(nrm);
            for (std::size_t j = 0; j < m; ++j) means[c][j] *= scale / (nrm > 0 ? nrm : 1.0);
        }
    }

    Dataset ds;
    ds.n = n;
    ds.m = m;
    ds.classes = classes;
    ds.features.resize(n * m);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        ds.labels[i] = static_cast<int>(c);
        for (std::size_t j = 0; j < m; ++j) {
            ds.features[i * m + j] = means[c][j] + rng.next_gaussian();
        }
    }
    ds.validate();
    return ds;
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);

    Dataset ds;
    std::string line;
    long line_no = 0;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 2) {
            throw ParseError(line_no, "expected at least one feature and a label");
        }
        if (ds.n == 0) {
            ds.m = cells.size() - 1;
        } else if (cells.size() - 1 != ds.m) {
            throw ParseError(line_no, "expected " + std::to_string(ds.m + 1) + " columns, got " +
                                          std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < ds.m; ++j) {
            try {
                std::size_t used = 0;
                double v = std::stod(cells[j], &used);
                if (used != cells[j].size() || !std::isfinite(v)) {
                    throw std::invalid_argument("bad");
                }
                ds.features.push_back(v);
            } catch (const std::exception&) {
                throw ParseError(line_no, "malformed feature value '" + cells[j] + "'");
            }
        }
        try {
            std::size_t used = 0;
            int y = std::stoi(cells.back(), &used);
            if (used != cells.back().size() || y < 0) throw std::invalid_argument("bad");
            ds.labels.push_back(y);
            max_label = std::max(max_label, y);
        } catch (const std::exception&) {
            throw ParseError(line_no, "malformed label '" + cells.back() + "'");
        }
        ++ds.n;
    }
    if (ds.n == 0) throw ParseError(0, "empty dataset file");
    ds.classes = static_cast<std::size_t>(max_label) + 1;
    ds.validate();
    return ds;
}

}  // namespace mlbfgs
