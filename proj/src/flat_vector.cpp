#include "mlbfgs/flat_vector.hpp"

#include <cmath>
#include <utility>

#include "mlbfgs/errors.hpp"

namespace mlbfgs {

FlatVector::FlatVector(std::vector<double> values) : values_(std::move(values)) {
    if (!all_finite()) {
        throw std::invalid_argument("FlatVector: non-finite entry");
    }
}

void check_same_dim(const FlatVector& a, const FlatVector& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatchError(std::string(what) + ": dimensions " +
                                     std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
    }
}

void FlatVector::add_scaled(const FlatVector& other, double scale) {
    check_same_dim(*this, other, "add_scaled");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += scale * other.values_[i];
    }
}

void FlatVector::scale(double a) {
    for (double& v : values_) v *= a;
}

void FlatVector::fill(double v) {
    for (double& x : values_) x = v;
}

void FlatVector::blend(const FlatVector& other, double beta) {
    check_same_dim(*this, other, "blend");
    const double w = 1.0 - beta;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] = beta * values_[i] + w * other.values_[i];
    }
}

bool FlatVector::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double dot(const FlatVector& a, const FlatVector& b) {
    check_same_dim(a, b, "dot");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
    return acc;
}

double squared_norm(const FlatVector& v) { return dot(v, v); }

double norm(const FlatVector& v) { return std::sqrt(squared_norm(v)); }

FlatVector operator+(FlatVector a, const FlatVector& b) {
    a.add(b);
    return a;
}

FlatVector operator-(FlatVector a, const FlatVector& b) {
    a.sub(b);
    return a;
}

FlatVector operator*(double a, FlatVector v) {
    v.scale(a);
    return v;
}

}  // namespace mlbfgs
