#pragma once

#include <cstddef>
#include <vector>

namespace mlbfgs {

/// Dense parameter-space vector of 64-bit scalars. The single carrier type
/// for parameters, gradients and curvature pairs. Dimension is fixed at
/// construction; all pairwise operations require equal dimensions and all
/// entries stay finite.
class FlatVector {
 public:
    FlatVector() = default;
    explicit FlatVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
    explicit FlatVector(std::vector<double> values);

    static FlatVector zeros(std::size_t dim) { return FlatVector(dim, 0.0); }

    std::size_t dim() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    const double* data() const { return values_.data(); }
    double* data() { return values_.data(); }
    const std::vector<double>& values() const { return values_; }

    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    /// this += scale * other
    void add_scaled(const FlatVector& other, double scale);
    void add(const FlatVector& other) { add_scaled(other, 1.0); }
    void sub(const FlatVector& other) { add_scaled(other, -1.0); }
    void scale(double a);
    void fill(double v);

    /// this = beta * this + (1 - beta) * other  (convex blend, one rounding
    /// per entry in this exact evaluation order)
    void blend(const FlatVector& other, double beta);

    bool all_finite() const;

    friend bool operator==(const FlatVector& a, const FlatVector& b) {
        return a.values_ == b.values_;
    }

 private:
    std::vector<double> values_;
};

double dot(const FlatVector& a, const FlatVector& b);
double squared_norm(const FlatVector& v);
double norm(const FlatVector& v);

FlatVector operator+(FlatVector a, const FlatVector& b);
FlatVector operator-(FlatVector a, const FlatVector& b);
FlatVector operator*(double a, FlatVector v);

void check_same_dim(const FlatVector& a, const FlatVector& b, const char* what);

}  // namespace mlbfgs
