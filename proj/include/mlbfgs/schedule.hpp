#pragma once

namespace mlbfgs {

/// Learning-rate schedules: constant, geometric step decay, cosine annealing
/// down to `min` over `horizon` iterations (clamped past the horizon).
struct Schedule {
    enum class Kind { Constant, Step, Cosine };

    Kind kind = Kind::Constant;
    double base = 0.1;
    double min = 0.0;
    long horizon = 1;
    double factor = 0.1;
    long interval = 1;

    void validate() const;
    double at(long t) const;
};

}  // namespace mlbfgs
