#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "slicescope/evaluator.hpp"
#include "slicescope/predicate.hpp"

namespace slicescope {

enum class Direction { Lower, Higher, None };
enum class DirectionFilter { Lower, Higher, Any };

// Regularized incomplete beta I_x(a, b), absolute accuracy ~1e-14.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided Student-t tail probability 2*(1 - F(|t|; df)).
double student_t_two_sided_p(double t, int df);

struct TStat {
    enum class Status { Ok, Degenerate, Untestable };
    Status status = Status::Untestable;
    double mean = 0;
    double sd = 0;      // sample standard deviation, divisor n-1
    double t = 0;       // valid when status == Ok
    int usable = 0;
};

// t = mean / sd over bootstrap replicate differences. Each replicate
// reweights the whole dataset, so the replicate spread directly estimates the
// standard error of the observed difference. Degenerate when every delta is
// identical (sd = 0); untestable when fewer than two deltas remain.
TStat t_statistic(std::span<const double> deltas);

struct SliceStat {
    Predicate predicate;
    uint64_t size = 0;
    std::optional<double> slice_metric;
    std::optional<double> ref_metric;
    std::optional<double> point_delta;
    double mean = 0;
    double sd = 0;
    int usable_replicates = 0;
    int dropped_replicates = 0;
    std::optional<double> t;       // absent when degenerate or untestable
    double p = 1.0;
    Direction direction = Direction::None;
    bool significant = false;      // p < alpha and direction passes the filter
    bool testable = false;
    int iteration = 0;             // search round that evaluated the slice
};

// Hypothesis test for one evaluated slice. A constant nonzero delta across
// all replicates maps to p = 0, a constant zero to p = 1.
SliceStat classify(const SliceEvaluation& eval, double alpha, DirectionFilter wanted);

}  // namespace slicescope
