#include "slicescope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slicescope {

namespace {

double log_gamma(double x) {
    static const double cof[6] = {76.18009172947146,     -86.50532032941677,
                                  24.01409824083091,     -1.231739572450155,
                                  0.1208650973866179e-2, -0.5395239384953e-5};
    double y = x;
    double tmp = x + 5.5;
    tmp -= (x + 0.5) * std::log(tmp);
    double ser = 1.000000000190015;
    for (int j = 0; j < 6; ++j) ser += cof[j] / ++y;
    return -tmp + std::log(2.5066282746310005 * ser / x);
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr double kTiny = 1e-300;
    constexpr double kEps = 1e-15;
    constexpr int kMaxIter = 500;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) {
        throw std::invalid_argument("incomplete beta needs a > 0 and b > 0");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::invalid_argument("incomplete beta needs x in [0,1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(log_gamma(a + b) - log_gamma(a) - log_gamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int df) {
    if (df < 1) throw std::invalid_argument("student t needs df >= 1");
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    const double nu = df;
    const double p = regularized_incomplete_beta(nu / 2.0, 0.5, nu / (nu + t * t));
    return std::clamp(p, 0.0, 1.0);
}

TStat t_statistic(std::span<const double> deltas) {
    TStat out;
    out.usable = static_cast<int>(deltas.size());
    if (deltas.size() < 2) {
        out.status = TStat::Status::Untestable;
        return out;
    }
    const auto [mn, mx] = std::minmax_element(deltas.begin(), deltas.end());
    if (*mn == *mx) {
        // All replicates identical: the sample deviation is exactly zero.
        out.status = TStat::Status::Degenerate;
        out.mean = *mn;
        out.sd = 0.0;
        return out;
    }
    double sum = 0;
    for (double d : deltas) sum += d;
    const double mean = sum / deltas.size();
    double ss = 0;
    for (double d : deltas) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / (deltas.size() - 1));
    out.status = TStat::Status::Ok;
    out.mean = mean;
    out.sd = sd;
    // Every replicate reweights the full dataset, so the replicate spread
    // already estimates the standard error of the observed difference; it is
    // not divided by sqrt(n) the way independent per-example samples would be.
    out.t = mean / sd;
    return out;
}

namespace {

bool direction_allowed(Direction d, DirectionFilter wanted) {
    switch (wanted) {
        case DirectionFilter::Any: return true;
        case DirectionFilter::Lower: return d == Direction::Lower;
        case DirectionFilter::Higher: return d == Direction::Higher;
    }
    return false;
}

}  // namespace

SliceStat classify(const SliceEvaluation& eval, double alpha, DirectionFilter wanted) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("alpha must lie in (0,1)");
    }
    SliceStat s;
    s.predicate = eval.predicate;
    s.size = eval.size;
    s.slice_metric = eval.slice_metric;
    s.ref_metric = eval.ref_metric;
    s.point_delta = eval.point_delta;
    s.dropped_replicates = eval.dropped;

    const TStat ts = t_statistic(eval.deltas);
    s.usable_replicates = ts.usable;
    switch (ts.status) {
        case TStat::Status::Untestable:
            s.testable = false;
            s.p = 1.0;
            return s;
        case TStat::Status::Degenerate:
            s.testable = true;
            s.mean = ts.mean;
            s.sd = 0.0;
            // Constant nonzero difference across independent resamplings is
            // overwhelming evidence; constant zero is none.
            s.p = ts.mean != 0.0 ? 0.0 : 1.0;
            break;
        case TStat::Status::Ok:
            s.testable = true;
            s.mean = ts.mean;
            s.sd = ts.sd;
            s.t = ts.t;
            s.p = student_t_two_sided_p(ts.t, ts.usable - 1);
            break;
    }
    s.direction = s.mean < 0.0   ? Direction::Lower
                  : s.mean > 0.0 ? Direction::Higher
                                 : Direction::None;
    s.significant = s.p < alpha && direction_allowed(s.direction, wanted);
    return s;
}

}  // namespace slicescope
