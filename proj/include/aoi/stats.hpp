// Replication statistics: sample mean and Student-t confidence halfwidth.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

namespace aoi {

/// Two-sided 95% critical value t_{0.975, dof}.
inline double student_t_975(int dof) {
    if (dof < 1) throw std::domain_error("student_t_975: dof must be >= 1");
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

struct MeanCi {
    double mean = 0.0;
    double halfwidth = 0.0;  ///< 95%, Student-t with n-1 dof
};

/// Mean and 95% halfwidth of independent replication means. A single
/// sample carries no spread information, so its halfwidth is infinite.
inline MeanCi mean_ci_95(const std::vector<double>& samples) {
    if (samples.empty()) throw std::domain_error("mean_ci_95: no samples");
    MeanCi r;
    double sum = 0.0;
    for (double v : samples) sum += v;
    const auto n = static_cast<double>(samples.size());
    r.mean = sum / n;
    if (samples.size() == 1) {
        r.halfwidth = std::numeric_limits<double>::infinity();
        return r;
    }
    double ss = 0.0;
    for (double v : samples) ss += (v - r.mean) * (v - r.mean);
    const double stddev = std::sqrt(ss / (n - 1.0));
    r.halfwidth = student_t_975(static_cast<int>(samples.size()) - 1) * stddev / std::sqrt(n);
    return r;
}

}  // namespace aoi
