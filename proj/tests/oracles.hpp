#pragma once

// Independent reference computations shared by the unit tests.

#include <cmath>
#include <functional>

namespace oracle {

// I_n(z) by direct summation of the power series in long double.
inline long double bessel_i(int n, long double z) {
    n = n < 0 ? -n : n;
    long double term = 1.0L;
    for (int k = 1; k <= n; ++k) term *= (z / 2.0L) / static_cast<long double>(k);
    long double sum = term;
    const long double q = z * z / 4.0L;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (static_cast<long double>(k) * static_cast<long double>(k + n));
        sum += term;
        if (term < 1e-22L * sum) break;
    }
    return sum;
}

// Skellam pmf from the Poisson-difference convolution sum_k P1(k + x) P2(k).
inline long double skellam_pmf(long x, long double l1, long double l2) {
    long double sum = 0.0L;
    for (long k = 0; k < 600; ++k) {
        const long j = k + x;
        if (j < 0) continue;
        const long double lp1 = -l1 + static_cast<long double>(j) * std::log(l1) - std::lgamma(static_cast<long double>(j) + 1.0L);
        const long double lp2 = l2 > 0 ? -l2 + static_cast<long double>(k) * std::log(l2) - std::lgamma(static_cast<long double>(k) + 1.0L)
                                       : (k == 0 ? 0.0L : -INFINITY);
        sum += std::exp(lp1 + lp2);
    }
    return sum;
}

// Composite Simpson rule on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace oracle
