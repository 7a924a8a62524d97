#include "sgf/specfun.hpp"

#include <cmath>

namespace sgf {

namespace {

constexpr double series_limit = 16.0;

// sum_k (-1)^k (x/2)^{2k+n} / (k! (k+n)!) for n = 0, 1
long double bessel_series(int n, long double x)
{
    const long double q = -0.25L * x * x;
    long double term = (n == 0) ? 1.0L : 0.5L * x;
    long double sum = term;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * static_cast<long double>(k + n));
        sum += term;
        if (std::fabs(term) < 1e-20L * std::fabs(sum) && k > 4) break;
    }
    return sum;
}

// Hankel asymptotic expansion, truncated at the smallest term.
double bessel_asymptotic(int n, double x)
{
    const double mu = 4.0 * n * n;
    double p = 1.0, q = 0.0;
    double term = 1.0;
    double last = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (k * 8.0 * x);
        if (std::fabs(next) > std::fabs(last)) break;
        term = next;
        last = next;
        switch (k % 4) {
            case 1: q += term; break;
            case 2: p -= term; break;
            case 3: q -= term; break;
            case 0: p += term; break;
        }
        if (std::fabs(term) < 1e-17) break;
    }
    const double chi = x - (0.5 * n + 0.25) * pi;
    return std::sqrt(2.0 / (pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

}  // namespace

double bessel_j0(double x)
{
    const double ax = std::fabs(x);
    if (ax <= series_limit) return static_cast<double>(bessel_series(0, ax));
    return bessel_asymptotic(0, ax);
}

double bessel_j1(double x)
{
    const double ax = std::fabs(x);
    const double v = (ax <= series_limit) ? static_cast<double>(bessel_series(1, ax))
                                          : bessel_asymptotic(1, ax);
    return x < 0 ? -v : v;
}

Complex principal_inv_sqrt_det(Complex d)
{
    if (d == Complex(0.0, 0.0)) throw SingularError("principal_inv_sqrt_det: zero determinant");
    // avoid the signed-zero side of the branch cut
    if (d.imag() == 0.0) d = Complex(d.real(), 0.0);
    return 1.0 / std::sqrt(d);
}

Complex BranchTracker::next(Complex d)
{
    Complex w = principal_inv_sqrt_det(d);
    if (started_) {
        if (std::abs(w - last_) > std::abs(w + last_)) {
            w = -w;
        }
        if (std::abs(w - principal_inv_sqrt_det(d)) > 0) ++flips_;
    }
    started_ = true;
    last_ = w;
    return w;
}

}  // namespace sgf
