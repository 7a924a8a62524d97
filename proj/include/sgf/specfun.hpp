#pragma once

#include "sgf/core.hpp"

namespace sgf {

/// Bessel function of the first kind, order 0.
double bessel_j0(double x);

/// Bessel function of the first kind, order 1.
double bessel_j1(double x);

/// Returns w with w*w = 1/d. Uses the principal square root of d, so the
/// argument of w lies in [-pi/2, pi/2). Throws SingularError for d == 0.
Complex principal_inv_sqrt_det(Complex d);

/// Continuous continuation of d^{-1/2} along a path of determinants.
/// The first call returns the principal value; later calls pick the sign
/// closest to the previous value.
class BranchTracker {
public:
    Complex next(Complex d);
    bool started() const { return started_; }
    int flips() const { return flips_; }

private:
    Complex last_{};
    bool started_ = false;
    int flips_ = 0;
};

}  // namespace sgf
