#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sgf {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Complex = std::complex<double>;
using ComplexAmp = Complex;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class SingularError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, double reached)
        : Error(what + " (reached t=" + std::to_string(reached) + ")"), reached_t(reached) {}
    double reached_t;
};

class RefinementRequired : public Error {
public:
    RefinementRequired(const std::string& what, int suggested_psi, int suggested_t, int suggested_lambda = 0)
        : Error(what), suggested_n_psi(suggested_psi), suggested_n_t(suggested_t), suggested_n_lambda(suggested_lambda)
    {
    }
    int suggested_n_psi;
    int suggested_n_t;
    int suggested_n_lambda;
};

inline Vec2 omega(double psi) { return {std::cos(psi), std::sin(psi)}; }
inline Vec2 omega_perp(double psi) { return {-std::sin(psi), std::cos(psi)}; }
inline Vec2 perp(const Vec2& v) { return {-v.y(), v.x()}; }
inline double det2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline double wrap_angle(double psi)
{
    double w = std::fmod(psi, two_pi);
    if (w < 0) w += two_pi;
    return w;
}

}  // namespace sgf
