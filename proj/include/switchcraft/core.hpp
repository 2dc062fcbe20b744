#ifndef SWITCHCRAFT_CORE_HPP
#define SWITCHCRAFT_CORE_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Vec14 = Eigen::Matrix<double, 14, 1>;
using Mat3 = Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 2.0 * pi;
inline constexpr double day_s = 86400.0;

// physical constants (km, s)
inline constexpr double astronomical_unit_km = 149597870.7;
inline constexpr double sun_mu_km3s2 = 1.32712440018e11;
inline constexpr double earth_mu_km3s2 = 398600.0;
inline constexpr double earth_radius_km = 6378.0;
inline constexpr double g0_default_ms2 = 9.8065;

// thrown when the equations of motion leave their domain of validity
// (p <= 0, w <= 0, m <= 0) during an integration
class DomainError : public std::runtime_error {
public:
    DomainError(const std::string& what, double t) : std::runtime_error(what), t_fail(t) {}
    double t_fail;
};

class SolveError : public std::runtime_error {
public:
    explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

inline double wrap_two_pi(double angle) {
    double a = std::fmod(angle, two_pi);
    if (a < 0.0) a += two_pi;
    return a;
}

}  // namespace sc

#endif
