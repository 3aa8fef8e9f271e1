#ifndef HGD_VONMISES_HPP
#define HGD_VONMISES_HPP

#include "hgd/optimizer.hpp"
#include "hgd/pfaffian.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hgd {

struct EmptyData : std::runtime_error {
    explicit EmptyData(const std::string& what) : std::runtime_error(what) {}
};

/// Circular observations in radians, normalized to [0, 2*pi).
struct AngleData {
    std::vector<double> angles;
    int n() const { return static_cast<int>(angles.size()); }
};

/// Sample means of cos and sin; they fully determine the von Mises likelihood.
struct SufficientStats {
    double c_bar = 0.0;
    double s_bar = 0.0;
    int n = 0;
};

/// von Mises parameters, natural (theta1, theta2) or polar (kappa, mu) with
/// theta1 = kappa*cos(mu), theta2 = kappa*sin(mu).
struct VmParams {
    double theta1 = 0.0;
    double theta2 = 0.0;

    static VmParams from_polar(double kappa, double mu);
    double kappa() const;
    double mu() const;  ///< in [0, 2*pi)
    Vector theta() const;
};

/// Number of trapezoid nodes for the periodic quadrature.
inline constexpr int kQuadNodes = 512;

double normalize_angle(double x);  ///< wrap into [0, 2*pi)

/// Modified Bessel functions of the first kind by power series, truncated at
/// machine precision. These back the independent oracle checks.
double bessel_i0(double x);
double bessel_i1(double x);

SufficientStats sufficient_stats(const AngleData& data);

/// The MLE objective L(theta) = exp(-c_bar*theta1 - s_bar*theta2) *
/// integral_0^{2pi} exp(theta1 cos t + theta2 sin t) dt, by trapezoid
/// quadrature. Used only for initialization, the direct-Newton baseline, and
/// tests; never inside the HGD/CHGD iterations.
double vm_objective_oracle(const VmParams& theta, const SufficientStats& stats);

/// Initial state (L(theta0), gauged dL/dkappa) for the rank-2 system below.
StateVector vm_initial_state(const VmParams& theta0, const SufficientStats& stats);

/// The rank-2 Pfaffian system for L in the radial basis (L, gauged df/dkappa):
/// Q_i(theta) = (theta_i/kappa) * [[0,1],[1,-1/kappa]] - m_i * I with
/// m = (c_bar, s_bar). Singular locus: kappa = 0. Analytic matrix derivatives
/// included. See docs/vonmises_pfaffian.md for the derivation.
PfaffianSystem vm_pfaffian_system(const SufficientStats& stats);

/// n i.i.d. draws from the von Mises density via the Best-Fisher
/// wrapped-Cauchy rejection sampler. Deterministic given the seed.
AngleData vm_sample(double kappa, double mu, int n, std::uint64_t seed);

/// Newton-Raphson baseline where L, grad, and Hessian are all recomputed by
/// fresh quadrature at every iterate (no Pfaffian propagation).
OptResult mle_direct_newton(const SufficientStats& stats, const VmParams& x0,
                            const OptimizerConfig& cfg);

/// Plain-text angle file: one radian value per line, '#' lines ignored.
AngleData read_angle_file(const std::string& path);
void write_angle_file(const std::string& path, const AngleData& data,
                      const std::string& comment = "");

}  // namespace hgd

#endif  // HGD_VONMISES_HPP
