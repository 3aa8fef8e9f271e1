#include "hgd/vonmises.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace hgd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSingularKappa = 1e-12;

// 2*pi*I0(kappa) and 2*pi*I1(kappa) by composite trapezoid on the periodic
// integrands exp(kappa cos t) and cos t exp(kappa cos t).
void radial_quadrature(double kappa, double& f, double& f_kappa) {
    f = 0.0;
    f_kappa = 0.0;
    const double h = kTwoPi / kQuadNodes;
    for (int j = 0; j < kQuadNodes; ++j) {
        const double t = j * h;
        const double c = std::cos(t);
        const double e = std::exp(kappa * c);
        f += e;
        f_kappa += c * e;
    }
    f *= h;
    f_kappa *= h;
}

}  // namespace

double normalize_angle(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0.0) y += kTwoPi;
    return y;
}

VmParams VmParams::from_polar(double kappa, double mu) {
    return {kappa * std::cos(mu), kappa * std::sin(mu)};
}

double VmParams::kappa() const { return std::hypot(theta1, theta2); }

double VmParams::mu() const { return normalize_angle(std::atan2(theta2, theta1)); }

Vector VmParams::theta() const {
    Vector v(2);
    v << theta1, theta2;
    return v;
}

double bessel_i0(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int m = 1; m <= 200; ++m) {
        term *= q / (static_cast<double>(m) * m);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

double bessel_i1(double x) {
    const double q = 0.25 * x * x;
    double term = 0.5 * x;
    double sum = term;
    for (int m = 1; m <= 200; ++m) {
        term *= q / (static_cast<double>(m) * (m + 1));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

SufficientStats sufficient_stats(const AngleData& data) {
    if (data.angles.empty()) {
        throw EmptyData("no angle observations");
    }
    double c = 0.0;
    double s = 0.0;
    for (double a : data.angles) {
        c += std::cos(a);
        s += std::sin(a);
    }
    const double n = static_cast<double>(data.angles.size());
    return {c / n, s / n, data.n()};
}

double vm_objective_oracle(const VmParams& theta, const SufficientStats& stats) {
    double integral = 0.0;
    const double h = kTwoPi / kQuadNodes;
    for (int j = 0; j < kQuadNodes; ++j) {
        const double t = j * h;
        integral += std::exp(theta.theta1 * std::cos(t) + theta.theta2 * std::sin(t));
    }
    integral *= h;
    return std::exp(-stats.c_bar * theta.theta1 - stats.s_bar * theta.theta2) * integral;
}

StateVector vm_initial_state(const VmParams& theta0, const SufficientStats& stats) {
    const double kappa = theta0.kappa();
    if (kappa < kSingularKappa) {
        throw SingularPoint("von Mises system is singular at theta = 0");
    }
    double f, f_kappa;
    radial_quadrature(kappa, f, f_kappa);
    const double gauge =
        std::exp(-stats.c_bar * theta0.theta1 - stats.s_bar * theta0.theta2);
    StateVector state;
    state.point = theta0.theta();
    state.F = Vector(2);
    state.F << gauge * f, gauge * f_kappa;
    return state;
}

PfaffianSystem vm_pfaffian_system(const SufficientStats& stats) {
    const double cb = stats.c_bar;
    const double sb = stats.s_bar;

    PfaffianSystem system;
    system.dim = 2;
    system.rank = 2;

    system.matrices = [cb, sb](const Vector& x) {
        const double kappa = x.norm();
        Matrix radial(2, 2);
        radial << 0.0, 1.0, 1.0, -1.0 / kappa;
        const double m[2] = {cb, sb};
        std::vector<Matrix> mats;
        mats.reserve(2);
        for (int i = 0; i < 2; ++i) {
            mats.push_back((x(i) / kappa) * radial - m[i] * Matrix::Identity(2, 2));
        }
        return mats;
    };

    system.matrix_derivatives = [](const Vector& x, int i, int j) {
        const double kappa = x.norm();
        const double k3 = kappa * kappa * kappa;
        Matrix radial(2, 2);
        radial << 0.0, 1.0, 1.0, -1.0 / kappa;
        // d/dtheta_j of (theta_i/kappa) and of the -1/kappa entry.
        const double du = (i == j ? 1.0 / kappa : 0.0) - x(i) * x(j) / k3;
        Matrix d = du * radial;
        d(1, 1) += (x(i) / kappa) * (x(j) / k3);
        return d;
    };

    // sum_i d_i Q_i = (d.theta/kappa) * [[0,1],[1,-1/kappa]] - (m.d) * I,
    // written without temporaries for the integrator's hot path.
    system.directional = [cb, sb](const Vector& x, const Vector& d, Matrix& out) {
        const double kappa = x.norm();
        const double radial = (x(0) * d(0) + x(1) * d(1)) / kappa;
        const double md = cb * d(0) + sb * d(1);
        out(0, 0) = -md;
        out(0, 1) = radial;
        out(1, 0) = radial;
        out(1, 1) = -radial / kappa - md;
    };

    system.singular = [](const Vector& x) { return x.norm() < kSingularKappa; };
    system.singular_distance = [](const Vector& x) { return x.norm(); };
    return system;
}

AngleData vm_sample(double kappa, double mu, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    AngleData data;
    data.angles.reserve(n);

    if (kappa < 1e-8) {
        for (int i = 0; i < n; ++i) {
            data.angles.push_back(unif(rng) * kTwoPi);
        }
        return data;
    }

    // Best & Fisher (1979) wrapped-Cauchy envelope.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);

    for (int i = 0; i < n; ++i) {
        double f;
        for (;;) {
            const double u1 = unif(rng);
            const double u2 = unif(rng);
            const double z = std::cos(std::numbers::pi * u1);
            f = (1.0 + r * z) / (r + z);
            const double c = kappa * (r - f);
            if (c * (2.0 - c) - u2 > 0.0) break;
            if (std::log(c / u2) + 1.0 - c >= 0.0) break;
        }
        const double u3 = unif(rng);
        const double sign = (u3 < 0.5) ? -1.0 : 1.0;
        data.angles.push_back(normalize_angle(mu + sign * std::acos(f)));
    }
    return data;
}

OptResult mle_direct_newton(const SufficientStats& stats, const VmParams& x0,
                            const OptimizerConfig& cfg) {
    const double m[2] = {stats.c_bar, stats.s_bar};

    // L, grad L, hess L at theta, everything from fresh quadrature values of
    // 2*pi*I0 and 2*pi*I1 plus the radial Bessel relation f'' = f - f'/kappa.
    auto evaluate = [&](const Vector& theta, double& L, Vector& g, Matrix& h) {
        const double kappa = theta.norm();
        double f, fk;
        radial_quadrature(kappa, f, fk);
        const double fkk = f - fk / kappa;
        const double w = std::exp(-m[0] * theta(0) - m[1] * theta(1));
        const double k3 = kappa * kappa * kappa;
        L = w * f;
        g.resize(2);
        h.resize(2, 2);
        for (int i = 0; i < 2; ++i) {
            const double ui = theta(i) / kappa;
            g(i) = w * (-m[i] * f + ui * fk);
            for (int j = 0; j < 2; ++j) {
                const double uj = theta(j) / kappa;
                const double du = (i == j ? 1.0 / kappa : 0.0) - theta(i) * theta(j) / k3;
                h(i, j) = w * (m[i] * m[j] * f - m[i] * uj * fk - m[j] * ui * fk +
                               du * fk + ui * uj * fkk);
            }
        }
    };

    Vector x = x0.theta();
    if (x.norm() < 1e-6) {
        throw SingularPoint("direct Newton needs a nonzero starting point");
    }

    double L;
    Vector g;
    Matrix h;
    evaluate(x, L, g, h);

    OptResult result;
    result.status = Status::MaxItersExceeded;
    TraceRecord rec{0, x, L, g.norm(), 0.0, L, true, 0.0};
    result.trace.push_back(rec);

    for (int k = 0; k < cfg.max_iters; ++k) {
        if (g.norm() <= cfg.grad_tol) {
            result.status = Status::Converged;
            break;
        }
        const Vector d = newton_direction(g, h, cfg.damping);
        const Vector next = x + d;
        if (next.norm() < 1e-6) {
            result.status = Status::Stalled;
            break;
        }
        x = next;
        evaluate(x, L, g, h);
        result.trace.push_back(TraceRecord{k + 1, x, L, g.norm(), 1.0, L, true, d.norm()});
        result.iterations = k + 1;
        if (d.norm() <= cfg.step_tol) {
            result.status = Status::Converged;
            break;
        }
    }
    if (g.norm() <= cfg.grad_tol) {
        result.status = Status::Converged;
    }

    result.x = x;
    result.F = Vector(1);
    result.F << L;
    return result;
}

AngleData read_angle_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open angle file: " + path);
    }
    AngleData data;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        data.angles.push_back(normalize_angle(std::stod(line.substr(first))));
    }
    return data;
}

void write_angle_file(const std::string& path, const AngleData& data,
                      const std::string& comment) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write angle file: " + path);
    }
    if (!comment.empty()) {
        out << "# " << comment << "\n";
    }
    out.precision(17);
    for (double a : data.angles) {
        out << a << "\n";
    }
}

}  // namespace hgd
