#include "hgd/pfaffian.hpp"

#include <cmath>
#include <sstream>

namespace hgd {

namespace {

void require_nonsingular(const PfaffianSystem& system, const Vector& x) {
    if (system.singular && system.singular(x)) {
        std::ostringstream msg;
        msg << "point on singular locus: [" << x.transpose() << "]";
        throw SingularPoint(msg.str());
    }
}

void require_clearance(const PfaffianSystem& system, const Vector& x, double clearance) {
    if (system.singular_distance) {
        // distance below the clearance subsumes the locus predicate
        if (system.singular_distance(x) < clearance) {
            throw SingularPath("path sample within singular clearance");
        }
    } else if (system.singular && system.singular(x)) {
        throw SingularPath("path sample on singular locus");
    }
}

// A(x) = sum_i d_i P_i(x), the generator of dF/dtau along direction d.
void directional_matrix(const PfaffianSystem& system, const Vector& x, const Vector& d,
                        Matrix& out) {
    if (system.directional) {
        system.directional(x, d, out);
        return;
    }
    const std::vector<Matrix> mats = system.matrices(x);
    out.setZero();
    for (int i = 0; i < system.dim; ++i) {
        out += d(i) * mats[i];
    }
}

// RK4 core, specialized on the (small) holonomic rank so the inner matvecs
// compile to fixed-size arithmetic.
template <int N>
Vector propagate_core(const PfaffianSystem& system, const StateVector& state,
                      const Vector& d, int steps, const IntegratorConfig& cfg) {
    using Mat = Eigen::Matrix<double, N, N>;
    using Vec = Eigen::Matrix<double, N, 1>;

    const int t = system.rank;
    const double h = 1.0 / steps;

    Matrix fill_buf(t, t);
    Mat a0(t, t), am(t, t), a1(t, t);
    Vec k1(t), k2(t), k3(t), k4(t), tmp(t);
    Vector x(state.point.size());

    auto generator = [&](double tau, Mat& out) {
        x.noalias() = state.point + tau * d;
        require_clearance(system, x, cfg.singular_clearance);
        directional_matrix(system, x, d, fill_buf);
        out = fill_buf;
    };

    Vec f = state.F;
    generator(0.0, a1);  // carried over as the start matrix of each substep
    for (int k = 0; k < steps; ++k) {
        const double tau = k * h;
        a0.swap(a1);
        generator(tau + 0.5 * h, am);
        generator(tau + h, a1);

        k1.noalias() = a0 * f;
        tmp.noalias() = f + (0.5 * h) * k1;
        k2.noalias() = am * tmp;
        tmp.noalias() = f + (0.5 * h) * k2;
        k3.noalias() = am * tmp;
        tmp.noalias() = f + h * k3;
        k4.noalias() = a1 * tmp;
        f += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return f;
}

}  // namespace

StateVector propagate(const PfaffianSystem& system, const StateVector& state,
                      const Vector& target, const IntegratorConfig& cfg) {
    const Vector d = target - state.point;
    const double length = d.norm();
    if (length == 0.0) {
        return state;
    }
    const int steps = std::max(cfg.min_substeps,
                               static_cast<int>(std::ceil(length * cfg.substeps_per_unit)));

    Vector f;
    switch (system.rank) {
        case 2: f = propagate_core<2>(system, state, d, steps, cfg); break;
        case 3: f = propagate_core<3>(system, state, d, steps, cfg); break;
        case 4: f = propagate_core<4>(system, state, d, steps, cfg); break;
        default: f = propagate_core<Eigen::Dynamic>(system, state, d, steps, cfg); break;
    }
    return {target, f};
}

Vector gradient(const PfaffianSystem& system, const StateVector& state) {
    require_nonsingular(system, state.point);
    const std::vector<Matrix> mats = system.matrices(state.point);
    Vector g(system.dim);
    for (int i = 0; i < system.dim; ++i) {
        g(i) = (mats[i] * state.F)(0);
    }
    return g;
}

Matrix matrix_derivative(const PfaffianSystem& system, const Vector& x, int i, int j) {
    if (system.matrix_derivatives) {
        return system.matrix_derivatives(x, i, j);
    }
    const double h = 1e-5 * std::max(1.0, x.norm());
    Vector xp = x;
    Vector xm = x;
    xp(j) += h;
    xm(j) -= h;
    return (system.matrices(xp)[i] - system.matrices(xm)[i]) / (2.0 * h);
}

Matrix hessian(const PfaffianSystem& system, const StateVector& state) {
    require_nonsingular(system, state.point);
    const std::vector<Matrix> mats = system.matrices(state.point);
    Matrix h(system.dim, system.dim);
    for (int i = 0; i < system.dim; ++i) {
        for (int j = 0; j < system.dim; ++j) {
            const Matrix dij = matrix_derivative(system, state.point, i, j);
            h(i, j) = ((dij + mats[i] * mats[j]) * state.F)(0);
        }
    }
    return 0.5 * (h + h.transpose());
}

bool check_integrability(const PfaffianSystem& system,
                         const std::vector<Vector>& points, double tol) {
    for (const Vector& x : points) {
        require_nonsingular(system, x);
        const std::vector<Matrix> mats = system.matrices(x);
        for (int i = 0; i < system.dim; ++i) {
            for (int j = i + 1; j < system.dim; ++j) {
                const Matrix lhs = matrix_derivative(system, x, j, i) + mats[j] * mats[i];
                const Matrix rhs = matrix_derivative(system, x, i, j) + mats[i] * mats[j];
                if ((lhs - rhs).cwiseAbs().maxCoeff() > tol) {
                    return false;
                }
            }
        }
    }
    return true;
}

}  // namespace hgd
