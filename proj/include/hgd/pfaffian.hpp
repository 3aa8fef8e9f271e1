#ifndef HGD_PFAFFIAN_HPP
#define HGD_PFAFFIAN_HPP

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace hgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SingularPoint : std::runtime_error {
    explicit SingularPoint(const std::string& what) : std::runtime_error(what) {}
};

struct SingularPath : std::runtime_error {
    explicit SingularPath(const std::string& what) : std::runtime_error(what) {}
};

/// A holonomic objective described by its Pfaffian system dF/dx_i = P_i(x) F,
/// where F = (f, s_2 f, ..., s_t f) collects the function and its basis
/// derivatives. The matrices are rational data supplied by a model; the
/// library never evaluates f itself.
struct PfaffianSystem {
    int dim = 0;   ///< number of variables n
    int rank = 0;  ///< holonomic rank t, the length of F

    /// All n coefficient matrices at a point: [P_1(x), ..., P_n(x)], each t x t.
    std::function<std::vector<Matrix>(const Vector&)> matrices;

    /// Optional analytic dP_i/dx_j. When absent, central finite differences
    /// of `matrices` are used.
    std::function<Matrix(const Vector&, int, int)> matrix_derivatives;

    /// Optional allocation-free evaluation of sum_i d_i P_i(x) into out
    /// (preallocated t x t). The integrator's hot path uses this when
    /// present instead of assembling the sum from `matrices`.
    std::function<void(const Vector&, const Vector&, Matrix&)> directional;

    /// True on the singular locus where the matrices are undefined or unbounded.
    std::function<bool(const Vector&)> singular;

    /// Optional distance to the singular locus; enables the clearance check
    /// during propagation. When absent only the predicate is consulted.
    std::function<double(const Vector&)> singular_distance;
};

/// A point paired with the propagated vector F(point). F(0) is the
/// objective value.
struct StateVector {
    Vector point;
    Vector F;
};

struct IntegratorConfig {
    int substeps_per_unit = 200;  ///< fixed RK4 substeps per unit path length
    int min_substeps = 20;
    double singular_clearance = 1e-3;
};

/// Propagate F from state.point to target along the straight segment by
/// classical RK4 on dF/dtau = (sum_i d_i P_i(x(tau))) F. Throws SingularPath
/// if the segment passes too close to the singular locus.
StateVector propagate(const PfaffianSystem& system, const StateVector& state,
                      const Vector& target, const IntegratorConfig& cfg);

/// Gradient extraction: g_i = (P_i(x) F)_1. No evaluation of f.
Vector gradient(const PfaffianSystem& system, const StateVector& state);

/// Hessian extraction: H_ij = ((dP_i/dx_j + P_i P_j) F)_1, symmetrized.
Matrix hessian(const PfaffianSystem& system, const StateVector& state);

/// dP_i/dx_j at x: analytic when the system supplies it, otherwise central
/// finite differences with step 1e-5 * max(1, ||x||).
Matrix matrix_derivative(const PfaffianSystem& system, const Vector& x, int i, int j);

/// Checks dP_j/dx_i + P_j P_i == dP_i/dx_j + P_i P_j entrywise within tol at
/// every point. Equivalent to Hessian symmetry of the underlying objective.
bool check_integrability(const PfaffianSystem& system,
                         const std::vector<Vector>& points, double tol);

}  // namespace hgd

#endif  // HGD_PFAFFIAN_HPP
