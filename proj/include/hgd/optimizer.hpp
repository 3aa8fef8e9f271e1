#ifndef HGD_OPTIMIZER_HPP
#define HGD_OPTIMIZER_HPP

#include "hgd/pfaffian.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hgd {

struct SingularHessian : std::runtime_error {
    explicit SingularHessian(const std::string& what) : std::runtime_error(what) {}
};

struct LineSearchFailed : std::runtime_error {
    explicit LineSearchFailed(const std::string& what) : std::runtime_error(what) {}
};

struct Constraint {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> grad;
};

/// Differentiable constraints: feasible iff every inequality value is <= 0
/// and every equality value is 0.
struct ConstraintSet {
    std::vector<Constraint> inequalities;
    std::vector<Constraint> equalities;

    bool empty() const { return inequalities.empty() && equalities.empty(); }
    bool feasible(const Vector& x, double tol = 0.0) const;
};

struct PenaltyConfig {
    double rho = 10.0;      ///< penalty weight
    double xi = 0.1;        ///< Armijo parameter, in (0,1)
    double shrink = 0.5;    ///< backtracking factor, in (0,1)
    double alpha_min = 1e-10;
};

struct OptimizerConfig {
    int max_iters = 100;
    double grad_tol = 1e-8;
    double step_tol = 1e-10;
    double damping = 0.0;  ///< Levenberg shift added when the Newton solve fails
    IntegratorConfig integrator;
};

struct TraceRecord {
    int k = 0;
    Vector x;
    double f = 0.0;          ///< objective value F(0)
    double grad_norm = 0.0;
    double alpha = 0.0;      ///< accepted step size (0 for the initial record)
    double penalty = 0.0;    ///< exact penalty value (equals f when unconstrained)
    bool feasible = true;
    double direction_norm = 0.0;
};

using IterationTrace = std::vector<TraceRecord>;

enum class Status {
    Converged,
    MaxItersExceeded,
    LineSearchFailed,
    Stalled,  ///< stopped next to the singular locus
};

const char* to_string(Status status);

struct OptResult {
    Vector x;
    Vector F;
    IterationTrace trace;
    Status status = Status::Converged;
    int iterations = 0;
};

/// Solves (hess + damping I) d = -grad. A failed solve escalates the damping
/// by 10x up to four times before throwing SingularHessian.
Vector newton_direction(const Vector& grad, const Matrix& hess, double damping);

/// P(x; rho) = f(x) + rho * (sum max(0, g_i(x)) + sum |h_j(x)|).
double exact_penalty(double f_val, const Vector& x, const ConstraintSet& cons, double rho);

/// First-order model of exact_penalty at x + d: constraints and objective are
/// replaced by their linearizations at x.
double linearized_penalty(double f_val, const Vector& grad, const Vector& x,
                          const Vector& d, const ConstraintSet& cons, double rho);

struct LineSearchResult {
    double alpha = 0.0;
    StateVector state;
};

/// Backtracking line search on the exact penalty, starting from alpha = 1.
/// Candidate objective values come from Pfaffian propagation only; a
/// SingularPath during a trial step shrinks alpha and retries.
LineSearchResult armijo_backtrack(const PfaffianSystem& system, const StateVector& state,
                                  const Vector& d, const ConstraintSet& cons,
                                  const PenaltyConfig& pcfg, const IntegratorConfig& icfg);

/// Unconstrained holonomic gradient descent: full Newton steps, with F always
/// obtained by propagation from the supplied initial state (x0, F0).
OptResult hgd_minimize(const PfaffianSystem& system, const Vector& x0, const Vector& F0,
                       const OptimizerConfig& cfg);

/// Constrained variant: the Newton direction is computed from the unpenalized
/// objective exactly as in hgd_minimize, and every step passes through the
/// exact-penalty Armijo backtracking.
OptResult chgd_minimize(const PfaffianSystem& system, const Vector& x0, const Vector& F0,
                        const ConstraintSet& cons, const OptimizerConfig& cfg,
                        const PenaltyConfig& pcfg);

}  // namespace hgd

#endif  // HGD_OPTIMIZER_HPP
