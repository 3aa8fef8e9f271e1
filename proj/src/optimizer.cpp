#include "hgd/optimizer.hpp"

#include <cmath>

namespace hgd {

bool ConstraintSet::feasible(const Vector& x, double tol) const {
    for (const Constraint& c : inequalities) {
        if (c.value(x) > tol) return false;
    }
    for (const Constraint& c : equalities) {
        if (std::abs(c.value(x)) > tol) return false;
    }
    return true;
}

const char* to_string(Status status) {
    switch (status) {
        case Status::Converged: return "converged";
        case Status::MaxItersExceeded: return "max_iters_exceeded";
        case Status::LineSearchFailed: return "line_search_failed";
        case Status::Stalled: return "stalled";
    }
    return "unknown";
}

Vector newton_direction(const Vector& grad, const Matrix& hess, double damping) {
    const int n = static_cast<int>(grad.size());
    double lambda = damping;
    for (int attempt = 0; attempt <= 4; ++attempt) {
        const Matrix a = hess + lambda * Matrix::Identity(n, n);
        Eigen::FullPivLU<Matrix> lu(a);
        if (lu.isInvertible()) {
            Vector d = lu.solve(-grad);
            if (d.allFinite()) {
                return d;
            }
        }
        lambda = (lambda > 0.0) ? 10.0 * lambda
                                : 1e-8 * std::max(1.0, hess.cwiseAbs().maxCoeff());
    }
    throw SingularHessian("Newton system singular after damping retries");
}

double exact_penalty(double f_val, const Vector& x, const ConstraintSet& cons, double rho) {
    double violation = 0.0;
    for (const Constraint& c : cons.inequalities) {
        violation += std::max(0.0, c.value(x));
    }
    for (const Constraint& c : cons.equalities) {
        violation += std::abs(c.value(x));
    }
    return f_val + rho * violation;
}

double linearized_penalty(double f_val, const Vector& grad, const Vector& x,
                          const Vector& d, const ConstraintSet& cons, double rho) {
    double violation = 0.0;
    for (const Constraint& c : cons.inequalities) {
        violation += std::max(0.0, c.value(x) + c.grad(x).dot(d));
    }
    for (const Constraint& c : cons.equalities) {
        violation += std::abs(c.value(x) + c.grad(x).dot(d));
    }
    return f_val + grad.dot(d) + rho * violation;
}

LineSearchResult armijo_backtrack(const PfaffianSystem& system, const StateVector& state,
                                  const Vector& d, const ConstraintSet& cons,
                                  const PenaltyConfig& pcfg, const IntegratorConfig& icfg) {
    const double f0 = state.F(0);
    const Vector g = gradient(system, state);
    const double p0 = exact_penalty(f0, state.point, cons, pcfg.rho);
    const double predicted = linearized_penalty(f0, g, state.point, d, cons, pcfg.rho);
    // A direction whose linear model predicts a penalty increase carries no
    // usable decrease estimate; require plain non-increase in that case so
    // accepted steps keep P monotone.
    const double slope = std::min(0.0, predicted - p0);

    double alpha = 1.0;
    while (alpha >= pcfg.alpha_min) {
        StateVector trial;
        bool ok = true;
        try {
            trial = propagate(system, state, state.point + alpha * d, icfg);
        } catch (const SingularPath&) {
            ok = false;
        }
        if (ok) {
            const double p = exact_penalty(trial.F(0), trial.point, cons, pcfg.rho);
            // tiny relative slack so integration roundoff cannot reject an
            // exactly-satisfied bound
            if (p <= p0 + pcfg.xi * alpha * slope + 1e-12 * (1.0 + std::abs(p0))) {
                return {alpha, trial};
            }
        }
        alpha *= pcfg.shrink;
    }
    throw LineSearchFailed("no admissible step above alpha_min");
}

namespace {

TraceRecord make_record(int k, const StateVector& state, const Vector& g,
                        const ConstraintSet& cons, double rho, double alpha,
                        double direction_norm) {
    TraceRecord rec;
    rec.k = k;
    rec.x = state.point;
    rec.f = state.F(0);
    rec.grad_norm = g.norm();
    rec.alpha = alpha;
    rec.penalty = exact_penalty(state.F(0), state.point, cons, rho);
    rec.feasible = cons.feasible(state.point);
    rec.direction_norm = direction_norm;
    return rec;
}

OptResult minimize_impl(const PfaffianSystem& system, const Vector& x0, const Vector& F0,
                        const ConstraintSet& cons, const OptimizerConfig& cfg,
                        const PenaltyConfig& pcfg, bool constrained) {
    StateVector state{x0, F0};
    Vector g = gradient(system, state);

    OptResult result;
    result.trace.push_back(make_record(0, state, g, cons, pcfg.rho, 0.0, 0.0));
    result.status = Status::MaxItersExceeded;

    for (int k = 0; k < cfg.max_iters; ++k) {
        if (g.norm() <= cfg.grad_tol) {
            result.status = Status::Converged;
            break;
        }

        const Matrix h = hessian(system, state);
        const Vector d = newton_direction(g, h, cfg.damping);

        double alpha = 1.0;
        StateVector next;
        if (constrained) {
            LineSearchResult ls;
            try {
                ls = armijo_backtrack(system, state, d, cons, pcfg, cfg.integrator);
            } catch (const LineSearchFailed&) {
                result.status = Status::LineSearchFailed;
                break;
            }
            alpha = ls.alpha;
            next = ls.state;
        } else {
            next = propagate(system, state, state.point + d, cfg.integrator);
        }

        const double step = alpha * d.norm();
        state = next;
        g = gradient(system, state);
        result.trace.push_back(make_record(k + 1, state, g, cons, pcfg.rho, alpha, d.norm()));
        result.iterations = k + 1;

        if (step <= cfg.step_tol) {
            result.status = Status::Converged;
            break;
        }
    }
    if (g.norm() <= cfg.grad_tol) {
        result.status = Status::Converged;
    }

    result.x = state.point;
    result.F = state.F;
    return result;
}

}  // namespace

OptResult hgd_minimize(const PfaffianSystem& system, const Vector& x0, const Vector& F0,
                       const OptimizerConfig& cfg) {
    return minimize_impl(system, x0, F0, ConstraintSet{}, cfg, PenaltyConfig{}, false);
}

OptResult chgd_minimize(const PfaffianSystem& system, const Vector& x0, const Vector& F0,
                        const ConstraintSet& cons, const OptimizerConfig& cfg,
                        const PenaltyConfig& pcfg) {
    return minimize_impl(system, x0, F0, cons, cfg, pcfg, true);
}

}  // namespace hgd
