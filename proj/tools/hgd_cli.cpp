// Command-line front end: simulate von Mises data, fit by HGD/CHGD/Newton,
// export iteration traces, and run paired runtime benchmarks.

#include "hgd/optimizer.hpp"
#include "hgd/vonmises.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using hgd::ConstraintSet;
using hgd::Vector;
using json = nlohmann::json;

constexpr int kExitInvalidSpec = 2;
constexpr int kExitOptimizerFailure = 3;
constexpr int kExitIoError = 4;

struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Vector parse_x0(const std::string& text) {
    Vector x(2);
    char comma = 0;
    std::istringstream in(text);
    if (!(in >> x(0) >> comma >> x(1)) || comma != ',') {
        throw InvalidSpec("--x0 expects 'a,b'");
    }
    return x;
}

// "linear a b c" -> a*t1 + b*t2 + c <= 0; "disk r" -> t1^2 + t2^2 <= r^2.
hgd::Constraint parse_constraint(const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    if (kind == "linear") {
        double a, b, c;
        if (!(in >> a >> b >> c)) {
            throw InvalidSpec("linear constraint expects 'linear a b c'");
        }
        return {[a, b, c](const Vector& x) { return a * x(0) + b * x(1) + c; },
                [a, b](const Vector&) {
                    Vector g(2);
                    g << a, b;
                    return g;
                }};
    }
    if (kind == "disk") {
        double r;
        if (!(in >> r) || r <= 0.0) {
            throw InvalidSpec("disk constraint expects 'disk r' with r > 0");
        }
        return {[r](const Vector& x) { return x.squaredNorm() - r * r; },
                [](const Vector& x) { return (2.0 * x).eval(); }};
    }
    throw InvalidSpec("unknown constraint kind: " + kind);
}

struct FitOutcome {
    hgd::OptResult result;
    double seconds = 0.0;
};

FitOutcome run_fit(const std::string& method, const hgd::SufficientStats& stats,
                   const Vector& x0, const ConstraintSet& cons,
                   const hgd::OptimizerConfig& ocfg, const hgd::PenaltyConfig& pcfg) {
    FitOutcome out;
    const auto start = std::chrono::steady_clock::now();
    if (method == "newton") {
        out.result = hgd::mle_direct_newton(stats, {x0(0), x0(1)}, ocfg);
    } else {
        const hgd::PfaffianSystem system = hgd::vm_pfaffian_system(stats);
        const hgd::StateVector init = hgd::vm_initial_state({x0(0), x0(1)}, stats);
        if (method == "hgd") {
            out.result = hgd::hgd_minimize(system, init.point, init.F, ocfg);
        } else {
            out.result = hgd::chgd_minimize(system, init.point, init.F, cons, ocfg, pcfg);
        }
    }
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

void write_trace_csv(const std::string& path, const hgd::IterationTrace& trace) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write trace file: " + path);
    }
    out.precision(17);
    out << "k,theta1,theta2,L,grad_norm,alpha,penalty,feasible\n";
    for (const auto& rec : trace) {
        out << rec.k << ',' << rec.x(0) << ',' << rec.x(1) << ',' << rec.f << ','
            << rec.grad_norm << ',' << rec.alpha << ',' << rec.penalty << ','
            << (rec.feasible ? 1 : 0) << '\n';
    }
}

json summary_json(const std::string& method, const hgd::SufficientStats& stats,
                  const FitOutcome& fit) {
    const hgd::VmParams est{fit.result.x(0), fit.result.x(1)};
    return json{
        {"method", method},
        {"status", hgd::to_string(fit.result.status)},
        {"iterations", fit.result.iterations},
        {"wall_time_s", fit.seconds},
        {"objective", fit.result.F(0)},
        {"estimate",
         {{"theta1", est.theta1},
          {"theta2", est.theta2},
          {"kappa", est.kappa()},
          {"mu", est.mu()}}},
        {"data", {{"n", stats.n}, {"c_bar", stats.c_bar}, {"s_bar", stats.s_bar}}},
    };
}

struct CommonOpts {
    double kappa = 5.0;
    double mu = std::numbers::pi / 4.0;
    int n = 100;
    std::uint64_t seed = 1;
    std::string x0 = "-2.0,0.1";
    std::vector<std::string> constraints;
    hgd::OptimizerConfig ocfg;
    hgd::PenaltyConfig pcfg;
};

void add_solver_flags(CLI::App& cmd, CommonOpts& opts) {
    cmd.add_option("--x0", opts.x0, "starting point 'a,b'");
    cmd.add_option("--constraint", opts.constraints,
                   "inequality constraint: 'linear a b c' or 'disk r' (repeatable)");
    cmd.add_option("--rho", opts.pcfg.rho, "penalty weight");
    cmd.add_option("--xi", opts.pcfg.xi, "Armijo parameter in (0,1)");
    cmd.add_option("--shrink", opts.pcfg.shrink, "backtracking factor in (0,1)");
    cmd.add_option("--max-iters", opts.ocfg.max_iters, "iteration cap");
    cmd.add_option("--grad-tol", opts.ocfg.grad_tol, "gradient-norm stop tolerance");
}

void add_data_flags(CLI::App& cmd, CommonOpts& opts) {
    cmd.add_option("--kappa", opts.kappa, "concentration");
    cmd.add_option("--mu", opts.mu, "mean direction (radians)");
    cmd.add_option("--n", opts.n, "sample size");
    cmd.add_option("--seed", opts.seed, "RNG seed");
}

ConstraintSet build_constraints(const std::string& method,
                                const std::vector<std::string>& specs) {
    ConstraintSet cons;
    for (const auto& s : specs) {
        cons.inequalities.push_back(parse_constraint(s));
    }
    if (method == "chgd" && cons.empty()) {
        throw InvalidSpec("chgd requires at least one --constraint");
    }
    if (method != "chgd" && !cons.empty()) {
        throw InvalidSpec("constraints are only valid with --method chgd");
    }
    return cons;
}

int cmd_simulate(const CommonOpts& opts, const std::string& out_path) {
    const hgd::AngleData data = hgd::vm_sample(opts.kappa, opts.mu, opts.n, opts.seed);
    std::ostringstream comment;
    comment << "von Mises sample: kappa=" << opts.kappa << " mu=" << opts.mu
            << " n=" << opts.n << " seed=" << opts.seed;
    hgd::write_angle_file(out_path, data, comment.str());
    const hgd::SufficientStats stats = hgd::sufficient_stats(data);
    std::cout << "wrote " << data.n() << " angles to " << out_path << "\n"
              << "c_bar=" << stats.c_bar << " s_bar=" << stats.s_bar << "\n";
    return 0;
}

int cmd_fit(const std::string& method, const CommonOpts& opts, const std::string& data_path,
            const std::string& trace_path, const std::string& out_path) {
    hgd::AngleData data;
    if (!data_path.empty()) {
        data = hgd::read_angle_file(data_path);
    } else {
        data = hgd::vm_sample(opts.kappa, opts.mu, opts.n, opts.seed);
    }
    const hgd::SufficientStats stats = hgd::sufficient_stats(data);
    const ConstraintSet cons = build_constraints(method, opts.constraints);
    const Vector x0 = parse_x0(opts.x0);

    const FitOutcome fit = run_fit(method, stats, x0, cons, opts.ocfg, opts.pcfg);

    if (!trace_path.empty()) {
        write_trace_csv(trace_path, fit.result.trace);
    }
    const json summary = summary_json(method, stats, fit);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            throw std::runtime_error("cannot write summary file: " + out_path);
        }
        out << summary.dump(2) << "\n";
    }
    std::cout << summary.dump(2) << "\n";

    if (fit.result.status != hgd::Status::Converged) {
        std::cerr << "optimizer did not converge: " << hgd::to_string(fit.result.status)
                  << "\n";
        return kExitOptimizerFailure;
    }
    return 0;
}

int cmd_bench(const std::vector<std::string>& methods, const CommonOpts& opts, int trials,
              const std::string& out_path) {
    struct Cell {
        double time_sum = 0.0;
        double t1_sum = 0.0;
        double t2_sum = 0.0;
        int ok = 0;
        int failed = 0;
    };
    std::vector<Cell> cells(methods.size());

    std::ofstream raw;
    if (!out_path.empty()) {
        raw.open(out_path);
        if (!raw) {
            throw std::runtime_error("cannot write benchmark file: " + out_path);
        }
        raw << "trial,method,time_s,theta1,theta2,status\n";
        raw.precision(17);
    }

    const Vector x0 = parse_x0(opts.x0);
    for (int trial = 0; trial < trials; ++trial) {
        // Same data for every method within a trial: paired comparisons.
        const hgd::AngleData data =
            hgd::vm_sample(opts.kappa, opts.mu, opts.n, opts.seed + trial);
        const hgd::SufficientStats stats = hgd::sufficient_stats(data);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            // constraints only apply to the chgd entry of a mixed method list
            const ConstraintSet cons =
                methods[mi] == "chgd" ? build_constraints("chgd", opts.constraints)
                                      : ConstraintSet{};
            try {
                const FitOutcome fit =
                    run_fit(methods[mi], stats, x0, cons, opts.ocfg, opts.pcfg);
                cells[mi].time_sum += fit.seconds;
                cells[mi].t1_sum += fit.result.x(0);
                cells[mi].t2_sum += fit.result.x(1);
                cells[mi].ok += 1;
                if (raw) {
                    raw << trial << ',' << methods[mi] << ',' << fit.seconds << ','
                        << fit.result.x(0) << ',' << fit.result.x(1) << ','
                        << hgd::to_string(fit.result.status) << '\n';
                }
            } catch (const std::exception& e) {
                cells[mi].failed += 1;
                if (raw) {
                    raw << trial << ',' << methods[mi] << ",nan,nan,nan,error\n";
                }
                std::cerr << "trial " << trial << " " << methods[mi] << " failed: "
                          << e.what() << "\n";
            }
        }
    }

    std::cout << "method,mean_time_s,mean_theta1,mean_theta2,trials_ok,trials_failed\n";
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const Cell& c = cells[mi];
        const double denom = c.ok > 0 ? static_cast<double>(c.ok) : 1.0;
        std::cout << methods[mi] << ',' << c.time_sum / denom << ',' << c.t1_sum / denom
                  << ',' << c.t2_sum / denom << ',' << c.ok << ',' << c.failed << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"holonomic gradient descent toolkit for von Mises MLE"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string method = "hgd";
    std::string data_path;
    std::string trace_path;
    std::string out_path;
    std::vector<std::string> methods = {"hgd", "chgd", "newton"};
    int trials = 100;

    CLI::App* sim = app.add_subcommand("simulate", "draw a von Mises sample to a file");
    add_data_flags(*sim, opts);
    sim->add_option("--out", out_path, "output angle file")->required();

    CLI::App* fit = app.add_subcommand("fit", "fit the MLE by hgd, chgd, or newton");
    fit->add_option("--method", method, "hgd | chgd | newton")
        ->check(CLI::IsMember({"hgd", "chgd", "newton"}));
    fit->add_option("--data", data_path, "angle file (otherwise simulate from flags)");
    add_data_flags(*fit, opts);
    add_solver_flags(*fit, opts);
    fit->add_option("--trace", trace_path, "write per-iteration CSV here");
    fit->add_option("--out", out_path, "write JSON summary here");

    CLI::App* bench = app.add_subcommand("bench", "paired runtime benchmark");
    bench->add_option("--trials", trials, "number of paired trials")
        ->check(CLI::PositiveNumber);
    bench->add_option("--methods", methods, "methods to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"hgd", "chgd", "newton"}));
    add_data_flags(*bench, opts);
    add_solver_flags(*bench, opts);
    bench->add_option("--out", out_path, "write raw per-trial CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInvalidSpec;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opts, out_path);
        if (fit->parsed()) return cmd_fit(method, opts, data_path, trace_path, out_path);
        return cmd_bench(methods, opts, trials, out_path);
    } catch (const InvalidSpec& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidSpec;
    } catch (const hgd::EmptyData& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const hgd::SingularPoint& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOptimizerFailure;
    } catch (const hgd::SingularPath& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOptimizerFailure;
    } catch (const hgd::SingularHessian& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOptimizerFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    }
}
