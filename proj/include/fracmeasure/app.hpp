#pragma once

// Command execution behind the command-line tool: each command prints a
// summary to `log` and writes the VTK/CSV artifacts named in the config.

#include "fracmeasure/config.hpp"
#include "fracmeasure/control.hpp"
#include "fracmeasure/io.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace fracmeasure {

namespace detail {

inline MeshPtr config_mesh(const RunConfig& c) {
    return c.mesh_file.empty() ? build_structured_square(c.n) : load_mesh(c.mesh_file);
}

inline SchemeConfig scheme_config(const RunConfig& c, double h_grid) {
    SchemeConfig s;
    s.scheme = c.scheme;
    s.params = c.params();
    s.measure = c.make_measure();
    s.regularization = c.regularization;
    s.epsilon_factor = c.eps ? *c.eps / h_grid : c.eps_factor;
    if (c.truncation) s.quadrature = QuadratureParams{*c.truncation, *c.terms};
    s.quadrature_c = c.quadrature_c;
    s.solver = {c.cg_tol, c.cg_maxit};
    return s;
}

inline void print_mesh(std::ostream& log, const Mesh& mesh) {
    const auto h = mesh_size(mesh);
    log << "h (diameter, grid): " << h.h_diam << ", " << h.h_grid << "\n";
    log << "N_h: " << mesh.num_dofs() << "\n";
}

inline void print_quadrature(std::ostream& log, const QuadratureParams& q) {
    log << "Y: " << q.truncation << "\nK: " << q.terms << "\n";
}

template <class Write>
void write_csv_file(const std::string& path, Write&& write) {
    if (path.empty()) return;
    auto out = open_output(path);
    write(out);
}

inline void write_vtk_file(const std::string& path, const std::vector<std::pair<std::string, FEFunction>>& fields) {
    if (path.empty()) return;
    auto out = open_output(path);
    write_vtk(out, fields);
}

/// Largest nodal value of a field and the vertex where it is attained (first on ties).
inline std::pair<double, Point> field_max(const FEFunction& u) {
    const Vector values = u.nodal_values();
    Eigen::Index best = 0;
    values.maxCoeff(&best);
    return {values[best], u.mesh()->vertices()[static_cast<std::size_t>(best)]};
}

inline void run_solve(const RunConfig& c, std::ostream& log) {
    const auto mesh = config_mesh(c);
    const double h_grid = mesh_size(*mesh).h_grid;
    const auto scheme = scheme_config(c, h_grid);
    print_mesh(log, *mesh);
    log << "scheme: " << to_string(c.scheme) << "\nmeasure: " << describe(scheme.measure) << "\n";
    if (c.scheme == SolveScheme::Practical) {
        print_quadrature(log, quadrature_for(scheme, h_grid));
        if (is_singular(scheme.measure)) {
            log << "regularization: " << to_string(c.regularization)
                << "\nepsilon: " << scheme.epsilon_factor * h_grid << "\n";
        }
    }
    const auto u = solve_configured(scheme, mesh);
    const auto [peak, where] = field_max(u);
    log << "max u: " << peak << " at (" << where.x << ", " << where.y << ")\n";
    log << "min u: " << u.nodal_values().minCoeff() << "\n";
    write_vtk_file(c.output_vtk, {{"u", u}});
    write_csv_file(c.output_csv, [&](std::ostream& out) {
        out << std::setprecision(12) << "x,y,u\n";
        const Vector values = u.nodal_values();
        for (std::size_t v = 0; v < mesh->num_vertices(); ++v) {
            out << mesh->vertices()[v].x << ',' << mesh->vertices()[v].y << ',' << values[static_cast<Eigen::Index>(v)]
                << '\n';
        }
    });
}

inline void run_control(const RunConfig& c, std::ostream& log) {
    const auto mesh = config_mesh(c);
    const double h_grid = mesh_size(*mesh).h_grid;
    print_mesh(log, *mesh);
    const ScalarField forcing = c.forcing == ForcingKind::Sine ? analytic_reference_square(0.0, {{1, 1, 1.0}})
                                                               : ScalarField([](Point) { return 0.0; });
    const ControlProblem problem(forcing, c.observations, c.targets, c.alpha, c.lower, c.upper);
    ControlOptions options;
    options.tolerance = c.ocp_tol;
    options.max_iterations = c.ocp_maxit;
    if (c.scheme == SolveScheme::Practical) {
        const auto q = c.truncation ? QuadratureParams{*c.truncation, *c.terms}
                                    : select_params(c.s, h_grid, c.quadrature_c);
        print_quadrature(log, q);
        options.scheme = ControlScheme::Practical;
        options.rule = build_rule(c.s, q.truncation, q.terms);
        options.epsilon = c.eps ? *c.eps : c.eps_factor * h_grid;
        log << "epsilon: " << options.epsilon << "\n";
    }
    const EigenDecomposition e(mesh);
    const auto sol = solve_ocp(e, c.params(), problem, options);
    log << "iterations: " << sol.iterations << "\nomega: " << sol.omega << "\ncost: " << sol.cost_history.back()
        << "\nvi residual: " << sol.vi_residual << "\n";
    write_vtk_file(c.output_vtk, {{"control", sol.control}, {"state", sol.state}, {"adjoint", sol.adjoint}});
    write_csv_file(c.output_csv, [&](std::ostream& out) {
        out << std::setprecision(12) << "iteration,cost\n";
        for (std::size_t i = 0; i < sol.cost_history.size(); ++i) out << i << ',' << sol.cost_history[i] << '\n';
    });
}

inline void run_converge(const RunConfig& c, std::ostream& log) {
    if (!c.mesh_file.empty()) throw ConfigError("mesh", "converge runs on structured unit-square meshes");
    if (c.eps) throw ConfigError("eps", "converge ties epsilon to each level; use eps_factor");
    const auto scheme = scheme_config(c, 1.0);
    std::optional<FEFunction> reference;
    if (c.reference_n) reference = reference_solution(scheme, *c.reference_n);
    const auto table = self_convergence(scheme, c.levels, reference);
    log << "scheme: " << to_string(c.scheme) << "\nmeasure: " << describe(scheme.measure) << "\n";
    log << "reference n: " << (c.reference_n ? *c.reference_n : c.levels.back()) << "\n";
    table.write_csv(log);
    write_csv_file(c.output_csv, [&](std::ostream& out) { table.write_csv(out); });
}

inline void run_quadcheck(const RunConfig& c, std::ostream& log) {
    const double h = 1.0 / static_cast<double>(c.n);
    const auto q = c.truncation ? QuadratureParams{*c.truncation, *c.terms} : select_params(c.s, h, c.quadrature_c);
    print_quadrature(log, q);
    const auto rule = build_rule(c.s, q.truncation, q.terms);
    double spread = 0.0;
    for (double psi : rule.psi) spread = std::max(spread, std::abs(psi - rule.psi.front()) / rule.psi.front());
    log << std::setprecision(12);
    log << "s: " << c.s << "\npsi spread (max |psi_k - psi_1| / psi_1): " << spread << "\n";
    log << "all psi equal: " << (spread <= 1e-12 ? "yes" : "no") << "\n";
    log << "lambda,abs_error,rel_error\n";
    std::ostringstream table;
    table << std::setprecision(12) << "lambda,rational,exact,abs_error,rel_error\n";
    const double ratio = std::log(c.lambda_max / c.lambda_min) / static_cast<double>(c.lambda_points - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.lambda_points; ++i) {
        const double lambda = c.lambda_min * std::exp(ratio * static_cast<double>(i));
        const double exact = std::pow(lambda, -c.s);
        const double approx = rational_value(rule, lambda);
        const double rel = relative_scalar_error(rule, lambda);
        worst = std::max(worst, rel);
        table << lambda << ',' << approx << ',' << exact << ',' << scalar_error(rule, lambda) << ',' << rel << '\n';
        log << lambda << ',' << scalar_error(rule, lambda) << ',' << rel << '\n';
    }
    log << "max relative error: " << worst << "\n";
    write_csv_file(c.output_csv, [&](std::ostream& out) { out << table.str(); });
}

inline void run_eig(const RunConfig& c, std::ostream& log) {
    const auto mesh = config_mesh(c);
    print_mesh(log, *mesh);
    const EigenDecomposition e(mesh);
    const auto count = std::min<std::size_t>(c.eig_count, e.size());
    log << std::setprecision(12);
    for (std::size_t i = 0; i < count; ++i) {
        log << "Lambda_" << i + 1 << ": " << e.values()[static_cast<Eigen::Index>(i)] << "\n";
    }
    const double bound = 2.0 * std::numbers::pi * std::numbers::pi;
    log << "Lambda_1 >= 2 pi^2: " << (e.values()[0] >= bound ? "yes" : "no") << "\n";
    write_csv_file(c.output_csv, [&](std::ostream& out) {
        out << std::setprecision(17) << "index,lambda\n";
        for (std::size_t i = 0; i < count; ++i) out << i + 1 << ',' << e.values()[static_cast<Eigen::Index>(i)] << '\n';
    });
    if (!c.output_vtk.empty()) {
        std::vector<std::pair<std::string, FEFunction>> modes;
        for (std::size_t i = 0; i < count; ++i) {
            modes.emplace_back("phi_" + std::to_string(i + 1), FEFunction(mesh, e.vectors().col(static_cast<Eigen::Index>(i))));
        }
        write_vtk_file(c.output_vtk, modes);
    }
}

} // namespace detail

/// Executes the configured command. Errors propagate as library exceptions.
inline void run(const RunConfig& c, std::ostream& log) {
    const auto start = std::chrono::steady_clock::now();
    switch (c.command) {
    case Command::Solve: detail::run_solve(c, log); break;
    case Command::Control: detail::run_control(c, log); break;
    case Command::Converge: detail::run_converge(c, log); break;
    case Command::Quadcheck: detail::run_quadcheck(c, log); break;
    case Command::Eig: detail::run_eig(c, log); break;
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    log << "runtime: " << std::setprecision(3) << elapsed.count() << " s\n";
}

/// 0 on success, 1 for configuration errors, 2 for every other failure.
inline int exit_status(const std::exception& e) { return dynamic_cast<const ConfigError*>(&e) ? 1 : 2; }

} // namespace fracmeasure
