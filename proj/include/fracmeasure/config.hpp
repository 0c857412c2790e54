#pragma once

// Run configuration: flat key=value text, named presets, validation.
// Precedence, lowest first: built-in defaults, preset, config file, flags.

#include "fracmeasure/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fracmeasure {

enum class Command { Solve, Control, Converge, Quadcheck, Eig };
enum class MeasureKind { Dirac, Circle, Sine };
enum class ForcingKind { Zero, Sine };

using ConfigValues = std::map<std::string, std::string>;

struct RunConfig {
    Command command = Command::Solve;
    std::string preset;

    // Domain: structured n×n square unless a mesh file is given.
    std::size_t n = 32;
    std::string mesh_file;

    double s = 0.65;
    double theta = 0.5; ///< midpoint of (1 − s, s) unless given

    // Data.
    MeasureKind measure = MeasureKind::Dirac;
    Point dirac{0.3, 0.7};
    Point circle_center{0.5, 0.5};
    double circle_radius = 0.3;
    double circle_weight = 1.0;

    // Discretization.
    SolveScheme scheme = SolveScheme::Ideal;
    RegularizationKind regularization = RegularizationKind::DiskIndicator;
    double eps_factor = 1.0;
    std::optional<double> eps;
    std::optional<double> truncation;
    std::optional<std::size_t> terms;
    double quadrature_c = 2.0;
    double cg_tol = 1e-10;
    std::size_t cg_maxit = 20000;

    // control
    double alpha = 0.1;
    double lower = -5.0;
    double upper = 5.0;
    std::vector<Point> observations{{0.3, 0.7}, {0.7, 0.4}};
    std::vector<double> targets{0.4, -0.2};
    ForcingKind forcing = ForcingKind::Zero;
    double ocp_tol = 1e-10;
    std::size_t ocp_maxit = 2000;

    // converge
    std::vector<std::size_t> levels{8, 16, 32};
    std::optional<std::size_t> reference_n;

    // quadcheck
    double lambda_min = 19.7;
    double lambda_max = 1e6;
    std::size_t lambda_points = 50;

    // eig
    std::size_t eig_count = 5;

    std::string output_vtk;
    std::string output_csv;

    FracParams params() const { return FracParams(s, theta); }

    Measure make_measure() const {
        switch (measure) {
        case MeasureKind::Dirac: return PointDirac{dirac};
        case MeasureKind::Circle: return WeightedCircle{circle_center, circle_radius, circle_weight};
        case MeasureKind::Sine:
            return Density(analytic_reference_square(0.0, {{1, 1, 1.0}}), 5);
        }
        throw DomainError("unknown measure kind");
    }
};

/// Recognized keys with a one-line description each.
inline const std::map<std::string, std::string>& config_keys() {
    static const std::map<std::string, std::string> keys{
        {"preset", "paper-circle | paper-dirac"},
        {"n", "structured unit-square mesh with n×n cells"},
        {"mesh", "mesh file (overrides n)"},
        {"s", "fractional order in (1/2, 1)"},
        {"theta", "dual-pair shift in (1-s, s); default: midpoint"},
        {"measure", "dirac | circle | sine"},
        {"dirac", "Dirac location x,y"},
        {"circle_center", "circle center x,y"},
        {"circle_radius", "circle radius"},
        {"circle_weight", "total mass of the circle measure"},
        {"scheme", "ideal | practical"},
        {"regularization", "mollifier | disk | ring"},
        {"eps_factor", "regularization scale as a multiple of h_grid"},
        {"eps", "regularization scale (overrides eps_factor)"},
        {"Y", "quadrature truncation"},
        {"K", "number of quadrature terms"},
        {"c", "constant in Y = c·s·|ln h|"},
        {"cg_tol", "relative tolerance of the shifted solves"},
        {"cg_maxit", "iteration cap of the shifted solves"},
        {"alpha", "control cost weight"},
        {"lower", "lower control bound"},
        {"upper", "upper control bound"},
        {"observations", "observation points x1,y1;x2,y2;..."},
        {"targets", "target values t1,t2,..."},
        {"forcing", "zero | sine"},
        {"ocp_tol", "step tolerance of the control iteration"},
        {"ocp_maxit", "iteration cap of the control iteration"},
        {"levels", "mesh sizes for converge, e.g. 16,32,64"},
        {"reference_n", "mesh size of the converge reference (default: finest level)"},
        {"lambda_min", "quadcheck grid start"},
        {"lambda_max", "quadcheck grid end"},
        {"lambda_points", "quadcheck grid size"},
        {"eig_count", "eigenvalues printed by eig"},
        {"output_vtk", "VTK output path"},
        {"output_csv", "CSV output path"},
    };
    return keys;
}

/// Preset values, stored verbatim.
inline ConfigValues preset_values(const std::string& name) {
    ConfigValues common{{"n", "257"},     {"s", "0.65"},      {"scheme", "practical"},
                        {"eps_factor", "1"}, {"Y", "11.0982"}, {"K", "2852"}};
    if (name == "paper-circle") {
        common.insert({{"measure", "circle"},
                       {"circle_center", "0.5,0.5"},
                       {"circle_radius", "0.3"},
                       {"circle_weight", "1"},
                       {"regularization", "ring"}});
        return common;
    }
    if (name == "paper-dirac") {
        common.insert({{"measure", "dirac"}, {"dirac", "0.3,0.7"}, {"regularization", "disk"}});
        return common;
    }
    throw ConfigError("preset", "unknown preset '" + name + "'");
}

namespace detail {

inline std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = text.find_last_not_of(" \t\r");
    return text.substr(first, last - first + 1);
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char ch : text) {
        if (ch == sep) {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    parts.push_back(trim(current));
    return parts;
}

inline double to_double(const std::string& key, const std::string& text) {
    double value = 0.0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(value)) {
        throw ConfigError(key, "expected a finite number, got '" + text + "'");
    }
    return value;
}

inline std::size_t to_count(const std::string& key, const std::string& text) {
    std::size_t value = 0;
    const auto t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
    }
    return value;
}

inline std::size_t to_positive_count(const std::string& key, const std::string& text) {
    const auto value = to_count(key, text);
    if (value == 0) throw ConfigError(key, "must be positive");
    return value;
}

inline Point to_point(const std::string& key, const std::string& text) {
    const auto parts = split(text, ',');
    if (parts.size() != 2) throw ConfigError(key, "expected x,y, got '" + text + "'");
    return {to_double(key, parts[0]), to_double(key, parts[1])};
}

template <class Enum>
Enum to_choice(const std::string& key, const std::string& text, const std::map<std::string, Enum>& choices) {
    const auto it = choices.find(trim(text));
    if (it != choices.end()) return it->second;
    std::string allowed;
    for (const auto& [name, value] : choices) allowed += (allowed.empty() ? "" : " | ") + name;
    throw ConfigError(key, "expected one of " + allowed + ", got '" + text + "'");
}

} // namespace detail

inline Command parse_command(const std::string& text) {
    return detail::to_choice<Command>("command", text,
                                      {{"solve", Command::Solve},
                                       {"control", Command::Control},
                                       {"converge", Command::Converge},
                                       {"quadcheck", Command::Quadcheck},
                                       {"eig", Command::Eig}});
}

/// Flat key=value text; '#' starts a comment. Unknown or repeated keys are errors.
inline ConfigValues read_config(std::istream& in) {
    ConfigValues values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no), "expected key=value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        if (!config_keys().contains(key)) throw ConfigError(key, "unknown key");
        if (!values.emplace(key, detail::trim(line.substr(eq + 1))).second) {
            throw ConfigError(key, "given twice");
        }
    }
    return values;
}

inline ConfigValues read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return read_config(in);
}

/// Builds a validated configuration from the merged file and flag values
/// (flags must already have overridden file entries).
inline RunConfig parse_config(Command command, const ConfigValues& given) {
    for (const auto& [key, value] : given) {
        if (!config_keys().contains(key)) throw ConfigError(key, "unknown key");
    }
    ConfigValues values;
    if (const auto it = given.find("preset"); it != given.end()) values = preset_values(detail::trim(it->second));
    for (const auto& [key, value] : given) values[key] = value;

    RunConfig c;
    c.command = command;
    using namespace detail;
    for (const auto& [key, v] : values) {
        if (key == "preset") c.preset = trim(v);
        else if (key == "n") c.n = to_positive_count(key, v);
        else if (key == "mesh") c.mesh_file = trim(v);
        else if (key == "s") c.s = to_double(key, v);
        else if (key == "theta") c.theta = to_double(key, v);
        else if (key == "measure")
            c.measure = to_choice<MeasureKind>(
                key, v, {{"dirac", MeasureKind::Dirac}, {"circle", MeasureKind::Circle}, {"sine", MeasureKind::Sine}});
        else if (key == "dirac") c.dirac = to_point(key, v);
        else if (key == "circle_center") c.circle_center = to_point(key, v);
        else if (key == "circle_radius") c.circle_radius = to_double(key, v);
        else if (key == "circle_weight") c.circle_weight = to_double(key, v);
        else if (key == "scheme")
            c.scheme = to_choice<SolveScheme>(key, v, {{"ideal", SolveScheme::Ideal}, {"practical", SolveScheme::Practical}});
        else if (key == "regularization")
            c.regularization = to_choice<RegularizationKind>(key, v,
                                                             {{"mollifier", RegularizationKind::MollifierConvolution},
                                                              {"disk", RegularizationKind::DiskIndicator},
                                                              {"ring", RegularizationKind::RingIndicator}});
        else if (key == "eps_factor") c.eps_factor = to_double(key, v);
        else if (key == "eps") c.eps = to_double(key, v);
        else if (key == "Y") c.truncation = to_double(key, v);
        else if (key == "K") c.terms = to_positive_count(key, v);
        else if (key == "c") c.quadrature_c = to_double(key, v);
        else if (key == "cg_tol") c.cg_tol = to_double(key, v);
        else if (key == "cg_maxit") c.cg_maxit = to_positive_count(key, v);
        else if (key == "alpha") c.alpha = to_double(key, v);
        else if (key == "lower") c.lower = to_double(key, v);
        else if (key == "upper") c.upper = to_double(key, v);
        else if (key == "observations") {
            c.observations.clear();
            for (const auto& part : split(v, ';')) c.observations.push_back(to_point(key, part));
        } else if (key == "targets") {
            c.targets.clear();
            for (const auto& part : split(v, ',')) c.targets.push_back(to_double(key, part));
        } else if (key == "forcing")
            c.forcing = to_choice<ForcingKind>(key, v, {{"zero", ForcingKind::Zero}, {"sine", ForcingKind::Sine}});
        else if (key == "ocp_tol") c.ocp_tol = to_double(key, v);
        else if (key == "ocp_maxit") c.ocp_maxit = to_positive_count(key, v);
        else if (key == "levels") {
            c.levels.clear();
            for (const auto& part : split(v, ',')) c.levels.push_back(to_positive_count(key, part));
        } else if (key == "reference_n") c.reference_n = to_positive_count(key, v);
        else if (key == "lambda_min") c.lambda_min = to_double(key, v);
        else if (key == "lambda_max") c.lambda_max = to_double(key, v);
        else if (key == "lambda_points") c.lambda_points = to_positive_count(key, v);
        else if (key == "eig_count") c.eig_count = to_positive_count(key, v);
        else if (key == "output_vtk") c.output_vtk = trim(v);
        else if (key == "output_csv") c.output_csv = trim(v);
    }

    // Validation.
    // quadcheck only evaluates the scalar rule, which is defined for every s in (0, 1).
    if (command == Command::Quadcheck) {
        if (!(c.s > 0.0 && c.s < 1.0)) throw ConfigError("s", "must lie in (0, 1)");
    } else {
        if (!values.contains("theta")) c.theta = FracParams::default_theta(c.s);
        try {
            (void)c.params();
        } catch (const DomainError& e) {
            throw ConfigError(values.contains("theta") ? "theta" : "s", e.what());
        }
    }
    if (given.contains("mesh") && given.contains("n")) throw ConfigError("mesh", "conflicts with n");
    if (!(c.circle_radius > 0.0)) throw ConfigError("circle_radius", "must be positive");
    if (!(c.eps_factor > 0.0)) throw ConfigError("eps_factor", "must be positive");
    if (c.eps && !(*c.eps > 0.0)) throw ConfigError("eps", "must be positive");
    if (c.truncation && !(*c.truncation > 0.0)) throw ConfigError("Y", "must be positive");
    if (c.truncation.has_value() != c.terms.has_value()) {
        throw ConfigError(c.truncation ? "K" : "Y", "Y and K must be given together");
    }
    if (!(c.quadrature_c > 0.0)) throw ConfigError("c", "must be positive");
    if (!(c.cg_tol > 0.0)) throw ConfigError("cg_tol", "must be positive");
    if (!(c.alpha > 0.0)) throw ConfigError("alpha", "must be positive");
    if (!(c.lower < c.upper)) throw ConfigError("upper", "must exceed lower");
    if (c.observations.size() != c.targets.size()) throw ConfigError("targets", "one target per observation point");
    if (!(c.ocp_tol > 0.0)) throw ConfigError("ocp_tol", "must be positive");
    if (!std::is_sorted(c.levels.begin(), c.levels.end()) ||
        std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end()) {
        throw ConfigError("levels", "must increase strictly");
    }
    if (c.reference_n && *c.reference_n < c.levels.back()) throw ConfigError("reference_n", "below the finest level");
    if (!(c.lambda_min > 0.0) || !(c.lambda_max > c.lambda_min)) {
        throw ConfigError("lambda_max", "need 0 < lambda_min < lambda_max");
    }
    if (c.lambda_points < 2) throw ConfigError("lambda_points", "need at least two points");
    if (c.scheme == SolveScheme::Practical && c.regularization == RegularizationKind::DiskIndicator &&
        c.measure == MeasureKind::Circle) {
        throw ConfigError("regularization", "disk regularization applies to dirac measures");
    }
    if (c.scheme == SolveScheme::Practical && c.regularization == RegularizationKind::RingIndicator &&
        c.measure == MeasureKind::Dirac) {
        throw ConfigError("regularization", "ring regularization applies to circle measures");
    }
    return c;
}

} // namespace fracmeasure
