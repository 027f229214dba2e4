#ifndef KOWALEVSKAYA_IO_HPP_
#define KOWALEVSKAYA_IO_HPP_

// File formats: scenario configs (flat JSON), trajectory CSV, drift CSV and
// the JSON run summary. All text is UTF-8 with LF line endings.

#include "conserved.hpp"
#include "flow.hpp"
#include "models.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kowalevskaya {

inline constexpr const char* kTrajectorySchema = "kowalevskaya-trajectory/1";
inline constexpr const char* kSummarySchema = "kowalevskaya-summary/1";

/// Invalid user input; the message starts with the offending field path.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(field)
    {
    }
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

/// A trajectory or summary file that does not follow its schema.
class SchemaError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioConfig
{
    int n = 2;
    HamiltonianSpec<Rational> spec;
    PhaseState<Rational> initial;
    IntegratorConfig integrator;
    std::string trajectory_file = "trajectory.csv";
    std::string drift_file = "drift.csv";
    std::string summary_file = "summary.json";
};

namespace detail {

inline Rational json_rational(const nlohmann::json& v, const std::string& field)
{
    try {
        if (v.is_string()) return parse_rational(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<long long>());
        if (v.is_number()) {
            // Use the shortest decimal text of the double so that 0.1 means 1/10.
            return parse_rational(v.dump());
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
    }
    throw ConfigError(field, "expected a number or a \"num/den\" string");
}

inline double json_double(const nlohmann::json& v, const std::string& field)
{
    return to_double(json_rational(v, field));
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing required field");
    return *it;
}

/// Accepts "j,k", "j-k" or "l_j_k" (one-based).
inline std::pair<int, int> parse_pair_key(const std::string& key, const std::string& field)
{
    std::string s = key;
    if (s.rfind("l_", 0) == 0) s = s.substr(2);
    for (char& ch : s)
        if (ch == '_' || ch == '-') ch = ',';
    auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError(field, "expected a key of the form \"j,k\"");
    try {
        std::size_t u1 = 0, u2 = 0;
        int j = std::stoi(s.substr(0, comma), &u1);
        int k = std::stoi(s.substr(comma + 1), &u2);
        if (u1 != comma || comma + 1 + u2 != s.size()) throw std::invalid_argument("trailing characters");
        return {j, k};
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a key of the form \"j,k\"");
    }
}

inline void check_known_keys(const nlohmann::json& obj, std::initializer_list<const char*> keys,
                             const std::string& path)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
    }
}

} // namespace detail

/// Parses and validates a scenario document. Every precondition of the run is
/// checked here so that a failure names the offending field.
inline ScenarioConfig parse_scenario(const nlohmann::json& doc)
{
    using detail::json_double;
    using detail::json_rational;
    using detail::require;
    if (!doc.is_object()) throw ConfigError("<root>", "expected a JSON object");
    detail::check_known_keys(doc,
                             {"n", "mode", "alpha", "beta", "gamma", "lagrange_coeff", "initial_state", "integrator",
                              "output"},
                             "");

    ScenarioConfig cfg;
    const auto& n_field = require(doc, "n", "");
    if (!n_field.is_number_integer()) throw ConfigError("n", "expected an integer");
    cfg.n = n_field.get<int>();
    if (cfg.n < 2) throw ConfigError("n", "must be at least 2");
    const int n = cfg.n;

    Mode mode = Mode::Kowalevskaya;
    if (auto it = doc.find("mode"); it != doc.end()) {
        if (!it->is_string()) throw ConfigError("mode", "expected a string");
        try {
            mode = parse_mode(it->get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError("mode", e.what());
        }
    }
    cfg.spec.mode = mode;
    cfg.spec.alpha = doc.contains("alpha") ? json_rational(doc["alpha"], "alpha") : Rational(1);
    cfg.spec.beta = doc.contains("beta") ? json_rational(doc["beta"], "beta") : Rational(1, 2);
    cfg.spec.lagrange_coeff =
        doc.contains("lagrange_coeff") ? json_rational(doc["lagrange_coeff"], "lagrange_coeff") : Rational(0);
    if (mode == Mode::Kowalevskaya && (cfg.spec.alpha != Rational(1) || cfg.spec.beta != Rational(1, 2))) {
        throw ConfigError(doc.contains("alpha") && cfg.spec.alpha != Rational(1) ? "alpha" : "beta",
                          "kowalevskaya mode fixes alpha = 1, beta = 1/2");
    }

    if (mode == Mode::Lagrange) {
        cfg.spec.gamma.assign(static_cast<std::size_t>(n), Rational(0));
        if (doc.contains("gamma")) {
            const auto& g = doc["gamma"];
            if (!g.is_array() || g.size() != static_cast<std::size_t>(n)) {
                throw ConfigError("gamma", "expected an array of n = " + std::to_string(n) + " entries");
            }
        }
    } else {
        const auto& g = require(doc, "gamma", "");
        if (!g.is_array()) throw ConfigError("gamma", "expected an array");
        if (g.size() != static_cast<std::size_t>(n)) {
            throw ConfigError("gamma", "has " + std::to_string(g.size()) + " entries, expected n = " +
                                           std::to_string(n));
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            cfg.spec.gamma.push_back(json_rational(g[i], "gamma[" + std::to_string(i) + "]"));
        }
        if (mode == Mode::Kowalevskaya) {
            bool nonzero = false;
            for (const auto& v : cfg.spec.gamma) nonzero = nonzero || !v.is_zero();
            if (!nonzero) throw ConfigError("gamma", "must be nonzero in kowalevskaya mode");
        }
    }

    cfg.initial = PhaseState<Rational>(n);
    if (auto it = doc.find("initial_state"); it != doc.end()) {
        const auto& init = *it;
        if (!init.is_object()) throw ConfigError("initial_state", "expected an object");
        detail::check_known_keys(init, {"l", "p"}, "initial_state");
        if (auto l = init.find("l"); l != init.end()) {
            if (!l->is_object()) throw ConfigError("initial_state.l", "expected an object of \"j,k\": value");
            for (auto e = l->begin(); e != l->end(); ++e) {
                const std::string field = "initial_state.l." + e.key();
                auto [j, k] = detail::parse_pair_key(e.key(), field);
                if (j < 1 || k < 1 || j > n + 1 || k > n + 1 || j == k) {
                    throw ConfigError(field, "indices must be distinct and lie in 1.." + std::to_string(n + 1));
                }
                cfg.initial.set_l(j - 1, k - 1, json_rational(e.value(), field));
            }
        }
        if (auto p = init.find("p"); p != init.end()) {
            if (!p->is_array() || p->size() != static_cast<std::size_t>(n + 1)) {
                throw ConfigError("initial_state.p", "expected an array of n+1 = " + std::to_string(n + 1) +
                                                         " entries");
            }
            for (int m = 0; m <= n; ++m) {
                cfg.initial.set_p(m, json_rational((*p)[static_cast<std::size_t>(m)],
                                                   "initial_state.p[" + std::to_string(m) + "]"));
            }
        }
    }

    if (auto it = doc.find("integrator"); it != doc.end()) {
        const auto& in = *it;
        if (!in.is_object()) throw ConfigError("integrator", "expected an object");
        detail::check_known_keys(in, {"method", "step", "abs_tol", "rel_tol", "t_final", "sample_interval", "max_steps"},
                                 "integrator");
        auto& ic = cfg.integrator;
        if (auto m = in.find("method"); m != in.end()) {
            const std::string s = m->is_string() ? m->get<std::string>() : std::string{};
            if (s == "fixed_rk4") {
                ic.method = Method::FixedRk4;
            } else if (s == "adaptive" || s == "adaptive_embedded") {
                ic.method = Method::AdaptiveDormandPrince;
            } else {
                throw ConfigError("integrator.method", "expected \"fixed_rk4\" or \"adaptive\"");
            }
        }
        if (in.contains("step")) ic.step = json_double(in["step"], "integrator.step");
        if (in.contains("abs_tol")) ic.abs_tol = json_double(in["abs_tol"], "integrator.abs_tol");
        if (in.contains("rel_tol")) ic.rel_tol = json_double(in["rel_tol"], "integrator.rel_tol");
        if (in.contains("t_final")) ic.t_final = json_double(in["t_final"], "integrator.t_final");
        if (in.contains("sample_interval")) {
            ic.sample_interval = json_double(in["sample_interval"], "integrator.sample_interval");
        }
        if (in.contains("max_steps")) {
            if (!in["max_steps"].is_number_unsigned()) throw ConfigError("integrator.max_steps", "expected a positive integer");
            ic.max_steps = in["max_steps"].get<std::size_t>();
        }
        // Map each integrator precondition to its field.
        if (!(ic.step > 0.0)) throw ConfigError("integrator.step", "must be positive");
        if (ic.method == Method::AdaptiveDormandPrince) {
            if (!(ic.abs_tol > 0.0 && ic.abs_tol <= 1e-2)) throw ConfigError("integrator.abs_tol", "must lie in (0, 1e-2]");
            if (!(ic.rel_tol > 0.0 && ic.rel_tol <= 1e-2)) throw ConfigError("integrator.rel_tol", "must lie in (0, 1e-2]");
        }
        if (!(ic.t_final > 0.0)) throw ConfigError("integrator.t_final", "must be positive");
        if (!(ic.sample_interval > 0.0) || ic.sample_interval > ic.t_final) {
            throw ConfigError("integrator.sample_interval", "must lie in (0, t_final]");
        }
    }
    try {
        cfg.integrator.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("integrator", e.what());
    }

    if (auto it = doc.find("output"); it != doc.end()) {
        if (!it->is_object()) throw ConfigError("output", "expected an object");
        detail::check_known_keys(*it, {"trajectory", "drift", "summary"}, "output");
        auto str = [&](const char* key, std::string& dst) {
            if (auto f = it->find(key); f != it->end()) {
                if (!f->is_string() || f->get<std::string>().empty()) {
                    throw ConfigError(std::string("output.") + key, "expected a file name");
                }
                dst = f->get<std::string>();
            }
        };
        str("trajectory", cfg.trajectory_file);
        str("drift", cfg.drift_file);
        str("summary", cfg.summary_file);
    }
    return cfg;
}

inline ScenarioConfig load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario(doc);
}

// ---------------------------------------------------------------------------
// Trajectory CSV.

inline std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline nlohmann::json spec_to_json(const HamiltonianSpec<double>& spec)
{
    nlohmann::json j;
    j["n"] = spec.n();
    j["mode"] = std::string(to_string(spec.mode));
    j["alpha"] = spec.alpha;
    j["beta"] = spec.beta;
    j["gamma"] = spec.gamma;
    j["lagrange_coeff"] = spec.lagrange_coeff;
    return j;
}

inline HamiltonianSpec<double> spec_from_json(const nlohmann::json& j)
{
    HamiltonianSpec<double> s;
    s.mode = parse_mode(j.at("mode").get<std::string>());
    s.alpha = j.at("alpha").get<double>();
    s.beta = j.at("beta").get<double>();
    s.gamma = j.at("gamma").get<std::vector<double>>();
    s.lagrange_coeff = j.at("lagrange_coeff").get<double>();
    if (j.at("n").get<int>() != s.n()) throw SchemaError("spec header: gamma length disagrees with n");
    return s;
}

/// First line: "# <schema> <spec json>"; second line: column names; then one
/// row per sample, coordinates in canonical basis order.
inline void write_trajectory(std::ostream& out, const Trajectory& traj)
{
    out << "# " << kTrajectorySchema << ' ' << spec_to_json(traj.spec).dump() << '\n';
    const int n = traj.spec.n();
    out << 't';
    for (const auto& name : build_basis(n).coordinate_names()) out << ',' << name;
    out << '\n';
    for (std::size_t s = 0; s < traj.size(); ++s) {
        out << format_double(traj.times[s]);
        for (double v : traj.states[s].coords()) out << ',' << format_double(v);
        out << '\n';
    }
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline Trajectory read_trajectory(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty trajectory file");
    const std::string prefix = std::string("# ") + kTrajectorySchema + ' ';
    if (line.rfind(prefix, 0) != 0) throw SchemaError("missing schema header '# " + std::string(kTrajectorySchema) + "'");
    Trajectory traj;
    try {
        traj.spec = spec_from_json(nlohmann::json::parse(line.substr(prefix.size())));
    } catch (const SchemaError&) {
        throw;
    } catch (const std::exception& e) {
        throw SchemaError(std::string("malformed spec header: ") + e.what());
    }
    const int n = traj.spec.n();
    if (n < 2) throw SchemaError("spec header: n must be at least 2");
    auto names = build_basis(n).coordinate_names();
    if (!std::getline(in, line)) throw SchemaError("missing column header");
    auto header = split_csv_line(line);
    if (header.size() != names.size() + 1 || header[0] != "t") throw SchemaError("column header does not match n");
    for (std::size_t i = 0; i < names.size(); ++i)
        if (header[i + 1] != names[i]) throw SchemaError("unexpected column '" + header[i + 1] + "'");
    std::size_t row = 2;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw SchemaError("row " + std::to_string(row) + ": wrong number of columns");
        Vector<double> coords;
        double t = 0.0;
        try {
            t = std::stod(cells[0]);
            for (std::size_t i = 1; i < cells.size(); ++i) coords.push_back(std::stod(cells[i]));
        } catch (const std::exception&) {
            throw SchemaError("row " + std::to_string(row) + ": malformed number");
        }
        if (!traj.times.empty() && !(t > traj.times.back())) {
            throw SchemaError("row " + std::to_string(row) + ": sample times must increase");
        }
        traj.times.push_back(t);
        traj.states.emplace_back(n, std::move(coords));
    }
    if (traj.empty()) throw SchemaError("trajectory has no samples");
    return traj;
}

// ---------------------------------------------------------------------------
// Drift outputs.

/// t, then |Q(t) - Q(0)| per registered quantity.
inline void write_drift_csv(std::ostream& out, const DriftReport& r)
{
    out << 't';
    for (const auto& name : r.names) out << ',' << name;
    out << '\n';
    for (std::size_t s = 0; s < r.times.size(); ++s) {
        out << format_double(r.times[s]);
        for (double v : r.abs_drift[s]) out << ',' << format_double(v);
        out << '\n';
    }
}

inline nlohmann::json drift_summary_json(const DriftReport& r)
{
    nlohmann::json q = nlohmann::json::array();
    for (const auto& s : r.summary) {
        q.push_back({{"name", s.name},
                     {"initial", s.initial},
                     {"max_abs_drift", s.max_abs_drift},
                     {"max_relative_drift", s.max_rel_drift},
                     {"mean_relative_drift", s.mean_rel_drift}});
    }
    return {{"samples", r.times.size()}, {"max_relative_drift", r.max_relative_drift()}, {"quantities", q}};
}

inline nlohmann::json run_summary_json(const Trajectory& traj, const DriftReport& r)
{
    nlohmann::json j = drift_summary_json(r);
    j["schema"] = kSummarySchema;
    j["spec"] = spec_to_json(traj.spec);
    j["t_final"] = traj.times.empty() ? 0.0 : traj.times.back();
    j["integrator"] = {{"method", traj.config.method == Method::FixedRk4 ? "fixed_rk4" : "adaptive"},
                       {"steps", traj.stats.steps},
                       {"rejections", traj.stats.rejections},
                       {"evaluations", traj.stats.evaluations}};
    return j;
}

} // namespace kowalevskaya

#endif // KOWALEVSKAYA_IO_HPP_
