// Command-line front end.
//
//   kowalevskaya simulate --config <path> --out <dir>
//   kowalevskaya verify --n <int> --trials <int> --seed <int> --out <path>
//   kowalevskaya report <trajectory.csv> [--plot-data <path>]
//
// Exit codes: 0 ok, 2 config/schema error, 3 numerical failure, 4 falsified identity.
// KOWALEVSKAYA_THREADS bounds the worker threads used by `verify`.

#include <kowalevskaya/kowalevskaya.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

namespace kw = kowalevskaya;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitFalsified = 4;

int cmd_simulate(const std::string& config_path, const std::string& out_dir)
{
    kw::ScenarioConfig cfg;
    try {
        cfg = kw::load_scenario(config_path);
    } catch (const kw::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }

    kw::Trajectory traj;
    try {
        traj = kw::integrate(cfg.initial.cast<double>(), cfg.spec.cast<double>(), cfg.integrator);
    } catch (const kw::IntegrationError& e) {
        std::cerr << "integration failed: " << e.what() << '\n';
        return kExitNumeric;
    }
    const kw::DriftReport report = kw::drift_report(traj, traj.spec);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::cerr << "config error: --out: cannot create '" << out_dir << "': " << ec.message() << '\n';
        return kExitConfig;
    }
    auto open = [&](const std::string& name, std::ofstream& f) {
        f.open(fs::path(out_dir) / name, std::ios::binary);
        if (!f) std::cerr << "config error: cannot write '" << (fs::path(out_dir) / name).string() << "'\n";
        return static_cast<bool>(f);
    };
    std::ofstream traj_file, drift_file, summary_file;
    if (!open(cfg.trajectory_file, traj_file) || !open(cfg.drift_file, drift_file) ||
        !open(cfg.summary_file, summary_file)) {
        return kExitConfig;
    }
    kw::write_trajectory(traj_file, traj);
    kw::write_drift_csv(drift_file, report);
    summary_file << kw::run_summary_json(traj, report).dump(2) << '\n';

    std::cout << "samples: " << traj.size() << ", steps: " << traj.stats.steps
              << ", max relative drift: " << std::scientific << std::setprecision(3) << report.max_relative_drift()
              << '\n';
    return kExitOk;
}

struct CheckOutcome
{
    bool passed = true;
    nlohmann::json detail;
};

int cmd_verify(int n, int trials, std::uint64_t seed, const std::string& out_path, const std::string& fault_name)
{
    if (n < 2) {
        std::cerr << "config error: --n: must be at least 2\n";
        return kExitConfig;
    }
    if (trials < 1) {
        std::cerr << "config error: --trials: must be positive\n";
        return kExitConfig;
    }
    kw::LaxFault fault = kw::LaxFault::None;
    if (fault_name == "flip-outer-sign") {
        fault = kw::LaxFault::FlipOuterProductSign;
    } else if (!fault_name.empty()) {
        std::cerr << "config error: --inject-fault: unknown fault '" << fault_name << "'\n";
        return kExitConfig;
    }

    nlohmann::json cert;
    cert["n"] = n;
    cert["trials"] = trials;
    cert["seed"] = seed;
    if (fault != kw::LaxFault::None) cert["injected_fault"] = fault_name;
    nlohmann::json checks = nlohmann::json::object();
    bool all_pass = true;

    // Lax multiplier and the polynomial identity.
    auto calib = kw::calibrate_c(n, std::max(trials, 10), seed, kw::Rational(1), kw::Rational(1, 2), fault);
    if (!calib.c) {
        cert["c"] = nullptr;
        checks["calibration"] = {{"status", "fail"}, {"message", calib.message}};
        if (calib.witness) cert["witness"] = kw::witness_to_json(*calib.witness);
        all_pass = false;
    } else {
        cert["c"] = kw::rational_to_string(*calib.c);
        checks["calibration"] = {{"status", "pass"}, {"message", calib.message}};
        auto pit = kw::pit_verify(n, trials, seed, *calib.c, fault);
        nlohmann::json pj = kw::to_json(pit);
        checks["lax_identity"] = {{"status", pj["status"]}, {"zero_residual_trials", pj["zero_residual_trials"]}};
        if (!pit.passed) {
            cert["witness"] = pj["witness"];
            all_pass = false;
        }
    }

    // Exact involution of the spectral family and conservation of the linear integrals.
    const int exact_points = std::min(trials, 20);
    const kw::StructureTensor C(n);
    {
        CheckOutcome inv, lin;
        int stabilizer_failures = 0;
        const int expected_count = (n - 1) * (n - 2) / 2;
        for (int i = 0; i < exact_points; ++i) {
            auto point = kw::make_trial_point(n, seed ^ 0x5bd1e995ULL, i);
            auto family = kw::spectral_family<kw::Rational>(point.gamma);
            auto m = kw::involution_matrix<kw::Rational>(C, family, point.state);
            if (!m.is_zero() && inv.passed) {
                inv.passed = false;
                cert["witness"] = kw::witness_to_json(point);
                cert["witness"]["involution_matrix"] = kw::matrix_to_json(m);
            }
            auto stab = kw::stabilizer_basis<kw::Rational>(point.gamma);
            if (static_cast<int>(stab.count()) != expected_count) ++stabilizer_failures;
            auto spec = kw::kowalevskaya_spec<kw::Rational>(point.gamma);
            auto dH = kw::hamiltonian_gradient(spec);
            for (std::size_t g = 0; g < stab.count(); ++g) {
                auto value = kw::bracket<kw::Rational>(C, dH, kw::linear_integral_gradient(stab.generators[g]),
                                                       point.state);
                if (!value.is_zero() && lin.passed) {
                    lin.passed = false;
                    cert["witness"] = kw::witness_to_json(point);
                    cert["witness"]["bracket_H_J"] = kw::rational_to_string(value);
                }
            }
        }
        checks["involution"] = {{"status", inv.passed ? "pass" : "fail"}, {"points", exact_points}};
        checks["linear_integrals"] = {{"status", lin.passed && stabilizer_failures == 0 ? "pass" : "fail"},
                                      {"expected_count", expected_count},
                                      {"count_mismatches", stabilizer_failures},
                                      {"points", exact_points}};
        all_pass = all_pass && inv.passed && lin.passed && stabilizer_failures == 0;
    }

    // Casimir count from the corank of the Poisson tensor.
    {
        const int expected = n / 2 + 1;
        int matches = 0, degenerate = 0, mismatches = 0;
        for (int i = 0; i < exact_points; ++i) {
            auto point = kw::make_trial_point(n, seed ^ 0x2545f491ULL, i);
            auto r = kw::casimir_corank(C, point.state.cast<double>());
            if (r.degenerate) {
                ++degenerate;
            } else if (r.corank == expected) {
                ++matches;
            } else {
                ++mismatches;
            }
        }
        const bool ok = mismatches == 0 && matches > 0;
        checks["casimir_corank"] = {{"status", ok ? "pass" : "fail"},
                                    {"expected", expected},
                                    {"matches", matches},
                                    {"degenerate_points", degenerate},
                                    {"mismatches", mismatches}};
        all_pass = all_pass && ok;
    }

    cert["checks"] = checks;
    cert["status"] = all_pass ? "pass" : "fail";

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::cerr << "config error: --out: cannot write '" << out_path << "'\n";
        return kExitConfig;
    }
    out << cert.dump(2) << '\n';
    std::cout << "n = " << n << ", c = " << (cert["c"].is_null() ? std::string("none") : cert["c"].get<std::string>())
              << ", status: " << cert["status"].get<std::string>() << '\n';
    return all_pass ? kExitOk : kExitFalsified;
}

int cmd_report(const std::string& path, const std::string& plot_path)
{
    kw::Trajectory traj;
    try {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            std::cerr << "schema error: cannot open '" << path << "'\n";
            return kExitConfig;
        }
        traj = kw::read_trajectory(in);
    } catch (const kw::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return kExitConfig;
    }
    const kw::DriftReport report = kw::drift_report(traj, traj.spec);

    std::cout << "mode " << kw::to_string(traj.spec.mode) << ", n = " << traj.spec.n() << ", " << traj.size()
              << " samples, t in [" << traj.times.front() << ", " << traj.times.back() << "]\n";
    std::cout << std::left << std::setw(12) << "quantity" << std::right << std::setw(24) << "initial" << std::setw(14)
              << "max drift" << std::setw(14) << "rel drift" << '\n';
    for (const auto& q : report.summary) {
        std::cout << std::left << std::setw(12) << q.name << std::right << std::setw(24) << std::setprecision(15)
                  << std::defaultfloat << q.initial << std::setw(14) << std::scientific << std::setprecision(3)
                  << q.max_abs_drift << std::setw(14) << q.max_rel_drift << '\n';
    }
    std::cout << "max relative drift: " << std::scientific << std::setprecision(3) << report.max_relative_drift()
              << '\n';

    if (!plot_path.empty()) {
        std::ofstream plot(plot_path, std::ios::binary);
        if (!plot) {
            std::cerr << "config error: --plot-data: cannot write '" << plot_path << "'\n";
            return kExitConfig;
        }
        kw::write_drift_csv(plot, report);
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generalized Kowalevskaya systems on e(n+1)*: simulation and exact verification"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write trajectory, drift and summary files");
    simulate->add_option("--config", config_path, "Scenario JSON")->required();
    simulate->add_option("--out", out_dir, "Output directory")->required();

    int n = 0, trials = 0;
    std::uint64_t seed = 1;
    std::string cert_path, fault;
    auto* verify = app.add_subcommand("verify", "Exact verification of the Lax pair and integrability claims");
    verify->add_option("--n", n, "Rank parameter n >= 2")->required();
    verify->add_option("--trials", trials, "Random rational points")->required();
    verify->add_option("--seed", seed, "Seed")->required();
    verify->add_option("--out", cert_path, "Certificate JSON path")->required();
    verify->add_option("--inject-fault", fault, "Test hook: corrupt L deliberately (flip-outer-sign)")
        ->group("");

    std::string traj_path, plot_path;
    auto* report = app.add_subcommand("report", "Summarize conserved-quantity drift of a trajectory file");
    report->add_option("trajectory", traj_path, "Trajectory CSV")->required();
    report->add_option("--plot-data", plot_path, "Write per-sample drift columns here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*simulate) return cmd_simulate(config_path, out_dir);
        if (*verify) return cmd_verify(n, trials, seed, cert_path, fault);
        if (*report) return cmd_report(traj_path, plot_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitConfig;
}
