#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "deadline/analysis.hpp"
#include "deadline/policy.hpp"
#include "deadline/simulator.hpp"
#include "deadline/solver.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 property/check failure, 2 usage or config error.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    std::ostringstream out;
    out << std::hex << h;
    return out.str();
}

struct Run {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 20260823;
    bool seed_from_flag = false;
    int threads = 0;
    nlohmann::json config;
    std::string config_hash;

    void load() {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file: " + config_path);
        try {
            in >> config;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config file " + config_path + " is not valid JSON: " + e.what());
        }
        config_hash = fnv1a_hex(config.dump());
        if (!seed_from_flag && config.contains("seed"))
            seed = config.at("seed").get<std::uint64_t>();
        std::filesystem::create_directories(out_dir);
    }

    nlohmann::json stamp() const {
        return {{"version", kVersion}, {"config_hash", config_hash}};
    }

    std::ofstream open_csv(const std::string& name) const {
        std::ofstream out(std::filesystem::path(out_dir) / name);
        out.precision(12);
        out << "# version=" << kVersion << " config_hash=" << config_hash << "\n";
        return out;
    }

    void write_json(const std::string& name, nlohmann::json j) const {
        j.update(stamp());
        std::ofstream out(std::filesystem::path(out_dir) / name);
        out << j.dump(2) << "\n";
    }
};

deadline::UtilitySpec spec_from(const nlohmann::json& cfg) {
    if (!cfg.contains("spec")) throw ConfigError("config is missing the \"spec\" object");
    try {
        return deadline::UtilitySpec::from_json(cfg.at("spec"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad \"spec\" object: ") + e.what());
    }
}

deadline::ModelParams params_from(const nlohmann::json& cfg) {
    if (!cfg.contains("params")) throw ConfigError("config is missing the \"params\" object");
    try {
        return deadline::ModelParams::from_json(cfg.at("params"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad \"params\" object: ") + e.what());
    }
}

int cmd_solve(Run& run) {
    const auto spec = spec_from(run.config);
    const auto params = params_from(run.config);
    spec.validate(params.n);
    const auto grid = deadline::solve(spec, params);
    auto csv = run.open_csv("value_grid.csv");
    grid.to_csv(csv);
    nlohmann::json j = grid.to_json();
    run.write_json("value_grid.json", std::move(j));
    return 0;
}

int cmd_cutoffs(Run& run) {
    const auto spec = spec_from(run.config);
    const auto params = params_from(run.config);
    spec.validate(params.n);
    const auto grid = deadline::solve(spec, params);
    const auto table = deadline::cutoffs(grid, spec);
    auto csv = run.open_csv("cutoffs.csv");
    table.to_csv(csv);
    nlohmann::json starts = nlohmann::json::array();
    for (int i = 1; i <= table.n(); ++i)
        for (int j = 1; j <= i; ++j)
            if (table.domain_start(i, j))
                starts.push_back({{"i", i}, {"j", j}, {"t", *table.domain_start(i, j)}});
    run.write_json("cutoffs.json", {{"domain_starts", starts}});
    return 0;
}

int cmd_simulate(Run& run) {
    const auto spec = spec_from(run.config);
    const auto params = params_from(run.config);
    spec.validate(params.n);
    const int x0 = run.config.value("x0", params.n);
    const double t0 = run.config.value("t0", params.t_min);
    const auto n_traces = run.config.value("n_traces", std::size_t{0});
    if (n_traces == 0) throw ConfigError("\"n_traces\" must be a positive integer");
    const auto grid = deadline::solve(spec, params);
    const auto summary =
        deadline::run_batch(grid, spec, x0, t0, n_traces, run.seed,
                            run.threads > 0 ? run.threads : 1);

    auto csv = run.open_csv("traces.csv");
    csv << "trace,seed,opportunities,realized_utility\n";
    const std::size_t keep = std::min<std::size_t>(n_traces, 10000);
    for (std::size_t k = 0; k < keep; ++k) {
        const auto trace =
            deadline::run_agent(grid, spec, x0, t0, deadline::derive_seed(run.seed, k));
        csv << k << "," << trace.seed << "," << trace.opportunities.size() << ","
            << trace.realized_utility << "\n";
    }
    run.write_json("simulate_summary.json",
                   {{"mean", summary.mean},
                    {"std_error", summary.std_error},
                    {"n", summary.n},
                    {"seed", run.seed},
                    {"reference_value", grid.value(t0, x0)},
                    {"traces_in_csv", keep}});
    return 0;
}

int cmd_two_payment(Run& run) {
    const auto spec = spec_from(run.config);
    deadline::TwoPaymentSpec tp;
    tp.base = params_from(run.config);
    if (!run.config.contains("two_payment"))
        throw ConfigError("config is missing the \"two_payment\" object");
    const auto& t = run.config.at("two_payment");
    tp.x = t.value("x", 1);
    tp.x_bar = t.value("x_bar", 1);
    tp.t_bar = t.at("t_bar").get<double>();
    spec.validate(tp.base.n);
    const auto tv = deadline::solve_two_payment(spec, tp);

    auto grid_csv = run.open_csv("two_payment_grid.csv");
    tv.pre_grid().to_csv(grid_csv);

    deadline::CorrelatedBernoulli dist;
    if (run.config.contains("correlated")) {
        const auto& c = run.config.at("correlated");
        dist.p1 = c.value("p1", 0.5);
        dist.p2 = c.value("p2", 0.5);
        dist.c = c.value("c", 0.0);
        dist.validate();
    }

    auto sweep = run.open_csv("double_payment.csv");
    sweep << "t,c,expected,d_expected_dc\n";
    const double c_min = std::max(0.0, dist.p1 - dist.p2);
    const double c_max = std::min(dist.p1, 1.0 - dist.p2);
    const int t_queries = run.config.value("t_queries", 50);
    for (int q = 0; q < t_queries; ++q) {
        const double t_q = tp.base.t_min +
                           (tp.t_bar - tp.base.t_min) * (q + 0.5) / t_queries;
        for (int s = 0; s <= 10; ++s) {
            deadline::CorrelatedBernoulli d = dist;
            d.c = c_min + (c_max - c_min) * s / 10.0;
            const auto v = deadline::double_payment_value(tv, d, t_q);
            sweep << t_q << "," << d.c << "," << v.expected << "," << v.d_expected_dc << "\n";
        }
    }
    run.write_json("two_payment.json",
                   {{"x", tp.x},
                    {"x_bar", tp.x_bar},
                    {"t_bar", tp.t_bar},
                    {"tilde_at_t_min", tv.composite(tp.base.t_min)},
                    {"continuity_gap",
                     std::abs(tv.tilde(tp.t_bar - 1e-9, tp.x) -
                              tv.base_grid().value(tp.t_bar, tp.x + tp.x_bar))}});
    return 0;
}

int cmd_procrastinate(Run& run) {
    const auto spec = spec_from(run.config);
    const auto params = params_from(run.config);
    spec.validate(params.n);
    if (!run.config.contains("believed_zeta"))
        throw ConfigError("config is missing the \"believed_zeta\" object");
    deadline::UtilitySpec believed{
        deadline::ZetaSpec::from_json(run.config.at("believed_zeta")), spec.mu};
    if (!deadline::is_more_concave(spec, believed, 1000))
        throw ConfigError(
            "\"believed_zeta\" must be strictly more concave than the true quality component");
    const double kappa = run.config.value("kappa", 2.0);
    if (!(kappa >= 1.0)) throw ConfigError("\"kappa\" must be >= 1");

    const auto grid = deadline::solve(spec, params);
    const auto believed_grid = deadline::solve(believed, params);
    // The rate-misperceiving agent's dilated clock needs grid coverage
    // below t_min, so solve a wider grid at the same rate.
    deadline::ModelParams wide = params;
    wide.t_min = params.deadline_T - kappa * (params.deadline_T - params.t_min);
    const auto wide_grid = deadline::solve(spec, wide);

    const int theta_points = run.config.value("theta_points", 50);
    const int time_points = run.config.value("time_points", 50);
    auto csv = run.open_csv("policies.csv");
    csv << "theta,t,x,accurate,quality_misperceiver,rate_misperceiver\n";
    bool dominance = true;
    for (int a = 0; a < theta_points; ++a)
        for (int b = 0; b < time_points; ++b)
            for (int x = 1; x <= params.n; ++x) {
                const double theta = (a + 0.5) / theta_points;
                const double t =
                    params.t_min + (params.deadline_T - params.t_min) * b / time_points;
                const int y0 = deadline::saving_rule(grid, spec, theta, t, x);
                const int y1 =
                    deadline::procrastinator_policy(spec, believed, believed_grid, theta, t, x);
                const int y2 = deadline::lambda_misperception_policy(spec, wide_grid, kappa,
                                                                     theta, t, x);
                dominance = dominance && y1 >= y0 && y2 >= y0;
                csv << theta << "," << t << "," << x << "," << y0 << "," << y1 << "," << y2
                    << "\n";
            }
    run.write_json("procrastinate.json", {{"kappa", kappa},
                                          {"theta_points", theta_points},
                                          {"time_points", time_points},
                                          {"saves_at_least_accurate", dominance}});
    if (!dominance) throw CheckFailure("misperceiving policies fell below the accurate policy");
    return 0;
}

int cmd_verify(Run& run) {
    deadline::ToleranceConfig tol;
    if (run.config.contains("tolerances")) {
        const auto& t = run.config.at("tolerances");
        tol.emax_gap_tol = t.value("emax_gap", tol.emax_gap_tol);
        tol.decomposition_tol = t.value("decomposition", tol.decomposition_tol);
        tol.asymptote_tol = t.value("asymptote", tol.asymptote_tol);
        tol.asymptote_lambda_span = t.value("asymptote_lambda_span", tol.asymptote_lambda_span);
        tol.report_lambda_span = t.value("report_lambda_span", tol.report_lambda_span);
    }
    tol.threads = run.threads;

    std::vector<deadline::BatteryInstance> battery;
    const auto sel = run.config.value("battery", std::string("default"));
    if (sel == "default") {
        battery = deadline::default_battery();
    } else if (sel == "custom") {
        for (const auto& j : run.config.at("instances")) {
            deadline::BatteryInstance inst;
            inst.name = j.value("name", "instance-" + std::to_string(battery.size()));
            inst.spec = deadline::UtilitySpec::from_json(j.at("spec"));
            inst.params = deadline::ModelParams::from_json(j.at("params"));
            battery.push_back(std::move(inst));
        }
    } else {
        throw ConfigError("\"battery\" must be \"default\" or \"custom\"");
    }

    static const std::set<std::string> known = {
        "value-shape",         "marginal-value-decreasing", "emax-crosscheck",
        "asymptote",           "preference-reversal",       "cutoff-order",
        "cutoffs-approaching", "decomposition-identity",    "more-concave-dominance"};
    std::optional<std::set<std::string>> filter;
    if (run.config.contains("properties")) {
        filter.emplace();
        for (const auto& p : run.config.at("properties")) {
            const auto id = p.get<std::string>();
            if (!known.count(id)) throw ConfigError("unknown property id: " + id);
            filter->insert(id);
        }
    }

    auto reports = deadline::verify_all(battery, tol);

    if (run.config.value("fault_injection", false)) {
        // Demonstrate the checks are not vacuous: corrupt a solved grid and
        // append the (failing) shape report.
        deadline::BatteryInstance inst = battery.front();
        auto grid = deadline::solve(inst.spec, inst.params);
        grid.perturb(grid.size() / 2, 1, 0.5);
        auto broken = deadline::check_value_shape(grid, inst.spec,
                                                  inst.name + "|fault-injected", tol);
        reports.push_back(std::move(broken));
    }

    bool any_fail = false;
    nlohmann::json arr = nlohmann::json::array();
    std::ostringstream table;
    for (const auto& r : reports) {
        if (filter && !filter->count(r.property_id)) continue;
        any_fail = any_fail || r.status == deadline::PropertyReport::Status::Fail;
        arr.push_back(r.to_json());
        table << (r.status == deadline::PropertyReport::Status::Pass     ? "PASS "
                  : r.status == deadline::PropertyReport::Status::Fail   ? "FAIL "
                                                                         : "SKIP ")
              << r.property_id << " | " << r.instance_descriptor << " | worst="
              << r.worst_violation << " tol=" << r.tolerance
              << (r.notes.empty() ? "" : " | " + r.notes) << "\n";
    }
    run.write_json("verify_report.json", {{"reports", arr}, {"failed", any_fail}});
    std::ofstream txt(std::filesystem::path(run.out_dir) / "verify_report.txt");
    txt << table.str();
    std::cout << table.str();
    return any_fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deadline-spending toolkit: value solver, cutoff policies, Monte Carlo "
                 "simulation, and property verification"};
    app.require_subcommand(1);

    Run run;
    int (*handler)(Run&) = nullptr;
    const struct {
        const char* name;
        const char* help;
        int (*fn)(Run&);
    } commands[] = {
        {"solve", "Solve the value function and export the grid", cmd_solve},
        {"cutoffs", "Export the cutoff curves of a solved grid", cmd_cutoffs},
        {"simulate", "Monte Carlo batch of agents under the optimal policy", cmd_simulate},
        {"two-payment", "Two-payment value, correlation sweep, timing diagnostics",
         cmd_two_payment},
        {"procrastinate", "Accurate vs misperceiving policies on a lattice", cmd_procrastinate},
        {"verify", "Run the property-check battery", cmd_verify},
    };
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", run.config_path, "JSON config file")->required();
        sub->add_option("--out", run.out_dir, "output directory");
        sub->add_option("--seed", run.seed, "master seed (overrides config)")
            ->each([&run](const std::string&) { run.seed_from_flag = true; });
        sub->add_option("--threads", run.threads, "worker thread count");
        sub->callback([&handler, fn = c.fn]() { handler = fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        run.load();
        return handler(run);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "check failure: " << e.what() << "\n";
        return 1;
    }
}
