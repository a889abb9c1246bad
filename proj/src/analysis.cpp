#include "deadline/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <thread>

#include "deadline/policy.hpp"
#include "deadline/solver.hpp"

namespace deadline {

namespace {

const char* const kPropertyIds[] = {
    "value-shape",         "marginal-value-decreasing", "emax-crosscheck",
    "asymptote",           "preference-reversal",       "cutoff-order",
    "cutoffs-approaching", "decomposition-identity",    "more-concave-dominance",
};

template <typename F>
double simpson_rec(const F& f, double a, double fa, double b, double fb, double m, double fm,
                   double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

PropertyReport make_report(const std::string& id, const std::string& name,
                           double worst, double tol, std::string notes = {}) {
    PropertyReport r;
    r.property_id = id;
    r.instance_descriptor = name;
    r.worst_violation = worst;
    r.tolerance = tol;
    r.status = worst <= tol ? PropertyReport::Status::Pass : PropertyReport::Status::Fail;
    r.notes = std::move(notes);
    return r;
}

PropertyReport skipped_report(const std::string& id, const std::string& name, std::string why) {
    PropertyReport r;
    r.property_id = id;
    r.instance_descriptor = name;
    r.status = PropertyReport::Status::Skipped;
    r.notes = std::move(why);
    return r;
}

// Cutoff value at a stored time, absent where the formula's argument
// exceeds 1 (computed locally so deliberately corrupted grids can be fed
// through these checks without tripping construction-time validation).
std::optional<double> phi_at(const ValueGrid& g, const UtilitySpec& spec, std::size_t k, int i,
                             int j) {
    const double r = (g.at(k, j) - g.at(k, j - 1)) / (spec.mu(i - j + 1) - spec.mu(i - j));
    if (r > 1.0) return std::nullopt;
    return spec.zeta.inverse(std::max(r, 0.0));
}

// Integral of (1 - zeta^{-1}(v)) over [a, 1].
double tail_integral(const ZetaSpec& zeta, double a) {
    a = std::clamp(a, 0.0, 1.0);
    return adaptive_simpson([&](double v) { return 1.0 - zeta.inverse(v); }, a, 1.0, 1e-11);
}

std::optional<ZetaSpec> more_concave_partner(const ZetaSpec& z) {
    switch (z.family()) {
        case ZetaFamily::Power: return ZetaSpec::power(0.5 * z.param());
        case ZetaFamily::FlippedPower: return ZetaSpec::flipped_power(z.param() + 1.0);
        case ZetaFamily::Tabulated: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

nlohmann::json PropertyReport::to_json() const {
    return {{"property", property_id},
            {"instance", instance_descriptor},
            {"status", status_name(status)},
            {"worst_violation", worst_violation},
            {"tolerance", tolerance},
            {"notes", notes}};
}

std::string PropertyReport::status_name(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Skipped: return "skipped";
    }
    return "unknown";
}

std::vector<BatteryInstance> default_battery() {
    struct ZetaChoice { const char* tag; ZetaSpec z; };
    struct MuChoice { const char* tag; MuSpec m; };
    const ZetaChoice zetas[] = {{"theta", ZetaSpec::power(1.0)},
                                {"theta^2", ZetaSpec::power(2.0)},
                                {"1-(1-theta)^2", ZetaSpec::flipped_power(2.0)}};
    const MuChoice mus[] = {{"sqrt", MuSpec::power(0.5)}, {"x^0.7", MuSpec::power(0.7)}};
    const int ns[] = {1, 2, 4};
    const double lambdas[] = {0.5, 2.0};

    std::vector<BatteryInstance> battery;
    for (const auto& z : zetas)
        for (const auto& m : mus)
            for (int n : ns)
                for (double lambda : lambdas) {
                    ModelParams p;
                    p.lambda = lambda;
                    p.deadline_T = 10.0;
                    p.t_min = 10.0 - 20.0 / lambda;
                    p.dt = 1e-3 / lambda;
                    p.n = n;
                    BatteryInstance inst;
                    inst.name = std::string("zeta=") + z.tag + "|mu=" + m.tag +
                                "|n=" + std::to_string(n) + "|lambda=" +
                                (lambda == 0.5 ? "0.5" : "2");
                    inst.spec = {z.z, m.m};
                    inst.params = p;
                    battery.push_back(std::move(inst));
                }
    return battery;
}

double effective_discount(double lambda, double T, double t) {
    if (t > T) throw std::domain_error("effective_discount: t must not exceed T");
    return 1.0 - std::exp(-lambda * (T - t));
}

EulerRatio euler_ratio_diagnostic(const ValueGrid& grid, const UtilitySpec& spec, double t) {
    const auto& p = grid.params();
    if (!(t < p.deadline_T))
        throw std::domain_error("euler_ratio_diagnostic: t must precede the deadline");
    EulerRatio r;
    r.analytic = 1.0 / effective_discount(p.lambda, p.deadline_T, t);
    const int n = grid.n();
    const auto row = grid.value_row(t);
    const double num = emax(spec, row, n, p.quad_points).value -
                       emax(spec, row, n - 1, p.quad_points).value;
    const double den = row[static_cast<std::size_t>(n)] - row[static_cast<std::size_t>(n) - 1];
    r.empirical = num / den;
    return r;
}

PropertyReport check_value_shape(const ValueGrid& g, const UtilitySpec& spec,
                                 const std::string& name, const ToleranceConfig& cfg) {
    const int n = g.n();
    const std::size_t last = g.size() - 1;
    const double mu1 = spec.mu(1);
    double worst = -1.0;
    auto hit = [&](double breach) { worst = std::max(worst, breach); };
    for (int i = 0; i <= n; ++i) hit(std::abs(g.at(last, i)));  // V(T, .) = 0
    for (std::size_t k = 0; k < g.size(); ++k) {
        hit(std::abs(g.at(k, 0)));  // V(t, 0) = 0
        for (int i = 1; i <= n; ++i) {
            if (k < last) {
                hit(cfg.strict_margin - g.at(k, i));                    // positivity
                hit(g.at(k + 1, i) - g.at(k, i) + cfg.strict_margin);   // decreasing in t
            }
            hit(g.at(k, i - 1) - g.at(k, i) + (k < last ? cfg.strict_margin : 0.0));
            if (i < n)  // discrete concavity in the stock
                hit((g.at(k, i + 1) - g.at(k, i)) - (g.at(k, i) - g.at(k, i - 1)) +
                    (k < last ? cfg.strict_margin : 0.0));
            hit(g.at(k, i) - static_cast<double>(i) * mu1 + (k < last ? cfg.strict_margin : 0.0));
            if (k > 0 && k < last)  // concavity in t: second difference <= 1e-9
                hit(g.at(k - 1, i) - 2.0 * g.at(k, i) + g.at(k + 1, i) - 1e-9);
        }
    }
    return make_report("value-shape", name, worst, 0.0);
}

PropertyReport check_marginal_value_decreasing(const ValueGrid& g, const std::string& name,
                                               const ToleranceConfig& cfg) {
    const int n = g.n();
    const std::size_t last = g.size() - 1;
    const double away = g.params().deadline_T - 1.0 / g.params().lambda;
    double worst = -1.0;
    for (std::size_t k = 0; k + 1 <= last; ++k)
        for (int i = 0; i < n; ++i) {
            const double now = g.at(k, i + 1) - g.at(k, i);
            const double later = g.at(k + 1, i + 1) - g.at(k + 1, i);
            worst = std::max(worst, (later - now) - 1e-9);
            if (g.times()[k + 1] <= away)
                worst = std::max(worst, cfg.strict_margin - (now - later));
        }
    return make_report("marginal-value-decreasing", name, worst, 0.0);
}

PropertyReport check_emax_crosscheck(const ValueGrid& g, const std::string& name,
                                     const ToleranceConfig& cfg) {
    return make_report("emax-crosscheck", name, g.worst_emax_gap(), cfg.emax_gap_tol,
                       "worst disagreement of the two expectation routes over all solver steps");
}

PropertyReport check_asymptote(const ValueGrid& long_grid, const UtilitySpec& spec,
                               const std::string& name, const ToleranceConfig& cfg) {
    const auto& p = long_grid.params();
    const double mu1 = spec.mu(1);
    double worst = 0.0;
    for (int i = 1; i <= long_grid.n(); ++i)
        worst = std::max(worst, static_cast<double>(i) * mu1 - long_grid.value(p.t_min, i));
    std::string notes = "gate at lambda*(T-t_min)=" +
                        std::to_string(p.lambda * (p.deadline_T - p.t_min));
    const double report_t = p.deadline_T - cfg.report_lambda_span / p.lambda;
    if (report_t >= p.t_min) {
        double gap = 0.0;
        for (int i = 1; i <= long_grid.n(); ++i)
            gap = std::max(gap, static_cast<double>(i) * mu1 - long_grid.value(report_t, i));
        notes += "; informational gap at lambda span " + std::to_string(cfg.report_lambda_span) +
                 " = " + std::to_string(gap);
    }
    return make_report("asymptote", name, worst, cfg.asymptote_tol, std::move(notes));
}

PropertyReport check_preference_reversal(const ValueGrid& g, const std::string& name,
                                         const ToleranceConfig& cfg) {
    if (g.n() < 2)
        return skipped_report("preference-reversal", name,
                              "needs a stock of at least 2 (compares x=1 now vs x=2 later)");
    const auto& p = g.params();
    const double t_bar = 0.25 * (p.deadline_T - p.t_min);
    std::vector<double> gvals;
    std::vector<double> times;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double t = g.times()[k];
        if (t + t_bar > p.deadline_T + 1e-12) break;
        times.push_back(t);
        gvals.push_back(g.value(t, 1) - g.value(t + t_bar, 2));
    }
    if (gvals.size() < 3)
        return skipped_report("preference-reversal", name, "grid too short for the delay test");
    double worst = -1.0;
    worst = std::max(worst, gvals.front());   // negative deep in the past
    worst = std::max(worst, -gvals.back());   // positive at T - t_bar
    for (std::size_t k = 0; k + 1 < gvals.size(); ++k)
        worst = std::max(worst, gvals[k] - gvals[k + 1] + cfg.strict_margin);  // increasing
    int sign = 0, changes = 0;
    for (double v : gvals) {
        if (std::abs(v) <= 1e-12) continue;
        const int s = v > 0.0 ? 1 : -1;
        if (sign != 0 && s != sign) ++changes;
        sign = s;
    }
    worst = std::max(worst, changes == 1 ? -1.0 : 1.0);
    return make_report("preference-reversal", name, worst, 0.0,
                       "sign changes observed: " + std::to_string(changes));
}

PropertyReport check_cutoff_order(const ValueGrid& g, const UtilitySpec& spec,
                                  const std::string& name, const ToleranceConfig& cfg) {
    (void)cfg;
    const int n = g.n();
    const std::size_t last = g.size() - 1;
    double worst = -1.0;
    for (int i = 1; i <= n; ++i) {
        const auto at_T = phi_at(g, spec, last, i, i);
        worst = std::max(worst, at_T ? std::abs(*at_T) : 1.0);  // phi(T) = 0
        for (std::size_t k = 0; k <= last; ++k) {
            if (!phi_at(g, spec, k, i, i)) worst = std::max(worst, 1.0);  // phi_{i,i} everywhere
            for (int j = 1; j <= i; ++j) {
                const auto v = phi_at(g, spec, k, i, j);
                if (!v) continue;
                worst = std::max(worst, *v - 1.0);
                worst = std::max(worst, -*v);
                if (k < last) {
                    const auto nxt = phi_at(g, spec, k + 1, i, j);
                    if (nxt) worst = std::max(worst, *nxt - *v - 1e-12);  // decreasing in t
                }
                if (i < n) {
                    const auto up = phi_at(g, spec, k, i + 1, j);
                    const auto diag = phi_at(g, spec, k, i + 1, j + 1);
                    if (up) worst = std::max(worst, *v - *up);     // phi_{i,j} < phi_{i+1,j}
                    if (diag) worst = std::max(worst, *diag - *v); // phi_{i+1,j+1} < phi_{i,j}
                }
            }
        }
    }
    return make_report("cutoff-order", name, worst, 0.0);
}

PropertyReport check_cutoffs_approaching(const ValueGrid& g, const UtilitySpec& spec,
                                         const std::string& name, const ToleranceConfig& cfg) {
    (void)cfg;
    if (!is_log_concave_zeta(spec, 1000))
        return skipped_report("cutoffs-approaching", name,
                              "hypothesis not met: quality component is not log-concave");
    if (g.n() < 2)
        return skipped_report("cutoffs-approaching", name, "needs at least two resource levels");
    double worst = -1.0;
    bool compared = false;
    for (int i = 1; i < g.n(); ++i)
        for (int j = 1; j <= i; ++j)
            for (std::size_t k = 0; k + 1 < g.size(); ++k) {
                const auto a0 = phi_at(g, spec, k, i + 1, j), b0 = phi_at(g, spec, k, i, j);
                const auto a1 = phi_at(g, spec, k + 1, i + 1, j), b1 = phi_at(g, spec, k + 1, i, j);
                if (!a0 || !b0 || !a1 || !b1) continue;
                compared = true;
                worst = std::max(worst, (*a1 - *b1) - (*a0 - *b0) + 1e-12);
            }
    if (!compared)
        return skipped_report("cutoffs-approaching", name, "no common domain on this grid");
    return make_report("cutoffs-approaching", name, worst, 0.0);
}

PropertyReport check_decomposition(const ValueGrid& g, const UtilitySpec& spec,
                                   const std::string& name, const ToleranceConfig& cfg) {
    const int n = g.n();
    const std::size_t last = g.size() - 1;
    const double lambda = g.params().lambda;
    double worst = 0.0;
    const int samples = 25;
    for (int q = 1; q <= samples; ++q) {
        const std::size_t k = std::max<std::size_t>(
            1, std::min(last - 1, last * static_cast<std::size_t>(q) / (samples + 1)));
        for (int i = 0; i < n; ++i) {
            double rhs = 0.0;
            for (int m = 0; m <= i; ++m) {
                const double dmu = spec.mu(m + 1) - spec.mu(m);
                const double upper =
                    m == i ? 1.0
                           : std::min((g.at(k, i - m) - g.at(k, i - m - 1)) / dmu, 1.0);
                const double lower = std::min((g.at(k, i + 1 - m) - g.at(k, i - m)) / dmu, 1.0);
                rhs -= dmu * (tail_integral(spec.zeta, lower) - tail_integral(spec.zeta, upper));
            }
            rhs *= lambda;
            const double fd = ((g.at(k + 1, i + 1) - g.at(k + 1, i)) -
                               (g.at(k - 1, i + 1) - g.at(k - 1, i))) /
                              (g.times()[k + 1] - g.times()[k - 1]);
            worst = std::max(worst, std::abs(rhs - fd));
        }
    }
    (void)cfg;
    return make_report("decomposition-identity", name, worst, cfg.decomposition_tol);
}

PropertyReport check_more_concave(const ValueGrid& g, const UtilitySpec& spec,
                                  const std::string& name, const ToleranceConfig& cfg) {
    const auto partner = more_concave_partner(spec.zeta);
    if (!partner)
        return skipped_report("more-concave-dominance", name,
                              "no closed-form more-concave partner for this quality family");
    const UtilitySpec wspec{*partner, spec.mu};
    if (!is_more_concave(spec, wspec, 1000))
        return skipped_report("more-concave-dominance", name,
                              "partner failed the more-concave precondition");
    ValueGrid w;
    try {
        w = solve(wspec, g.params());
    } catch (const std::exception& e) {
        return skipped_report("more-concave-dominance", name,
                              std::string("comparison solve failed: ") + e.what());
    }
    const int n = g.n();
    const std::size_t last = g.size() - 1;
    double worst = -1.0;
    for (std::size_t k = 0; k < last; ++k)
        for (int i = 1; i <= n; ++i)
            worst = std::max(worst, (g.at(k, i) - g.at(k, i - 1)) -
                                        (w.at(k, i) - w.at(k, i - 1)));

    std::string notes;
    if (n >= 2) {
        // Cutoff crossover: find a pair (i, j), j < i, whose comparison
        // cutoff psi is born inside the grid, and check phi - psi changes
        // sign exactly once from negative (at the birth time) to positive
        // (near the deadline).
        bool found = false;
        for (int i = 2; i <= n && !found; ++i)
            for (int j = 1; j < i && !found; ++j) {
                std::size_t birth = 0;
                while (birth < g.size() && !phi_at(w, wspec, birth, i, j)) ++birth;
                if (birth == 0 || birth >= g.size()) continue;  // psi defined (or absent) everywhere
                int sign = 0;
                std::size_t flip = 0;
                for (std::size_t k = birth; k < g.size() - 1; ++k) {
                    const auto phi = phi_at(g, spec, k, i, j);
                    const auto psi = phi_at(w, wspec, k, i, j);
                    if (!phi || !psi) continue;
                    const double d = *phi - *psi;
                    if (std::abs(d) <= 1e-12) continue;
                    const int s = d > 0 ? 1 : -1;
                    if (sign == 0 && s > 0) break;  // must start negative at the birth time
                    if (sign < 0 && s > 0) { flip = k; }
                    sign = s;
                }
                if (sign > 0 && flip > 0) {
                    found = true;
                    notes = "crossover of the (" + std::to_string(i) + "," + std::to_string(j) +
                            ") cutoffs near t=" + std::to_string(g.times()[flip]);
                }
            }
        if (!found) {
            worst = std::max(worst, 1.0);
            notes = "no cutoff crossover located on this grid";
        }
    } else {
        notes = "crossover needs n >= 2; marginal dominance checked only";
    }
    (void)cfg;
    return make_report("more-concave-dominance", name, worst, 0.0, std::move(notes));
}

namespace {

std::vector<PropertyReport> run_instance(const BatteryInstance& inst, const ToleranceConfig& cfg,
                                         const ValueGrid* long_grid,
                                         const std::string& long_grid_error) {
    std::vector<PropertyReport> out;
    ValueGrid grid;
    try {
        grid = solve(inst.spec, inst.params);
    } catch (const std::exception& e) {
        for (const char* id : kPropertyIds)
            out.push_back(skipped_report(id, inst.name, std::string("solver failure: ") + e.what()));
        return out;
    }
    out.push_back(check_value_shape(grid, inst.spec, inst.name, cfg));
    out.push_back(check_marginal_value_decreasing(grid, inst.name, cfg));
    out.push_back(check_emax_crosscheck(grid, inst.name, cfg));
    if (long_grid)
        out.push_back(check_asymptote(*long_grid, inst.spec, inst.name, cfg));
    else
        out.push_back(skipped_report("asymptote", inst.name,
                                     "deep-grid solve failed: " + long_grid_error));
    out.push_back(check_preference_reversal(grid, inst.name, cfg));
    out.push_back(check_cutoff_order(grid, inst.spec, inst.name, cfg));
    out.push_back(check_cutoffs_approaching(grid, inst.spec, inst.name, cfg));
    out.push_back(check_decomposition(grid, inst.spec, inst.name, cfg));
    out.push_back(check_more_concave(grid, inst.spec, inst.name, cfg));
    return out;
}

}  // namespace

std::vector<PropertyReport> verify_all(const std::vector<BatteryInstance>& battery,
                                       const ToleranceConfig& cfg) {
    if (battery.empty()) throw std::invalid_argument("verify_all: battery must be non-empty");
    int threads = cfg.threads > 0 ? cfg.threads
                                  : std::max(1u, std::thread::hardware_concurrency());

    // Deep grids for the asymptote check depend only on the utility spec
    // and lambda*(T - t): solve each distinct spec once at lambda = 1 with
    // the largest stock requested (the system is triangular in the stock
    // index, so smaller stocks read the same rows).
    std::map<std::string, int> deep_n;
    for (const auto& inst : battery) {
        auto& slot = deep_n[inst.spec.to_json().dump()];
        slot = std::max(slot, inst.params.n);
    }
    struct DeepEntry {
        std::optional<ValueGrid> grid;
        std::string error;
    };
    std::map<std::string, DeepEntry> deep;
    {
        std::vector<std::pair<const std::string*, int>> keys;
        for (const auto& [key, n] : deep_n) {
            deep.emplace(key, DeepEntry{});
            keys.emplace_back(&key, n);
        }
        std::atomic<std::size_t> next{0};
        auto deep_worker = [&]() {
            for (std::size_t w = next.fetch_add(1); w < keys.size(); w = next.fetch_add(1)) {
                const auto& [key, n] = keys[w];
                ModelParams p;
                p.lambda = 1.0;
                p.deadline_T = 0.0;
                p.t_min = -cfg.asymptote_lambda_span;
                p.dt = 0.1;
                p.n = n;
                auto& entry = deep.at(*key);
                try {
                    entry.grid = solve(UtilitySpec::from_json(nlohmann::json::parse(*key)), p);
                } catch (const std::exception& e) {
                    entry.error = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 1; w < threads; ++w) pool.emplace_back(deep_worker);
        deep_worker();
        for (auto& th : pool) th.join();
    }

    std::vector<std::vector<PropertyReport>> slots(battery.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t w = next.fetch_add(1); w < battery.size(); w = next.fetch_add(1)) {
            const auto& entry = deep.at(battery[w].spec.to_json().dump());
            slots[w] = run_instance(battery[w], cfg, entry.grid ? &*entry.grid : nullptr,
                                    entry.error);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < threads; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<PropertyReport> reports;
    for (auto& s : slots)
        for (auto& r : s) reports.push_back(std::move(r));
    std::stable_sort(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
        if (a.property_id != b.property_id) return a.property_id < b.property_id;
        return a.instance_descriptor < b.instance_descriptor;
    });
    return reports;
}

}  // namespace deadline
