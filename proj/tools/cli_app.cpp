#include "cli_app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <random>
#include <thread>

#include "CLI11.hpp"

#include "blowup/cpplus.hpp"
#include "blowup/diagnostics.hpp"
#include "blowup/errors.hpp"
#include "blowup/pde.hpp"
#include "blowup/trace_io.hpp"

namespace blowup::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
    Params params;
    IntegratorOptions integ;
    std::string mode = "offset";
    std::string format = "csv";
    std::string out;
    unsigned seed = 20240611u;

    double window_lo = 15.0, window_hi = 50.0;
    std::vector<double> deltas{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

    double t_offset = 1.0;
    std::string form = "shifted";
    std::size_t pde_nr = 101, pde_nt = 101;
    double pde_r_max = 10.0, pde_t_min = 0.0, pde_t_max = 1.0, mask_width = 0.25;

    std::vector<int> m_list{1, 2, 4, 8};
    double eta_star = 1.0, g = 1.0, T = 0.0, cp_r_max = 10.0, probe_r = 0.0, probe_t = 0.1;
    std::size_t cp_nr = 401, cp_nt = 400;

    std::vector<double> alphas;
    int sigma_m = 3;
};

// Thrown for diagnostic failures; carries the report path.
struct DiagnosticFailure {
    std::string path;
};

class Runner {
public:
    explicit Runner(const Options& o) : o_(o) {}

    int dispatch(const std::string& cmd) {
        fs::create_directories(dir());
        if (cmd == "solve") return solve();
        if (cmd == "decay") return decay();
        if (cmd == "zeros") return zeros();
        if (cmd == "energy") return energy();
        if (cmd == "continuity") return continuity();
        if (cmd == "pde-check") return pde_check();
        if (cmd == "cpplus") return cpplus();
        if (cmd == "sweep") return sweep();
        if (cmd == "sigma") return sigma();
        throw ParameterError("unknown command: " + cmd);
    }

private:
    const Options& o_;

    fs::path dir() const { return fs::path(o_.out); }
    std::string path(const std::string& name) const { return (dir() / name).string(); }

    // Tabular artifact in the selected format; returns the file written.
    std::string table(const std::string& stem, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) const {
        if (o_.format == "json") {
            const std::string p = path(stem + ".json");
            write_json(p, table_json(header, rows));
            return p;
        }
        const std::string p = path(stem + ".csv");
        write_csv(p, header, rows);
        return p;
    }

    int finish(const std::string& report_path, bool pass) const {
        if (pass) return 0;
        std::cerr << "diagnostic failure: " << report_path << '\n';
        return 2;
    }

    SolutionTrace trace() const { return integrate(o_.params, o_.integ); }

    bool interior_alpha() const {
        return o_.params.alpha != 0.0 && std::fabs(o_.params.alpha) != equilibrium_amplitude(o_.params.p);
    }

    int solve() {
        const auto tr = trace();
        if (o_.format == "json") {
            std::vector<std::vector<double>> rows;
            rows.reserve(tr.size());
            for (std::size_t i = 0; i < tr.size(); ++i)
                rows.push_back({tr.etas()[i], tr.ws()[i], tr.wps()[i], eval_V(tr.ws()[i], tr.wps()[i], tr.params().p)});
            write_json(path("trace.json"), table_json({"eta", "w", "wp", "V"}, rows));
        } else {
            write_trace_csv(path("trace.csv"), tr);
        }
        write_json(path("trace.meta.json"), trace_metadata(tr, o_.integ));

        // oracle agreement at seeded random points inside the resolved range
        std::mt19937_64 rng(o_.seed);
        std::uniform_real_distribution<double> U(0.0, tr.resolved_until());
        std::vector<double> q;
        for (int i = 0; i < 20; ++i) {
            double x = U(rng);
            if (x <= 0.0) x = tr.resolved_until();
            q.push_back(x);
        }
        const auto orc = derivative_oracle(tr, q);
        double worst = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const double wp = tr.eval(q[i]).wp;
            worst = std::max(worst, std::fabs(orc[i] - wp) / std::max(1.0, std::fabs(wp)));
        }
        CheckReport r;
        r.check_name = "oracle_agreement";
        r.params = params_json(tr.params());
        r.measured = worst;
        r.bound = 10.0 * tr.params().rel_tol;
        r.tolerance = 0.0;
        r.pass = worst <= r.bound;
        r.details = {{"probes", q.size()}, {"seed", o_.seed}};
        const std::string rp = path("solve_report.json");
        write_json(rp, to_json(r));
        return finish(rp, r.pass);
    }

    int decay() {
        const auto tr = trace();
        const std::string rp = path("decay_report.json");
        try {
            const auto fit = decay_fit(tr, o_.window_lo, std::min(o_.window_hi, tr.eta_max()));
            const auto r = decay_report(fit, tr);
            write_json(rp, to_json(r));
            return finish(rp, r.pass);
        } catch (const WindowError& e) {
            CheckReport r;
            r.check_name = "decay_exponent";
            r.params = params_json(tr.params());
            r.measured = std::nan("");
            r.bound = 2.0 / (1.0 - tr.params().p);
            r.tolerance = 0.5;
            r.details = {{"error", e.what()}, {"resolved_until", tr.resolved_until()}};
            write_json(rp, to_json(r));
            return finish(rp, false);
        }
    }

    int zeros() {
        const auto tr = trace();
        const auto census = zero_census(tr, parse_window_mode(o_.mode));
        std::vector<std::vector<double>> rows;
        for (const auto& z : census.records) rows.push_back({z.eta_zero, z.slope, z.window});
        table("zeros", {"eta_zero", "slope", "window"}, rows);
        const auto r = census_report(census, tr, interior_alpha() ? 3 : 0);
        const std::string rp = path("zeros_report.json");
        write_json(rp, to_json(r));
        return finish(rp, r.pass);
    }

    int energy() {
        const auto tr = trace();
        const auto et = energy_trace(tr);
        std::vector<std::vector<double>> rows;
        rows.reserve(et.F.size());
        for (std::size_t i = 0; i < et.F.size(); ++i) rows.push_back({et.etas[i], et.F[i]});
        table("energy", {"eta", "F"}, rows);
        const auto r = energy_report(et, tr);
        const std::string rp = path("energy_report.json");
        write_json(rp, to_json(r));
        return finish(rp, r.pass);
    }

    int continuity() {
        const auto tab = continuity_experiment(o_.params, o_.deltas, o_.integ);
        std::vector<std::vector<double>> rows;
        for (const auto& row : tab.rows) rows.push_back({row.delta, row.distance});
        table("continuity", {"delta", "distance"}, rows);
        const auto r = continuity_report(tab, o_.params);
        const std::string rp = path("continuity_report.json");
        write_json(rp, to_json(r));
        return finish(rp, r.pass);
    }

    int pde_check() {
        const GlobalForm form = o_.form == "literal" ? GlobalForm::literal : GlobalForm::shifted;
        if (o_.form != "literal" && o_.form != "shifted") throw ParameterError("form must be shifted or literal");
        const double s_min = o_.pde_t_min + o_.t_offset;
        if (!(s_min > 0.0)) throw ParameterError("pde-check needs t_min + t_offset > 0");
        Params P = o_.params;
        P.eta_max = std::max(P.eta_max, o_.pde_r_max / std::sqrt(s_min));
        const auto tr = integrate(P, o_.integ);
        const auto r1 = linspace(0.0, o_.pde_r_max, o_.pde_nr), t1 = linspace(o_.pde_t_min, o_.pde_t_max, o_.pde_nt);
        const auto r2 = linspace(0.0, o_.pde_r_max, 2 * o_.pde_nr - 1),
                   t2 = linspace(o_.pde_t_min, o_.pde_t_max, 2 * o_.pde_nt - 1);
        const auto coarse = reconstruct(tr, r1, t1, o_.t_offset, form);
        const auto fine = reconstruct(tr, r2, t2, o_.t_offset, form);
        ZeroMask mask;
        for (const auto& z : tr.zeros()) mask.eta_zeros.push_back(z.eta);
        mask.half_width = o_.mask_width;
        const auto a = pde_residual(coarse, &mask), b = pde_residual(fine, &mask);
        const auto ua = pde_residual(coarse), ub = pde_residual(fine);
        const double ratio = a.max / b.max;
        const auto apriori = apriori_check(fine);
        const std::size_t signed_rows = two_signed_rows(fine);

        std::vector<std::vector<double>> rows;
        rows.reserve(coarse.u.size());
        for (std::size_t it = 0; it < coarse.nt(); ++it)
            for (std::size_t ir = 0; ir < coarse.nr(); ++ir) rows.push_back({coarse.r[ir], coarse.t[it], coarse.at(it, ir)});
        table("field", {"r", "t", "u"}, rows);

        CheckReport res;
        res.check_name = "pde_residual_refinement";
        res.params = params_json(P);
        res.params["t_offset"] = o_.t_offset;
        res.params["form"] = o_.form;
        res.measured = ratio;
        res.bound = 3.0;
        res.tolerance = 0.0;
        res.pass = ratio >= 3.0;
        res.details = {{"masked_residual_coarse", a.max},
                       {"masked_residual_fine", b.max},
                       {"mask_half_width", o_.mask_width},
                       {"unmasked_residual_coarse", ua.max},
                       {"unmasked_residual_fine", ub.max},
                       {"unmasked_ratio", ua.max / ub.max}};
        CheckReport sign;
        sign.check_name = "two_signedness";
        sign.params = res.params;
        sign.measured = static_cast<double>(signed_rows);
        sign.bound = 1.0;
        sign.tolerance = 0.0;
        sign.pass = !interior_alpha() || signed_rows >= 1;
        const bool pass = res.pass && apriori.pass && sign.pass;
        const std::string rp = path("pde_report.json");
        write_json(rp, nlohmann::json::array({to_json(res), to_json(apriori), to_json(sign)}));
        return finish(rp, pass);
    }

    int cpplus() {
        const double p = o_.params.p;
        const int n = o_.params.n;
        const double T = o_.T > 0.0 ? o_.T : default_horizon(o_.g, p);
        if (interior_alpha()) {
            const auto tr = trace();
            for (const auto& z : tr.zeros())
                if (z.eta >= o_.eta_star && z.eta <= std::sqrt(2.0) * o_.eta_star) {
                    std::cerr << "warning: [eta_star, sqrt(2) eta_star] contains a zero of w at " << format_number(z.eta)
                              << "; the inf of |w| there is 0\n";
                    break;
                }
        }
        const auto r = linspace(0.0, o_.cp_r_max, o_.cp_nr);
        std::vector<int> ms = o_.m_list;
        std::sort(ms.begin(), ms.end());
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
        std::vector<std::future<RadialEvolution>> jobs;
        for (int m : ms)
            jobs.push_back(std::async(std::launch::async, [&, m] {
                return solve_cpplus(m, p, n, o_.eta_star, o_.g, T, r, o_.cp_nt);
            }));
        std::vector<RadialEvolution> evs;
        for (auto& j : jobs) evs.push_back(j.get());

        std::vector<std::vector<double>> rows;
        for (const auto& ev : evs)
            for (std::size_t it = 0; it < ev.nt(); ++it)
                for (std::size_t ir = 0; ir < ev.nr(); ++ir)
                    rows.push_back({ev.r[ir], ev.t[it], ev.at(it, ir), static_cast<double>(ev.m)});
        table("evolution", {"r", "t", "u", "m"}, rows);

        auto reports = nlohmann::json::array();
        bool pass = true;
        for (const auto& ev : evs) {
            const auto er = evolution_report(ev, o_.params.abs_tol);
            pass = pass && er.pass;
            reports.push_back(to_json(er));
        }
        const auto cmp = comparison_report(evs, o_.params.abs_tol);
        const auto probe = lower_bound_probe(evs, p, {{o_.probe_r, o_.probe_t}});
        pass = pass && cmp.pass && probe.pass;
        reports.push_back(to_json(cmp));
        reports.push_back(to_json(probe));
        const std::string rp = path("probe_report.json");
        write_json(rp, reports);
        return finish(rp, pass);
    }

    struct SweepRow {
        double alpha = 0, zeros = 0, exponent = std::nan(""), F_inf = std::nan("");
        bool energy_ok = false, containment_ok = false, convergence_ok = false, oscillation_ok = false;
    };

    SweepRow sweep_one(double alpha) const {
        SweepRow row;
        row.alpha = alpha;
        Params P = o_.params;
        P.alpha = alpha;
        try {
            const auto tr = integrate(P, o_.integ);
            row.containment_ok = true;
            const auto et = energy_trace(tr);
            row.F_inf = et.F_inf_estimate;
            row.energy_ok = energy_report(et, tr).pass;
            const auto end = tr.eval(tr.eta_max());
            double far = std::max(std::fabs(end.w), std::fabs(end.wp));
            if (!tr.fully_resolved()) far = std::max({far, tr.tail_w_bound(), tr.tail_wp_bound()});
            row.convergence_ok = far < 1e-2;
            const auto census = zero_census(tr, parse_window_mode(o_.mode));
            row.zeros = static_cast<double>(census.records.size());
            row.oscillation_ok = census_report(census, tr).pass;
            try {
                row.exponent = decay_fit(tr, o_.window_lo, std::min(o_.window_hi, tr.eta_max())).exponent;
            } catch (const WindowError&) {
            }
        } catch (const NumericalError& e) {
            std::cerr << "alpha " << format_number(alpha) << ": " << e.what() << '\n';
        }
        return row;
    }

    int sweep() {
        const double e = equilibrium_amplitude(o_.params.p);
        std::vector<double> alphas = o_.alphas;
        for (double a : alphas)
            if (!(a > 0.0 && a < e)) throw ParameterError("sweep alphas must lie in (0, equilibrium)");
        std::sort(alphas.begin(), alphas.end());
        const std::size_t before = alphas.size();
        alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
        if (alphas.size() != before)
            std::cerr << "warning: removed " << before - alphas.size() << " duplicate alpha value(s)\n";

        std::vector<SweepRow> rows(alphas.size());
        const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
        for (std::size_t start = 0; start < alphas.size(); start += workers) {
            std::vector<std::future<SweepRow>> jobs;
            for (std::size_t i = start; i < std::min(alphas.size(), start + workers); ++i)
                jobs.push_back(std::async(std::launch::async, [this, a = alphas[i]] { return sweep_one(a); }));
            for (std::size_t j = 0; j < jobs.size(); ++j) rows[start + j] = jobs[j].get();
        }
        bool pass = true;
        std::vector<std::vector<double>> out;
        for (const auto& r : rows) {
            pass = pass && r.energy_ok && r.containment_ok && r.convergence_ok && r.oscillation_ok;
            out.push_back({r.alpha, r.zeros, r.exponent, r.F_inf, double(r.energy_ok), double(r.containment_ok),
                           double(r.convergence_ok), double(r.oscillation_ok)});
        }
        const std::string tp = table("sweep",
                                     {"alpha", "zeros", "decay_exponent", "F_inf", "energy_ok", "containment_ok",
                                      "convergence_ok", "oscillation_ok"},
                                     out);
        return finish(tp, pass);
    }

    int sigma() {
        const auto s = sigma_sequence(o_.params.p, o_.sigma_m);
        std::vector<std::vector<double>> rows;
        bool pass = true;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const int m = static_cast<int>(i) + 1;
            const double c = sigma_closed_form(o_.params.p, m);
            pass = pass && std::fabs(s[i] - c) <= 1e-12;
            rows.push_back({static_cast<double>(m), s[i], c});
            std::cout << format_number(s[i]) << '\n';
        }
        const std::string tp = table("sigma", {"m", "sigma", "closed_form"}, rows);
        return finish(tp, pass);
    }
};

}  // namespace

int run(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    std::vector<std::string> copy = args;
    for (auto& a : copy) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

int run(int argc, char** argv) {
    Options o;
    CLI::App app{"Self-similar profiles of a non-Lipschitz semilinear heat equation", "blowup-profiles"};
    app.set_config("--config", "", "key=value config file with [command] sections");
    app.fallthrough();
    app.require_subcommand(1, 1);

    app.add_option("--p", o.params.p, "exponent in (0,1)");
    app.add_option("--n", o.params.n, "space dimension");
    app.add_option("--alpha", o.params.alpha, "initial amplitude w(0)");
    app.add_option("--rel-tol", o.params.rel_tol, "relative tolerance");
    app.add_option("--abs-tol", o.params.abs_tol, "absolute tolerance");
    app.add_option("--eta-max", o.params.eta_max, "integration horizon");
    app.add_option("--max-steps", o.integ.max_steps, "accepted-step budget");
    app.add_option("--resolution-floor", o.integ.resolution_floor, "amplitude below which the tail is settled");
    app.add_option("--mode", o.mode, "crossing window reading")->check(CLI::IsMember({"offset", "literal"}));
    app.add_option("--format", o.format, "tabular output format")->check(CLI::IsMember({"csv", "json"}));
    auto* out_opt = app.add_option("--out", o.out, "output directory (default: $BLOWUP_PROFILES_OUT or ./out)");
    app.add_option("--seed", o.seed, "seed for probe selection");

    auto* solve = app.add_subcommand("solve", "integrate one profile");
    auto* decay = app.add_subcommand("decay", "peak-envelope decay fit");
    decay->add_option("--window-lo", o.window_lo);
    decay->add_option("--window-hi", o.window_hi);
    auto* zeros = app.add_subcommand("zeros", "zero census");
    auto* energy = app.add_subcommand("energy", "energy trace");
    auto* cont = app.add_subcommand("continuity", "continuous dependence on alpha");
    cont->add_option("--deltas", o.deltas)->delimiter(',');
    auto* pde = app.add_subcommand("pde-check", "reconstruct u and check the PDE");
    pde->add_option("--t-offset", o.t_offset);
    pde->add_option("--form", o.form)->check(CLI::IsMember({"shifted", "literal"}));
    pde->add_option("--nr", o.pde_nr);
    pde->add_option("--nt", o.pde_nt);
    pde->add_option("--r-max", o.pde_r_max);
    pde->add_option("--t-min", o.pde_t_min);
    pde->add_option("--t-max", o.pde_t_max);
    pde->add_option("--mask-width", o.mask_width);
    auto* cp = app.add_subcommand("cpplus", "regularized comparison problems");
    cp->add_option("--m-list", o.m_list)->delimiter(',');
    cp->add_option("--eta-star", o.eta_star);
    cp->add_option("--g", o.g);
    cp->add_option("--T", o.T, "horizon; 0 picks the default");
    cp->add_option("--nr", o.cp_nr);
    cp->add_option("--nt", o.cp_nt);
    cp->add_option("--r-max", o.cp_r_max);
    cp->add_option("--probe-r", o.probe_r);
    cp->add_option("--probe-t", o.probe_t);
    auto* sw = app.add_subcommand("sweep", "solve and diagnose over an alpha grid");
    sw->add_option("--alphas", o.alphas)->delimiter(',');
    sw->add_option("--window-lo", o.window_lo);
    sw->add_option("--window-hi", o.window_hi);
    auto* sg = app.add_subcommand("sigma", "bootstrap exponents");
    sg->add_option("--m", o.sigma_m);
    (void)solve;
    (void)zeros;
    (void)energy;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (out_opt->count() == 0) {
        const char* env = std::getenv("BLOWUP_PROFILES_OUT");
        o.out = env && *env ? env : "out";
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        validate(o.params);
        Runner runner(o);
        return runner.dispatch(cmd);
    } catch (const ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return 1;
    } catch (const GridError& e) {
        std::cerr << "grid error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        const std::string p = (fs::path(o.out) / (cmd + "_error.json")).string();
        try {
            CheckReport r;
            r.check_name = cmd;
            r.params = params_json(o.params);
            r.measured = std::nan("");
            r.bound = std::nan("");
            r.tolerance = std::nan("");
            r.details = {{"error", e.what()}};
            write_json(p, to_json(r));
            std::cerr << "diagnostic failure: " << p << '\n';
        } catch (...) {
        }
        return 2;
    }
}

}  // namespace blowup::cli
