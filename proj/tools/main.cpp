#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfp/accel.hpp"
#include "cfp/certify.hpp"
#include "cfp/experiment.hpp"
#include "cfp/lower_bound.hpp"
#include "cfp/lte.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitInfeasible = 3;

void print_vector(const char* name, const cfp::Vector& v) {
    char buf[40];
    std::printf("%s=", name);
    for (cfp::Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g", v[i]);
        std::printf("%s%s", i ? "," : "", buf);
    }
    std::printf("\n");
}

/// Re-expands a vector over the reduced stations back to the full station
/// list, filling dropped (empty) stations with `fill`.
cfp::Vector expand(const cfp::Vector& v, const std::vector<cfp::Index>& kept,
                   cfp::Index full_dim, double fill) {
    cfp::Vector out = cfp::Vector::Constant(full_dim, fill);
    for (std::size_t ii = 0; ii < kept.size(); ++ii)
        out[kept[ii]] = v[static_cast<cfp::Index>(ii)];
    return out;
}

struct SolveResult {
    cfp::IterationTrace trace;
    double residual;
};

SolveResult solve_mapping(const cfp::PositiveConcaveMapping& T,
                          const cfp::NonNegMatrix& bound, bool accelerated, double tol,
                          int max_iter) {
    cfp::IterationOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    const cfp::Vector x1 = cfp::Vector::Zero(T.dim());
    cfp::IterationTrace trace;
    if (accelerated) {
        const auto A = cfp::build_accelerated(T, cfp::closed_form_matrix(bound.entries()));
        trace = cfp::iterate_accelerated(A, x1, opts);
    } else {
        trace = cfp::iterate_standard(T, x1, opts);
    }
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (trace.status == cfp::IterationStatus::Converged)
        residual = (T(trace.last()) - trace.last()).cwiseAbs().maxCoeff();
    return {std::move(trace), residual};
}

int cmd_gen_scenario(const cfp::ScenarioParams& params, std::uint64_t seed,
                     const std::string& out, const std::string& gains_csv) {
    const cfp::NetworkScenario scn = cfp::generate_scenario(params, seed);
    cfp::save_scenario(scn, out);
    if (!gains_csv.empty()) cfp::save_gains_csv(scn, gains_csv);
    const auto attached = scn.users_of();
    std::size_t empty = 0;
    for (const auto& a : attached) empty += a.empty();
    std::printf("scenario=%s\nstations=%lld\nusers=%lld\nempty_stations=%zu\nseed=%llu\n",
                out.c_str(), static_cast<long long>(scn.n_stations()),
                static_cast<long long>(scn.n_users()), empty,
                static_cast<unsigned long long>(seed));
    return kExitOk;
}

int cmd_certify(const std::string& scenario_path, std::optional<double> capacity) {
    const cfp::NetworkScenario scn = cfp::load_scenario(scenario_path);
    const auto reduced = cfp::drop_empty_stations(scn);
    const auto mprime = cfp::closed_form_mprime(reduced.scenario);
    const auto m_p = cfp::power_scaled_bound(mprime, reduced.scenario.power_w);
    const auto T = cfp::load_mapping(reduced.scenario);

    cfp::Certificate cert = cfp::certify_necessary(T, cfp::closed_form_matrix(m_p.entries()));
    if (cert.verdict == cfp::Verdict::Unknown && cert.lower_bound_fixed_point) {
        // the load model satisfies the iff theorem: rho < 1 proves existence
        cert = cfp::certify_sufficient_affine(T, cfp::closed_form_matrix(m_p.entries()),
                                              T(cfp::Vector::Zero(T.dim())), 1, 0,
                                              /*model_specific_iff=*/true);
    }
    if (capacity && cert.lower_bound_fixed_point) {
        cert = cfp::capacity_prune(
            cert, cfp::Vector::Constant(reduced.scenario.n_stations(), *capacity));
    }
    std::fputs(cfp::to_text(cert).c_str(), stdout);
    return cert.verdict == cfp::Verdict::Infeasible ? kExitInfeasible : kExitOk;
}

int cmd_solve_load(const std::string& scenario_path, bool accelerated, double tol,
                   int max_iter, double load_cap) {
    const cfp::NetworkScenario scn = cfp::load_scenario(scenario_path);
    const auto reduced = cfp::drop_empty_stations(scn);
    const auto mprime = cfp::closed_form_mprime(reduced.scenario);
    const auto m_p = cfp::power_scaled_bound(mprime, reduced.scenario.power_w);
    const auto T = cfp::load_mapping(reduced.scenario, load_cap);

    const SolveResult res = solve_mapping(T, m_p, accelerated, tol, max_iter);
    std::printf("status=%s\niterations=%d\n", cfp::to_string(res.trace.status),
                res.trace.steps());
    if (res.trace.status != cfp::IterationStatus::Converged) return kExitNumerical;
    std::printf("residual=%.6g\n", res.residual);
    print_vector("load", expand(res.trace.last(), reduced.kept, scn.n_stations(), 0.0));
    return kExitOk;
}

int cmd_solve_power(const std::string& scenario_path, bool accelerated, double tol,
                    int max_iter, double power_cap, const std::string& load_csv) {
    const cfp::NetworkScenario scn = cfp::load_scenario(scenario_path);
    const auto reduced = cfp::drop_empty_stations(scn);
    const auto mprime = cfp::closed_form_mprime(reduced.scenario);

    cfp::Vector load;
    if (!load_csv.empty()) {
        std::ifstream f(load_csv);
        if (!f) throw cfp::IoError("cannot open load file: " + load_csv);
        std::vector<double> vals;
        std::string cell;
        while (std::getline(f, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<cfp::Index>(vals.size()) == scn.n_stations()) {
            // full-dimension vector: restrict to the loaded stations
            load.resize(static_cast<cfp::Index>(reduced.kept.size()));
            for (std::size_t ii = 0; ii < reduced.kept.size(); ++ii)
                load[static_cast<cfp::Index>(ii)] = vals[static_cast<std::size_t>(reduced.kept[ii])];
        } else if (static_cast<cfp::Index>(vals.size()) ==
                   reduced.scenario.n_stations()) {
            load = Eigen::Map<const cfp::Vector>(vals.data(),
                                                 static_cast<cfp::Index>(vals.size()));
        } else {
            throw cfp::FormatError("load vector length matches neither the full nor the "
                                   "reduced station count");
        }
    } else {
        // the reverse problem per the experiments: induce the load produced by
        // the scenario's own power allocation
        const auto m_p = cfp::power_scaled_bound(mprime, reduced.scenario.power_w);
        const auto T_load = cfp::load_mapping(reduced.scenario);
        const SolveResult lr = solve_mapping(T_load, m_p, true, 1e-12, max_iter);
        if (lr.trace.status != cfp::IterationStatus::Converged) {
            std::printf("status=%s\n", cfp::to_string(lr.trace.status));
            return kExitNumerical;
        }
        load = lr.trace.last();
    }

    const auto m_nu = cfp::load_scaled_bound(mprime, load);
    const auto T = cfp::power_mapping(reduced.scenario, load, power_cap);
    const SolveResult res = solve_mapping(T, m_nu, accelerated, tol, max_iter);
    std::printf("status=%s\niterations=%d\n", cfp::to_string(res.trace.status),
                res.trace.steps());
    if (res.trace.status != cfp::IterationStatus::Converged) return kExitNumerical;
    std::printf("residual=%.6g\n", res.residual);
    print_vector("load", expand(load, reduced.kept, scn.n_stations(), 0.0));
    print_vector("power", expand(res.trace.last(), reduced.kept, scn.n_stations(), 0.0));
    return kExitOk;
}

int cmd_lower_bound(const std::string& scenario_path, const std::string& route_str,
                    const std::string& out, const std::string& target) {
    if (target != "load" && target != "power")
        throw cfp::FormatError("target must be load or power");
    const cfp::NetworkScenario scn = cfp::load_scenario(scenario_path);
    const auto reduced = cfp::drop_empty_stations(scn);
    const auto mprime = cfp::closed_form_mprime(reduced.scenario);
    const auto m_p = cfp::power_scaled_bound(mprime, reduced.scenario.power_w);

    // the power target works with the load induced by the scenario's powers
    cfp::Vector nu;
    if (target == "power") {
        const auto A = cfp::build_accelerated(cfp::load_mapping(reduced.scenario),
                                              cfp::closed_form_matrix(m_p.entries()));
        cfp::IterationOptions opts;
        opts.tol = 1e-12;
        const auto tr = cfp::iterate_accelerated(A, cfp::Vector::Zero(m_p.dim()), opts);
        if (tr.status != cfp::IterationStatus::Converged)
            throw cfp::NonConverged("load solve for the power mapping did not converge");
        nu = tr.last();
    }

    cfp::LowerBoundingMatrix M;
    if (route_str == "closed") {
        M = cfp::closed_form_matrix(
            target == "load" ? m_p.entries()
                             : cfp::load_scaled_bound(mprime, nu).entries());
    } else {
        const cfp::PositiveConcaveMapping T =
            target == "load" ? cfp::load_mapping(reduced.scenario)
                             : cfp::power_mapping(reduced.scenario, nu);
        if (route_str == "recession")
            M = cfp::build_matrix(T, cfp::BoundRoute::RecessionLimit);
        else if (route_str == "supergradient")
            M = cfp::build_matrix(T, cfp::BoundRoute::SupergradientLimit);
        else
            throw cfp::FormatError("route must be recession, supergradient, or closed");
    }
    cfp::save_matrix_csv(M, out);
    std::printf("matrix=%s\nn=%lld\nroute=%s\nrho=%.12g\n", out.c_str(),
                static_cast<long long>(M.dim()), cfp::to_string(M.route),
                cfp::spectral_radius(cfp::NonNegMatrix(M.entries)));
    return kExitOk;
}

int cmd_nme(const cfp::ExperimentConfig& cfg, const std::string& out) {
    const cfp::NmeCurve curve = cfp::run_nme(cfg);
    cfp::write_csv(curve, out);
    int strictly_faster = 0;
    for (std::size_t r = 0; r < curve.standard_iters_to_threshold.size(); ++r) {
        const int s = curve.standard_iters_to_threshold[r];
        const int a = curve.accel_iters_to_threshold[r];
        if (a >= 0 && (s < 0 || a < s)) ++strictly_faster;
    }
    std::printf("curve=%s\nruns=%d\ndiscarded=%d\ndominance_violations=%d\n"
                "accel_strictly_faster_to_threshold=%d\n",
                out.c_str(), curve.runs, curve.discarded, curve.dominance_violations,
                strictly_faster);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed points of positive concave mappings: certification, "
                 "acceleration, and OFDMA load/power estimation"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global options (--seed) after the subcommand

    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "Default RNG seed")
        ->envname("CFP_SEED")
        ->capture_default_str();

    // gen-scenario
    auto* gen = app.add_subcommand("gen-scenario", "Generate a scenario file");
    cfp::ScenarioParams params;
    std::string out_path = "scenario.json";
    std::string gains_csv;
    gen->add_option("--out", out_path, "Output scenario JSON")->capture_default_str();
    gen->add_option("--gains-csv", gains_csv, "Also export the gain matrix as CSV");
    gen->add_option("--stations", params.n_stations, "Number of base stations")
        ->capture_default_str();
    gen->add_option("--users", params.n_users, "Number of users")->capture_default_str();
    gen->add_option("--field", params.field_m, "Field side length [m]")
        ->capture_default_str();
    gen->add_option("--demand", params.demand_bps, "Per-user rate demand [bit/s]")
        ->capture_default_str();
    gen->add_option("--power", params.power_w, "Per-resource-unit power [W]")
        ->capture_default_str();
    gen->add_option("--k-ru", params.k_ru, "Resource units per station")
        ->capture_default_str();
    gen->add_option("--system-bandwidth", params.system_bandwidth_hz,
                    "System bandwidth K*B [Hz]")
        ->capture_default_str();
    gen->add_option("--noise-psd", params.noise_psd_dbm_hz, "Noise PSD [dBm/Hz]")
        ->capture_default_str();
    gen->add_flag("--bs-random", params.random_bs,
                  "Place stations uniformly at random instead of on a grid");

    // certify
    auto* cert = app.add_subcommand("certify", "Fixed-point existence certificate");
    std::string scenario_path;
    cert->add_option("--scenario", scenario_path, "Scenario JSON")->required();
    double capacity = 1.0;
    bool no_capacity = false;
    cert->add_option("--capacity", capacity, "Per-station load capacity")
        ->capture_default_str();
    cert->add_flag("--no-capacity", no_capacity, "Skip the capacity prune");

    // solve-load
    auto* sl = app.add_subcommand("solve-load", "Solve the load fixed point");
    std::string sl_scenario;
    bool sl_accel = false;
    double sl_tol = 1e-10;
    int sl_maxiter = 100000;
    double sl_cap = 1e3;
    sl->add_option("--scenario", sl_scenario, "Scenario JSON")->required();
    sl->add_flag("--accelerated", sl_accel, "Use the accelerated iteration");
    sl->add_option("--tol", sl_tol, "Relative stopping tolerance")->capture_default_str();
    sl->add_option("--max-iter", sl_maxiter, "Iteration budget")->capture_default_str();
    sl->add_option("--load-cap", sl_cap, "Divergence cap on the load")
        ->capture_default_str();

    // solve-power
    auto* sp = app.add_subcommand("solve-power", "Solve the power fixed point");
    std::string sp_scenario, sp_load_csv;
    bool sp_accel = false;
    double sp_tol = 1e-10;
    int sp_maxiter = 100000;
    double sp_cap = 1e12;
    sp->add_option("--scenario", sp_scenario, "Scenario JSON")->required();
    sp->add_flag("--accelerated", sp_accel, "Use the accelerated iteration");
    sp->add_option("--tol", sp_tol, "Relative stopping tolerance")->capture_default_str();
    sp->add_option("--max-iter", sp_maxiter, "Iteration budget")->capture_default_str();
    sp->add_option("--power-cap", sp_cap, "Divergence cap on the power [W]")
        ->capture_default_str();
    sp->add_option("--load-csv", sp_load_csv,
                   "Demanded load as comma-separated values (default: solve it from "
                   "the scenario powers)");

    // lower-bound
    auto* lb = app.add_subcommand("lower-bound", "Emit the lower bounding matrix");
    std::string lb_scenario, lb_route = "closed", lb_out = "M.csv", lb_target = "load";
    lb->add_option("--scenario", lb_scenario, "Scenario JSON")->required();
    lb->add_option("--route", lb_route, "recession | supergradient | closed")
        ->capture_default_str();
    lb->add_option("--target", lb_target, "load | power")->capture_default_str();
    lb->add_option("--out", lb_out, "Output CSV")->capture_default_str();

    // nme-experiment
    auto* nme = app.add_subcommand("nme-experiment", "Monte-Carlo NME comparison");
    std::string nme_config, nme_out = "nme.csv", nme_mode;
    int nme_runs = -1, nme_budget = -1;
    nme->add_option("--config", nme_config, "Key-value configuration file");
    nme->add_option("--out", nme_out, "Output CSV")->capture_default_str();
    nme->add_option("--runs", nme_runs, "Override: number of runs");
    nme->add_option("--budget", nme_budget, "Override: iteration budget");
    nme->add_option("--mode", nme_mode, "Override: load | power");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_gen_scenario(params, seed, out_path, gains_csv);
        if (cert->parsed())
            return cmd_certify(scenario_path,
                               no_capacity ? std::nullopt : std::optional<double>(capacity));
        if (sl->parsed())
            return cmd_solve_load(sl_scenario, sl_accel, sl_tol, sl_maxiter, sl_cap);
        if (sp->parsed())
            return cmd_solve_power(sp_scenario, sp_accel, sp_tol, sp_maxiter, sp_cap,
                                   sp_load_csv);
        if (lb->parsed()) return cmd_lower_bound(lb_scenario, lb_route, lb_out, lb_target);
        if (nme->parsed()) {
            cfp::ExperimentConfig cfg;
            if (!nme_config.empty()) cfg = cfp::read_config(nme_config);
            else cfg.seed = seed;
            if (nme_runs > 0) cfg.runs = nme_runs;
            if (nme_budget > 0) cfg.budget = nme_budget;
            if (!nme_mode.empty()) cfg.mode = cfp::estimation_mode_from_string(nme_mode);
            return cmd_nme(cfg, nme_out);
        }
    } catch (const cfp::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const cfp::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const cfp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}
