#include "cfp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cfp/accel.hpp"
#include "cfp/rng.hpp"

namespace cfp {

const char* to_string(EstimationMode m) {
    switch (m) {
        case EstimationMode::Load: return "load";
        case EstimationMode::Power: return "power";
    }
    return "unknown";
}

EstimationMode estimation_mode_from_string(const std::string& s) {
    if (s == "load" || s == "Load") return EstimationMode::Load;
    if (s == "power" || s == "Power") return EstimationMode::Power;
    throw FormatError("unknown estimation mode: " + s);
}

namespace {

/// Order-independent pairwise sum over column `col` of per-run curves.
double pairwise_sum(const std::vector<std::vector<double>>& rows, std::size_t col,
                    std::size_t lo, std::size_t hi,
                    double (*f)(double)) {
    if (hi - lo == 1) return f(rows[lo][col]);
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(rows, col, lo, mid, f) + pairwise_sum(rows, col, mid, hi, f);
}

double id_fn(double x) { return x; }
double sq_fn(double x) { return x * x; }

struct RunCurves {
    std::vector<double> std_err, acc_err;
    bool dominance_violated = false;
    int std_hit = -1, acc_hit = -1;
};

RunCurves one_run(const ExperimentConfig& cfg, const NetworkScenario& reduced,
                  const NonNegMatrix& mprime) {
    const Index m = reduced.n_stations();

    PositiveConcaveMapping T = load_mapping(reduced);
    NonNegMatrix bound = power_scaled_bound(mprime, reduced.power_w);
    IterationOptions ref_opts;
    ref_opts.tol = 1e-12;

    Vector load_fix;
    if (cfg.mode == EstimationMode::Power) {
        auto accel_load = build_accelerated(T, closed_form_matrix(bound.entries()));
        const IterationTrace tr = iterate_accelerated(accel_load, Vector::Zero(m), ref_opts);
        if (tr.status != IterationStatus::Converged)
            throw NonConverged("load solve for the power experiment did not converge");
        load_fix = tr.last();
        T = power_mapping(reduced, load_fix);
        bound = load_scaled_bound(mprime, load_fix);
    }

    const AcceleratedMapping A = build_accelerated(T, closed_form_matrix(bound.entries()));
    const IterationTrace ref = iterate_accelerated(A, Vector::Zero(m), ref_opts);
    if (ref.status != IterationStatus::Converged)
        throw NonConverged("reference fixed point did not converge");
    const Vector& xstar = ref.last();
    const double ref_norm = xstar.norm();

    RunCurves out;
    out.std_err.resize(static_cast<std::size_t>(cfg.budget));
    out.acc_err.resize(static_cast<std::size_t>(cfg.budget));
    Vector xs = Vector::Zero(m);
    Vector xa = Vector::Zero(m);
    for (int n = 0; n < cfg.budget; ++n) {
        xs = T(xs);
        xa = A(xa);
        const double es = (xs - xstar).norm() / ref_norm;
        const double ea = (xa - xstar).norm() / ref_norm;
        out.std_err[static_cast<std::size_t>(n)] = es;
        out.acc_err[static_cast<std::size_t>(n)] = ea;
        if (ea > es + kDominanceSlack) out.dominance_violated = true;
        if (out.std_hit < 0 && es <= cfg.threshold) out.std_hit = n + 1;
        if (out.acc_hit < 0 && ea <= cfg.threshold) out.acc_hit = n + 1;
    }
    return out;
}

}  // namespace

NmeCurve run_nme(const ExperimentConfig& cfg) {
    if (cfg.runs < 1) throw Error("runs must be >= 1");
    if (cfg.budget < 1) throw Error("budget must be >= 1");

    NmeCurve curve;
    curve.runs = cfg.runs;
    curve.threshold = cfg.threshold;

    std::vector<std::vector<double>> std_rows, acc_rows;
    std_rows.reserve(static_cast<std::size_t>(cfg.runs));
    acc_rows.reserve(static_cast<std::size_t>(cfg.runs));

    // Scenario substream k = run * kAttemptsPerRun + attempt, folded into the
    // seed through splitmix64; runs are independent and reproducible.
    constexpr std::uint64_t kAttemptsPerRun = 1024;
    for (int run = 0; run < cfg.runs; ++run) {
        bool done = false;
        for (std::uint64_t attempt = 0; attempt < kAttemptsPerRun && !done; ++attempt) {
            if (curve.discarded > 9 * cfg.runs)
                throw TooManyDiscards(
                    "more than 90% of sampled scenarios had rho(M') >= 1");
            const std::uint64_t stream =
                static_cast<std::uint64_t>(run) * kAttemptsPerRun + attempt;
            std::uint64_t state = cfg.seed;
            const std::uint64_t scenario_seed = splitmix64(state) ^ (stream * 0x9e3779b97f4a7c15ULL);

            NetworkScenario scn = generate_scenario(cfg.scenario, scenario_seed);
            ReducedScenario reduced = drop_empty_stations(scn);
            const NonNegMatrix mprime = closed_form_mprime(reduced.scenario);
            const double rho = spectral_radius(mprime);
            if (rho >= 1.0) {
                ++curve.discarded;
                continue;
            }
            RunCurves rc = one_run(cfg, reduced.scenario, mprime);
            if (rc.dominance_violated) ++curve.dominance_violations;
            curve.standard_iters_to_threshold.push_back(rc.std_hit);
            curve.accel_iters_to_threshold.push_back(rc.acc_hit);
            std_rows.push_back(std::move(rc.std_err));
            acc_rows.push_back(std::move(rc.acc_err));
            done = true;
        }
        if (!done)
            throw TooManyDiscards("run " + std::to_string(run) +
                                  " exhausted its scenario attempts");
    }

    const auto n_runs = static_cast<double>(cfg.runs);
    const std::size_t budget = static_cast<std::size_t>(cfg.budget);
    curve.standard_nme.resize(budget);
    curve.standard_ci.resize(budget);
    curve.accel_nme.resize(budget);
    curve.accel_ci.resize(budget);
    for (std::size_t n = 0; n < budget; ++n) {
        for (auto [rows, mean_out, ci_out] :
             {std::tuple{&std_rows, &curve.standard_nme, &curve.standard_ci},
              std::tuple{&acc_rows, &curve.accel_nme, &curve.accel_ci}}) {
            const double s1 = pairwise_sum(*rows, n, 0, rows->size(), id_fn);
            const double mean = s1 / n_runs;
            double half = 0.0;
            if (cfg.runs > 1) {
                const double s2 = pairwise_sum(*rows, n, 0, rows->size(), sq_fn);
                const double var =
                    std::max(0.0, (s2 - n_runs * mean * mean) / (n_runs - 1.0));
                half = 1.959963984540054 * std::sqrt(var / n_runs);
            }
            (*mean_out)[n] = mean;
            (*ci_out)[n] = half;
        }
    }
    return curve;
}

void write_csv(const NmeCurve& curve, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "iter,standard_nme,standard_ci,accel_nme,accel_ci\n";
    char buf[40];
    for (std::size_t n = 0; n < curve.standard_nme.size(); ++n) {
        f << (n + 1);
        for (const double v : {curve.standard_nme[n], curve.standard_ci[n],
                               curve.accel_nme[n], curve.accel_ci[n]}) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw IoError("write failed: " + path);
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig read_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "runs") cfg.runs = std::stoi(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "budget") cfg.budget = std::stoi(val);
            else if (key == "mode") cfg.mode = estimation_mode_from_string(val);
            else if (key == "threshold") cfg.threshold = std::stod(val);
            else if (key == "n_stations") cfg.scenario.n_stations = std::stoi(val);
            else if (key == "n_users") cfg.scenario.n_users = std::stoi(val);
            else if (key == "field_m") cfg.scenario.field_m = std::stod(val);
            else if (key == "demand_bps") cfg.scenario.demand_bps = std::stod(val);
            else if (key == "power_w") cfg.scenario.power_w = std::stod(val);
            else if (key == "k_ru") cfg.scenario.k_ru = std::stoi(val);
            else if (key == "system_bandwidth_hz")
                cfg.scenario.system_bandwidth_hz = std::stod(val);
            else if (key == "noise_psd_dbm_hz")
                cfg.scenario.noise_psd_dbm_hz = std::stod(val);
            else if (key == "random_bs")
                cfg.scenario.random_bs = (val == "true" || val == "1");
            else
                throw FormatError(path + ":" + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": bad value '" +
                              val + "'");
        } catch (const std::out_of_range&) {
            throw FormatError(path + ":" + std::to_string(lineno) + ": value '" + val +
                              "' out of range");
        }
    }
    return cfg;
}

}  // namespace cfp
