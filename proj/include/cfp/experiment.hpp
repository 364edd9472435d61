#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfp/lte.hpp"
#include "cfp/mapping.hpp"

namespace cfp {

enum class EstimationMode { Load, Power };

[[nodiscard]] const char* to_string(EstimationMode m);
EstimationMode estimation_mode_from_string(const std::string& s);

/// Monte-Carlo configuration for the NME-vs-iterations comparison.
struct ExperimentConfig {
    int runs = 100;
    std::uint64_t seed = 1;
    int budget = 500;  ///< iterations recorded per run
    EstimationMode mode = EstimationMode::Load;
    ScenarioParams scenario{};
    double threshold = 1e-3;  ///< per-run iterations-to-threshold statistic
};

/// Additive slack used when checking the per-run dominance of the accelerated
/// error curve; absorbs the finite accuracy of the reference fixed point.
inline constexpr double kDominanceSlack = 1e-10;

/// Per-iteration normalized mean error ||x_n - x*||_2 / ||x*||_2, averaged
/// over runs, for the standard and accelerated iterations from zero.
struct NmeCurve {
    std::vector<double> standard_nme, standard_ci;
    std::vector<double> accel_nme, accel_ci;  ///< 95% normal half-widths
    int discarded = 0;  ///< scenarios resampled because rho(M') >= 1
    int runs = 0;
    double threshold = 1e-3;
    /// First iteration index (1-based) at which the run's error reached the
    /// threshold; -1 when never reached within the budget.
    std::vector<int> standard_iters_to_threshold, accel_iters_to_threshold;
    /// Runs where the accelerated error exceeded the standard error plus
    /// kDominanceSlack at some iteration.
    int dominance_violations = 0;
};

/// Runs the experiment. Per run: sample user positions (per-run substream of
/// the seed), build the scenario, discard and resample while rho(M') >= 1;
/// compute the reference fixed point by accelerated iteration at tol 1e-12;
/// then record both error curves for the budget. Deterministic: identical
/// (seed, config) produce bit-identical curves.
NmeCurve run_nme(const ExperimentConfig& cfg);

/// CSV with header `iter,standard_nme,standard_ci,accel_nme,accel_ci`, one
/// row per iteration, 17 significant digits.
void write_csv(const NmeCurve& curve, const std::string& path);

/// Reads a `key = value` text configuration (# comments allowed). Unknown
/// keys are rejected.
ExperimentConfig read_config(const std::string& path);

}  // namespace cfp
