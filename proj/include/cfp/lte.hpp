#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cfp/mapping.hpp"
#include "cfp/spectral.hpp"

namespace cfp {

/// Okumura-Hata urban propagation, small/medium-city mobile-antenna
/// correction (the 900 MHz / 30 m / 1.5 m regime). Distances below d_min are
/// clamped to keep the model finite near a station.
struct HataParams {
    double f_mhz = 900.0;
    double h_b_m = 30.0;
    double h_m_m = 1.5;
    double d_min_m = 35.0;
};

double hata_path_loss_db(const HataParams& p, double distance_m);

/// Linear power gain 10^(-PL/10).
double hata_gain(const HataParams& p, double distance_m);

/// An OFDMA downlink snapshot: stations, users, linear gains, association,
/// demands, and the resource-grid parameters.
struct NetworkScenario {
    Matrix bs_pos;    ///< M x 2 station coordinates [m]
    Matrix user_pos;  ///< N x 2 user coordinates [m]
    Matrix gains;     ///< M x N linear power gains, all > 0
    std::vector<Index> assignment;  ///< serving station per user; -1 = unassigned
    Vector demand_bps;  ///< N user rate demands [bit/s]
    Vector power_w;     ///< M per-resource-unit transmit powers [W]
    int k_ru = 25;              ///< resource units per station
    double bandwidth_hz = 2e5;  ///< bandwidth per resource unit B [Hz]
    double noise_w = 6.18e-13;  ///< noise power per resource unit sigma^2 [W]

    [[nodiscard]] Index n_stations() const { return gains.rows(); }
    [[nodiscard]] Index n_users() const { return gains.cols(); }
    /// Users attached to each station.
    [[nodiscard]] std::vector<std::vector<Index>> users_of() const;
    void validate() const;
};

/// Scenario generation parameters; the defaults describe the stock urban
/// setup (25 stations, 200 users, 768 kbps each over a 2.5 km square).
/// Stations sit on a regular grid over the square field (random placement
/// behind the flag); users are uniform at random. Gains come from the Hata
/// model, association from associate_users.
struct ScenarioParams {
    int n_stations = 25;
    int n_users = 200;
    double field_m = 2500.0;
    double demand_bps = 768e3;
    double power_w = 1.6;
    int k_ru = 25;
    double system_bandwidth_hz = 5e6;    ///< K * B
    double noise_psd_dbm_hz = -145.1;
    HataParams hata{};
    bool random_bs = false;
};

/// Noise power per resource unit from a PSD and per-unit bandwidth.
double noise_power_w(double psd_dbm_hz, double bandwidth_hz);

NetworkScenario generate_scenario(const ScenarioParams& params, std::uint64_t seed);

/// Attaches every user to the station with maximal gain (best server);
/// deterministic tie-break by lowest station index.
NetworkScenario associate_users(NetworkScenario scn);

/// Result of removing stations with no attached users: their load is 0, so
/// they neither demand resources nor interfere.
struct ReducedScenario {
    NetworkScenario scenario;
    std::vector<Index> kept;  ///< original indices of the remaining stations
};
ReducedScenario drop_empty_stations(const NetworkScenario& scn);

/// Reliable rate per resource unit omega_{i,j}(nu, p) with the scenario's
/// power vector:  B log2(1 + p_i g_{i,j} / (sum_{k != i} nu_k p_k g_{k,j} + sigma^2)).
double rate_per_ru(const NetworkScenario& scn, const Vector& load, Index i, Index j);

/// Load mapping T_p: component i maps nu to sum_{j in N_i} d_j / (K omega_{i,j}).
/// Concave in nu for fixed p. Throws EmptyCell when a station has no users.
/// The divergence cap defaults to well above the physical nu <= 1 so that
/// estimation runs can diagnose infeasibility (capacity checks are separate).
PositiveConcaveMapping load_mapping(const NetworkScenario& scn, double load_cap = 1e3);

/// Power mapping T_nu for a fixed demanded load: component i is
/// (p_i / nu_i) sum_j d_j / (K omega_{i,j}(nu, p)) for p_i != 0, and the
/// closed-form limit sum_j d_j ln2 (sum_{k != i} nu_k p_k g_{k,j} + sigma^2) /
/// (K B g_{i,j} nu_i) at p_i = 0.
PositiveConcaveMapping power_mapping(const NetworkScenario& scn, Vector load,
                                     double power_cap = 1e12);

/// Closed-form matrix M' of the load coupling (power-independent):
/// [M']_{i,k} = 0 for i = k, else sum_{j in N_i} ln2 d_j g_{k,j} / (K B g_{i,j}).
NonNegMatrix closed_form_mprime(const NetworkScenario& scn);

/// M_p = diag(p)^{-1} M' diag(p): lower bounding matrix of the load mapping.
NonNegMatrix power_scaled_bound(const NonNegMatrix& mprime, const Vector& p);

/// M_nu = diag(nu)^{-1} M' diag(nu): lower bounding matrix of the power mapping.
NonNegMatrix load_scaled_bound(const NonNegMatrix& mprime, const Vector& nu);

/// JSON scenario file round trip (schema documented in the README).
void save_scenario(const NetworkScenario& scn, const std::string& path);
NetworkScenario load_scenario(const std::string& path);

/// Gain matrix as CSV (M rows by N columns).
void save_gains_csv(const NetworkScenario& scn, const std::string& path);

}  // namespace cfp
