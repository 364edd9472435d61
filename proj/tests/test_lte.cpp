#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cfp/accel.hpp"
#include "cfp/lte.hpp"
#include "cfp/rng.hpp"
#include "corpus.hpp"

using namespace cfp;

TEST_CASE("hata path loss matches a hand evaluation") {
    HataParams p;
    // independent inline evaluation of the urban small/medium-city formula
    const double lf = std::log10(900.0);
    const double a_hm = (1.1 * lf - 0.7) * 1.5 - (1.56 * lf - 0.8);
    const double expect = 69.55 + 26.16 * lf - 13.82 * std::log10(30.0) - a_hm +
                          (44.9 - 6.55 * std::log10(30.0)) * std::log10(1.0);
    CHECK(hata_path_loss_db(p, 1000.0) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(hata_path_loss_db(p, 1000.0) == doctest::Approx(126.42).epsilon(2e-4));
    CHECK(hata_gain(p, 1000.0) ==
          doctest::Approx(std::pow(10.0, -expect / 10.0)).epsilon(1e-12));
}

TEST_CASE("hata distance slope: one decade costs 35.22 dB") {
    HataParams p;
    const double slope = 44.9 - 6.55 * std::log10(30.0);
    CHECK(hata_path_loss_db(p, 10000.0) - hata_path_loss_db(p, 1000.0) ==
          doctest::Approx(slope).epsilon(1e-12));
}

TEST_CASE("hata clamps small distances at d_min") {
    HataParams p;
    CHECK(hata_path_loss_db(p, 10.0) == hata_path_loss_db(p, p.d_min_m));
    CHECK(hata_gain(p, 0.0) == hata_gain(p, p.d_min_m));
}

TEST_CASE("noise power from PSD and per-unit bandwidth") {
    // -145.1 dBm/Hz over 200 kHz: ~6.18e-13 W
    const double expect = std::pow(10.0, (-145.1 - 30.0) / 10.0) * 2e5;
    CHECK(noise_power_w(-145.1, 2e5) == doctest::Approx(expect).epsilon(1e-15));
    CHECK(noise_power_w(-145.1, 2e5) == doctest::Approx(6.18e-13).epsilon(1e-3));
}

TEST_CASE("rate_per_ru: unit SNR gives exactly B bits per second") {
    auto scn = corpus::two_station_scenario();
    // single-cell situation: zero load on the other station removes interference
    scn.power_w[0] = scn.noise_w / scn.gains(0, 0);  // p g / sigma^2 = 1
    Vector nu = Vector::Zero(2);
    CHECK(rate_per_ru(scn, nu, 0, 0) ==
          doctest::Approx(scn.bandwidth_hz).epsilon(1e-12));
}

TEST_CASE("rate_per_ru: zero load leaves only the noise term") {
    const auto scn = corpus::two_station_scenario();
    const Vector nu = Vector::Zero(2);
    const double expect =
        scn.bandwidth_hz *
        std::log2(1.0 + scn.power_w(0) * scn.gains(0, 0) / scn.noise_w);
    CHECK(rate_per_ru(scn, nu, 0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("rate_per_ru: two-cell value matches a scalar recomputation") {
    const auto scn = corpus::two_station_scenario();
    Vector nu(2);
    nu << 0.4, 0.6;
    const double inter = nu[1] * scn.power_w[1] * scn.gains(1, 0);
    const double expect =
        scn.bandwidth_hz *
        std::log2(1.0 + scn.power_w[0] * scn.gains(0, 0) / (inter + scn.noise_w));
    CHECK(rate_per_ru(scn, nu, 0, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("omega is non-increasing in interfering loads") {
    const auto scn = corpus::two_station_scenario();
    SplitStream rng(2, 0);
    for (int s = 0; s < 200; ++s) {
        Vector nu(2), bump(2);
        nu << rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0);
        bump << 0.0, rng.uniform(0.0, 1.0);  // leave nu_0 unchanged
        CHECK(rate_per_ru(scn, nu + bump, 0, 0) <= rate_per_ru(scn, nu, 0, 0) + 1e-12);
    }
}

TEST_CASE("load mapping: single user sized for h = 0.04 at unit SNR") {
    auto scn = corpus::two_station_scenario();
    scn.power_w[0] = scn.noise_w / scn.gains(0, 0);  // unit SNR for user 0
    scn.demand_bps[0] = 0.04 * scn.k_ru * scn.bandwidth_hz;  // 200 kbit/s
    const auto T = load_mapping(scn);
    CHECK(T(Vector::Zero(2))[0] == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("load mapping at zero load: interference-free formula") {
    const auto scn = corpus::two_station_scenario();
    const auto T = load_mapping(scn);
    const Vector t0 = T(Vector::Zero(2));
    for (Index i = 0; i < 2; ++i) {
        const double snr = scn.power_w[i] * scn.gains(i, i) / scn.noise_w;
        const double expect =
            scn.demand_bps[i] / (scn.k_ru * scn.bandwidth_hz * std::log2(1.0 + snr));
        CHECK(t0[i] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(t0[i] > 0.0);
    }
}

TEST_CASE("load fixed point satisfies the nonlinear system") {
    const auto scn = generate_scenario(corpus::small_params(), 3);
    const auto reduced = drop_empty_stations(scn);
    const auto T = load_mapping(reduced.scenario);
    IterationOptions opts;
    opts.tol = 1e-12;
    const auto trace = iterate_standard(T, Vector::Zero(T.dim()), opts);
    REQUIRE(trace.status == IterationStatus::Converged);
    const Vector& nu = trace.last();
    // residual of nu_i = sum_j d_j / (K omega_{i,j}(nu, p))
    const auto attached = reduced.scenario.users_of();
    for (Index i = 0; i < T.dim(); ++i) {
        double rhs = 0.0;
        for (Index j : attached[static_cast<std::size_t>(i)])
            rhs += reduced.scenario.demand_bps[j] /
                   (reduced.scenario.k_ru * rate_per_ru(reduced.scenario, nu, i, j));
        CHECK(std::abs(nu[i] - rhs) <= 1e-8);
    }
}

TEST_CASE("empty cells are rejected and can be dropped") {
    auto scn = corpus::two_station_scenario();
    scn.assignment = {0, 0};  // station 1 ends up empty
    CHECK_THROWS_AS(load_mapping(scn), EmptyCell);

    const auto reduced = drop_empty_stations(scn);
    CHECK(reduced.scenario.n_stations() == 1);
    REQUIRE(reduced.kept.size() == 1);
    CHECK(reduced.kept[0] == 0);
    CHECK(reduced.scenario.n_users() == 2);
    const auto T = load_mapping(reduced.scenario);
    CHECK(T(Vector::Zero(1))[0] > 0.0);
}

TEST_CASE("power mapping at p = 0: closed-form branch") {
    const auto scn = corpus::two_station_scenario();
    Vector nu(2);
    nu << 0.3, 0.5;
    const auto T = power_mapping(scn, nu);
    const Vector t0 = T(Vector::Zero(2));
    for (Index i = 0; i < 2; ++i) {
        const double expect = scn.demand_bps[i] * std::log(2.0) * scn.noise_w /
                              (scn.k_ru * scn.bandwidth_hz * scn.gains(i, i) * nu[i]);
        CHECK(t0[i] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("power mapping is continuous across the p_i = 0 branch") {
    const auto scn = corpus::two_station_scenario();
    Vector nu(2);
    nu << 0.3, 0.5;
    const auto T = power_mapping(scn, nu);
    Vector p_small(2), p_zero(2);
    p_small << 1e-12, 0.8;
    p_zero << 0.0, 0.8;
    const double a = T(p_small)[0];
    const double b = T(p_zero)[0];
    CHECK(std::abs(a - b) <= 1e-6 * b);
}

TEST_CASE("round trip: load from stock powers, then powers from that load") {
    const auto scn = generate_scenario(corpus::small_params(), 3);
    const auto reduced = drop_empty_stations(scn);
    const auto mprime = closed_form_mprime(reduced.scenario);
    REQUIRE(spectral_radius(mprime) < 1.0);
    const auto m_p = power_scaled_bound(mprime, reduced.scenario.power_w);

    IterationOptions opts;
    opts.tol = 1e-12;
    const auto A_load = build_accelerated(load_mapping(reduced.scenario),
                                          closed_form_matrix(m_p.entries()));
    const auto lt = iterate_accelerated(A_load, Vector::Zero(m_p.dim()), opts);
    REQUIRE(lt.status == IterationStatus::Converged);
    const Vector nu = lt.last();

    const auto m_nu = load_scaled_bound(mprime, nu);
    const auto A_pow = build_accelerated(power_mapping(reduced.scenario, nu),
                                         closed_form_matrix(m_nu.entries()));
    const auto pt = iterate_accelerated(A_pow, Vector::Zero(m_nu.dim()), opts);
    REQUIRE(pt.status == IterationStatus::Converged);
    for (Index i = 0; i < pt.last().size(); ++i)
        CHECK(std::abs(pt.last()[i] - 1.6) <= 1e-6 * 1.6);
}

TEST_CASE("closed-form M': single user with gain ratio 1") {
    const auto scn = corpus::two_station_scenario(1e-10, 1e-10);
    const auto mprime = closed_form_mprime(scn);
    const double expect = std::log(2.0) * 768e3 / (25.0 * 2e5);
    CHECK(mprime.entries()(0, 0) == 0.0);
    CHECK(mprime.entries()(1, 1) == 0.0);
    CHECK(mprime.entries()(0, 1) == doctest::Approx(expect).epsilon(1e-15));
    CHECK(mprime.entries()(1, 0) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("equal powers leave M' unchanged under the similarity") {
    const auto scn = corpus::two_station_scenario();
    const auto mprime = closed_form_mprime(scn);
    const auto m_p = power_scaled_bound(mprime, scn.power_w);
    CHECK((m_p.entries() - mprime.entries()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("numeric lower-bound routes validate the closed forms") {
    const auto scn = generate_scenario(corpus::small_params(), 3);
    const auto reduced = drop_empty_stations(scn);
    const auto m_p = power_scaled_bound(closed_form_mprime(reduced.scenario),
                                        reduced.scenario.power_w);
    const auto T = load_mapping(reduced.scenario);
    const auto M = build_matrix(T, BoundRoute::RecessionLimit);
    for (Index i = 0; i < M.dim(); ++i)
        for (Index k = 0; k < M.dim(); ++k)
            CHECK(std::abs(M.entries(i, k) - m_p.entries()(i, k)) <=
                  1e-6 * (1.0 + m_p.entries()(i, k)));
}

TEST_CASE("similarity invariance of the spectral radius") {
    const auto scn = generate_scenario(corpus::small_params(), 3);
    const auto reduced = drop_empty_stations(scn);
    const auto mprime = closed_form_mprime(reduced.scenario);
    const double rho = spectral_radius(mprime);
    SplitStream rng(41, 0);
    for (int s = 0; s < 10; ++s) {
        Vector d(mprime.dim());
        for (Index i = 0; i < d.size(); ++i)
            d[i] = std::pow(10.0, rng.uniform(-1.0, 1.0));
        CHECK(similar_spectrum_check(mprime, d));
        const double rho_d =
            spectral_radius(NonNegMatrix(diagonal_similarity(mprime.entries(), d)));
        CHECK(std::abs(rho - rho_d) <= 1e-8 * (1.0 + rho));
    }

    // the scalings used by the applications: stock powers and a solved load
    CHECK(similar_spectrum_check(mprime, reduced.scenario.power_w));
    REQUIRE(rho < 1.0);
    const auto m_p = power_scaled_bound(mprime, reduced.scenario.power_w);
    const auto A = build_accelerated(load_mapping(reduced.scenario),
                                     closed_form_matrix(m_p.entries()));
    IterationOptions opts;
    opts.tol = 1e-12;
    const auto tr = iterate_accelerated(A, Vector::Zero(mprime.dim()), opts);
    REQUIRE(tr.status == IterationStatus::Converged);
    CHECK(similar_spectrum_check(mprime, tr.last()));
}

TEST_CASE("load feasibility iff: both directions on one scenario") {
    const auto scn = generate_scenario(corpus::small_params(), 3);
    const auto reduced = drop_empty_stations(scn);
    const auto mprime = closed_form_mprime(reduced.scenario);
    const double rho = spectral_radius(mprime);
    REQUIRE(rho < 1.0);

    // rho < 1: converges
    const auto ok = iterate_standard(load_mapping(reduced.scenario),
                                     Vector::Zero(mprime.dim()));
    CHECK(ok.status == IterationStatus::Converged);

    // scale demands so rho >= 1: diverges past the load cap
    NetworkScenario scaled = reduced.scenario;
    scaled.demand_bps *= 1.2 / rho;
    const double rho_scaled = spectral_radius(closed_form_mprime(scaled));
    CHECK(rho_scaled >= 1.0);
    const auto bad = iterate_standard(load_mapping(scaled), Vector::Zero(mprime.dim()));
    CHECK(bad.status == IterationStatus::Diverged);
}

TEST_CASE("associate_users: ties break to the lowest station index") {
    auto scn = corpus::two_station_scenario(1e-10, 1e-10);  // all gains equal
    scn.assignment = {-1, -1};
    scn = associate_users(std::move(scn));
    CHECK(scn.assignment[0] == 0);
    CHECK(scn.assignment[1] == 0);
}

TEST_CASE("associate_users: best server wins everywhere") {
    const auto scn = generate_scenario(corpus::small_params(), 9);
    for (Index j = 0; j < scn.n_users(); ++j) {
        const Index i = scn.assignment[static_cast<std::size_t>(j)];
        for (Index k = 0; k < scn.n_stations(); ++k)
            CHECK(scn.gains(i, j) >= scn.gains(k, j));
    }
}

TEST_CASE("user at a station's position attaches there") {
    auto params = corpus::small_params();
    auto scn = generate_scenario(params, 5);
    scn.user_pos.row(0) = scn.bs_pos.row(2);
    for (Index i = 0; i < scn.n_stations(); ++i) {
        const double dx = scn.bs_pos(i, 0) - scn.user_pos(0, 0);
        const double dy = scn.bs_pos(i, 1) - scn.user_pos(0, 1);
        scn.gains(i, 0) = hata_gain(params.hata, std::hypot(dx, dy));
    }
    scn = associate_users(std::move(scn));
    CHECK(scn.assignment[0] == 2);
}

TEST_CASE("scenario JSON round trip is exact") {
    const auto scn = generate_scenario(corpus::small_params(), 11);
    const std::string path =
        (std::filesystem::temp_directory_path() / "cfp_scn_roundtrip.json").string();
    save_scenario(scn, path);
    const auto back = load_scenario(path);
    CHECK(back.k_ru == scn.k_ru);
    CHECK(back.bandwidth_hz == scn.bandwidth_hz);
    CHECK(back.noise_w == scn.noise_w);
    CHECK((back.gains - scn.gains).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.bs_pos - scn.bs_pos).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.user_pos - scn.user_pos).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.power_w - scn.power_w).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.demand_bps - scn.demand_bps).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.assignment == scn.assignment);
    std::remove(path.c_str());
}

TEST_CASE("scenario loader rejects malformed input") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "cfp_scn_bad.json").string();
    {
        std::ofstream f(path);
        f << "{\"format\": \"something-else\"}";
    }
    CHECK_THROWS_AS(load_scenario(path), FormatError);
    {
        std::ofstream f(path);
        f << "not json at all";
    }
    CHECK_THROWS_AS(load_scenario(path), FormatError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_scenario(path), IoError);
}

TEST_CASE("generated scenarios honor the stock defaults") {
    ScenarioParams params;  // stock defaults
    const auto scn = generate_scenario(params, 1);
    CHECK(scn.n_stations() == 25);
    CHECK(scn.n_users() == 200);
    CHECK(scn.k_ru == 25);
    CHECK(scn.bandwidth_hz == doctest::Approx(2e5));
    CHECK(scn.power_w.minCoeff() == 1.6);
    CHECK(scn.power_w.maxCoeff() == 1.6);
    CHECK(scn.demand_bps.minCoeff() == 768e3);
    CHECK(scn.noise_w == doctest::Approx(6.18e-13).epsilon(1e-3));
    CHECK(scn.bs_pos.minCoeff() >= 0.0);
    CHECK(scn.bs_pos.maxCoeff() <= 2500.0);
    CHECK(scn.user_pos.minCoeff() >= 0.0);
    CHECK(scn.user_pos.maxCoeff() <= 2500.0);
    // grid placement: 5 distinct column positions at cell centers
    CHECK(scn.bs_pos(0, 0) == doctest::Approx(250.0));
    CHECK(scn.bs_pos(24, 1) == doctest::Approx(2250.0));

    // determinism
    const auto again = generate_scenario(params, 1);
    CHECK((again.gains - scn.gains).cwiseAbs().maxCoeff() == 0.0);
    const auto other = generate_scenario(params, 2);
    CHECK((other.user_pos - scn.user_pos).cwiseAbs().maxCoeff() > 0.0);
}
