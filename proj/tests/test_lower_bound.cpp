#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cfp/lower_bound.hpp"
#include "cfp/lte.hpp"
#include "cfp/rng.hpp"
#include "corpus.hpp"

using namespace cfp;

namespace {

std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("build_matrix: affine mapping recovers its own matrix") {
    const auto m = corpus::affine2();
    for (auto route : {BoundRoute::RecessionLimit, BoundRoute::SupergradientLimit}) {
        CAPTURE(to_string(route));
        const auto M = build_matrix(m.T, route);
        CHECK(M.route == route);
        for (Index i = 0; i < 2; ++i)
            for (Index k = 0; k < 2; ++k)
                CHECK(std::abs(M.entries(i, k) - m.bound(i, k)) < 1e-8);
    }
}

TEST_CASE("build_matrix: sublinear terms contribute zero") {
    const auto m = corpus::sqrtlog2();
    const auto M = build_matrix(m.T, BoundRoute::RecessionLimit);
    CHECK(std::abs(M.entries(0, 0)) < 1e-7);
    CHECK(std::abs(M.entries(0, 1) - 1.0) < 1e-7);
    CHECK(std::abs(M.entries(1, 0) - 0.5) < 1e-7);
    CHECK(std::abs(M.entries(1, 1)) < 1e-7);
}

TEST_CASE("entries are nonnegative and clamped: exactly zero or above 1e-12") {
    for (const auto& m : corpus::analytic_corpus()) {
        CAPTURE(m.name);
        for (auto route : {BoundRoute::RecessionLimit, BoundRoute::SupergradientLimit}) {
            const auto M = build_matrix(m.T, route);
            for (Index i = 0; i < M.dim(); ++i)
                for (Index k = 0; k < M.dim(); ++k) {
                    CHECK(M.entries(i, k) >= 0.0);
                    CHECK((M.entries(i, k) == 0.0 || M.entries(i, k) >= 1e-12));
                }
        }
    }
    // decoupled components: cross entries estimate to the rounding floor
    PositiveConcaveMapping decoupled(2, [](const Vector& x) {
        Vector y(2);
        y[0] = 1.0 + 0.5 * x[0];
        y[1] = 1.0 + 0.5 * x[1];
        return y;
    });
    const auto M = build_matrix(decoupled, BoundRoute::RecessionLimit);
    CHECK(std::abs(M.entries(0, 1)) <= 1e-11);
    CHECK(std::abs(M.entries(1, 0)) <= 1e-11);
}

TEST_CASE("route equivalence across the analytic corpus") {
    for (const auto& m : corpus::analytic_corpus()) {
        CAPTURE(m.name);
        const auto rec = build_matrix(m.T, BoundRoute::RecessionLimit);
        const auto sup = build_matrix(m.T, BoundRoute::SupergradientLimit);
        for (Index i = 0; i < m.T.dim(); ++i)
            for (Index k = 0; k < m.T.dim(); ++k) {
                const double r = rec.entries(i, k);
                const double s = sup.entries(i, k);
                CHECK(std::abs(r - s) <= 1e-6 * (1.0 + std::min(r, s)));
            }
    }
}

TEST_CASE("numeric routes match the closed-form load matrix") {
    const auto scn = corpus::two_station_scenario();
    const auto T = load_mapping(scn);
    const auto m_p = power_scaled_bound(closed_form_mprime(scn), scn.power_w);
    for (auto route : {BoundRoute::RecessionLimit, BoundRoute::SupergradientLimit}) {
        CAPTURE(to_string(route));
        const auto M = build_matrix(T, route);
        for (Index i = 0; i < 2; ++i)
            for (Index k = 0; k < 2; ++k)
                CHECK(std::abs(M.entries(i, k) - m_p.entries()(i, k)) <=
                      1e-6 * (1.0 + m_p.entries()(i, k)));
    }
}

TEST_CASE("affine minorant holds on random ordered pairs") {
    SplitStream rng(31, 5);
    for (const auto& m : corpus::analytic_corpus()) {
        CAPTURE(m.name);
        const auto M = build_matrix(m.T, BoundRoute::RecessionLimit);
        const Index n = m.T.dim();
        double worst = 0.0;
        for (int s = 0; s < 1000; ++s) {
            Vector y(n), d(n);
            for (Index i = 0; i < n; ++i) {
                y[i] = rng.uniform(0.0, 10.0);
                d[i] = rng.uniform(0.0, 10.0);
            }
            const Vector x = y + d;
            const Vector gap = m.T(x) - m.T(y) - M.entries * (x - y);
            worst = std::min(worst, gap.minCoeff());
        }
        CHECK(worst >= -1e-6);
    }
}

TEST_CASE("closed-form registration validates its input") {
    Matrix good(2, 2);
    good << 0.0, 0.5, 0.25, 0.0;
    const auto M = closed_form_matrix(good);
    CHECK(M.route == BoundRoute::ClosedForm);
    CHECK(M.entry_error.isZero());

    Matrix neg(1, 1);
    neg << -0.1;
    CHECK_THROWS_AS(closed_form_matrix(neg), Error);
}

TEST_CASE("matrix CSV round trip is exact") {
    const auto m = corpus::sqrtlog2();
    const auto M = build_matrix(m.T, BoundRoute::SupergradientLimit);
    const std::string path = tmp_path("cfp_matrix_roundtrip.csv");
    save_matrix_csv(M, path);

    std::ifstream f(path);
    std::string header;
    std::getline(f, header);
    CHECK(header == "n=2,route=SupergradientLimit");
    f.close();

    const auto back = load_matrix_csv(path);
    CHECK(back.route == M.route);
    REQUIRE(back.dim() == M.dim());
    for (Index i = 0; i < 2; ++i)
        for (Index k = 0; k < 2; ++k) CHECK(back.entries(i, k) == M.entries(i, k));
    std::remove(path.c_str());
}

TEST_CASE("matrix CSV loader rejects malformed files") {
    const std::string path = tmp_path("cfp_matrix_bad.csv");
    {
        std::ofstream f(path);
        f << "rows=2,route=ClosedForm\n0,0\n0,0\n";
    }
    CHECK_THROWS_AS(load_matrix_csv(path), FormatError);
    {
        std::ofstream f(path);
        f << "n=2,route=ClosedForm\n0,0\n";  // truncated
    }
    CHECK_THROWS_AS(load_matrix_csv(path), FormatError);
    std::remove(path.c_str());
}

TEST_CASE("per-entry failures are aggregated with positions") {
    const auto m = corpus::scalar_sqrt();
    LimitSchedule s = LimitSchedule::recession();
    s.max_steps = 3;  // nothing can stabilize this fast
    try {
        build_matrix(m.T, BoundRoute::RecessionLimit, s);
        FAIL("expected NonConverged");
    } catch (const NonConverged& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(0,0)") != std::string::npos);
    }
}
