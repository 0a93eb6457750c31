#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "ioncavity/config.hpp"
#include "ioncavity/eff3.hpp"
#include "ioncavity/errors.hpp"
#include "ioncavity/experiments.hpp"
#include "oracles.hpp"

using namespace ioncavity;

namespace {

eff3::RateParams generic_rates() {
    eff3::RateParams r;
    r.gamma1 = 2.2e6;
    r.gamma2 = 0.9e6;
    r.gamma2_prime = 3.1e6;
    r.gamma3 = 0.6e6;
    r.pump = 1.4e6;
    return r;
}

} // namespace

TEST_SUITE("eff3") {

TEST_CASE("steady_populations: no pumping leaves everything in S") {
    eff3::RateParams r = generic_rates();
    r.pump = 0.0;
    const auto n = eff3::steady_populations(r, false);
    CHECK(n[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(n[1] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(n[2] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("steady_populations: closed D channel gives the two-level balance") {
    eff3::RateParams r = generic_rates();
    r.gamma2_prime = 0.0; // use_prime selects this one
    const auto n = eff3::steady_populations(r, true);
    CHECK(n[2] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(n[1] / n[0] == doctest::Approx(r.pump / (r.gamma1 + r.pump)).epsilon(1e-12));
}

TEST_CASE("steady_populations: matches long-time rate-equation integration") {
    const eff3::RateParams r = generic_rates();
    for (const bool use_prime : {false, true}) {
        CAPTURE(use_prime);
        const double g2 = use_prime ? r.gamma2_prime : r.gamma2;
        const auto rhs = [&](const std::vector<double>& n) {
            return std::vector<double>{
                -r.pump * n[0] + (r.gamma1 + r.pump) * n[1] + r.gamma3 * n[2],
                r.pump * n[0] - (r.gamma1 + g2 + r.pump) * n[1],
                g2 * n[1] - r.gamma3 * n[2]};
        };
        const std::vector<double> n_inf =
            oracles::rk4_integrate(rhs, {1.0, 0.0, 0.0}, 60e-6, 60000);
        const auto n = eff3::steady_populations(r, use_prime);
        for (int i = 0; i < 3; ++i) {
            CAPTURE(i);
            CHECK(std::abs(n[static_cast<std::size_t>(i)] - n_inf[static_cast<std::size_t>(i)]) <
                  1e-10);
        }
    }
}

TEST_CASE("steady_populations: normalized with components in [0, 1]") {
    const std::array<eff3::RateParams, 3> sets = [] {
        std::array<eff3::RateParams, 3> s{};
        s[0] = generic_rates();
        s[1] = generic_rates();
        s[1].gamma3 = 4.0e7;
        s[1].pump = 9.0e7;
        s[2] = generic_rates();
        s[2].gamma2 = 0.0;
        s[2].gamma3 = 0.0;
        return s;
    }();
    for (const auto& r : sets) {
        for (const bool use_prime : {false, true}) {
            const auto n = eff3::steady_populations(r, use_prime);
            CHECK(n[0] + n[1] + n[2] == doctest::Approx(1.0).epsilon(1e-13));
            for (const double c : n) {
                CHECK(c >= 0.0);
                CHECK(c <= 1.0);
            }
        }
    }
}

TEST_CASE("steady_populations: all rates zero is degenerate") {
    CHECK_THROWS_AS(eff3::steady_populations(eff3::RateParams{}, false), AnalysisError);
}

TEST_CASE("eq1: v = 1 means no cavity effect") {
    for (const double w : {0.0, 0.3, 2.0})
        CHECK(eff3::normalized_fluorescence_eq1(1.0, w, 1.3e8, 3.3e7) ==
              doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("eq1: joint v, w -> 0 limit is complete suppression") {
    CHECK(std::abs(eff3::normalized_fluorescence_eq1(1e-12, 0.0, 1.3e8, 3.3e7)) < 1e-9);
}

TEST_CASE("eq1: domain errors") {
    CHECK_THROWS_AS(eff3::normalized_fluorescence_eq1(0.5, 0.1, 1.3e8, 0.0), InputError);
    CHECK_THROWS_AS(eff3::normalized_fluorescence_eq1(0.0, 0.1, 1.3e8, 3.3e7), InputError);
    CHECK_THROWS_AS(eff3::normalized_fluorescence_eq1(1.1, 0.1, 1.3e8, 3.3e7), InputError);
    CHECK_THROWS_AS(eff3::normalized_fluorescence_eq1(0.5, -0.1, 1.3e8, 3.3e7), InputError);
}

TEST_CASE("eq1: agrees with the exact three-level ratio in its regime") {
    // The closed form replaces gamma3 + V by V in the D-channel balance, so it
    // holds for gamma2' << gamma1 and gamma3 << V.
    const double gamma1 = 1.3e8;
    const double pump = 0.4e8;
    const double gamma2 = 2.0e6;
    for (const double enhancement : {2.0, 5.0, 20.0}) {
        for (const double gamma3 : {2.0e2, 0.01 * pump, 0.02 * pump}) {
            CAPTURE(enhancement);
            CAPTURE(gamma3);
            eff3::RateParams r;
            r.gamma1 = gamma1;
            r.pump = pump;
            r.gamma2 = gamma2;
            r.gamma2_prime = enhancement * gamma2;
            r.gamma3 = gamma3;
            const double v = r.gamma2 / r.gamma2_prime;
            const double w = r.gamma3 / r.gamma2_prime;
            const double eq1 = eff3::normalized_fluorescence_eq1(v, w, gamma1, pump);

            const double np_prime = eff3::steady_populations(r, true)[1];
            const double np_bare = eff3::steady_populations(r, false)[1];
            const double exact = np_prime / np_bare;
            CHECK(eq1 == doctest::Approx(exact).epsilon(0.02));
        }
    }
}

TEST_CASE("eq1: monotone increasing in v and w") {
    const double gamma1 = 1.32e8;
    const double pump = 0.25 * gamma1;
    std::vector<double> vs(10), ws(10);
    for (int i = 0; i < 10; ++i) {
        vs[static_cast<std::size_t>(i)] = 0.05 + (1.0 - 0.05) * i / 9.0;
        ws[static_cast<std::size_t>(i)] = 2.0 * i / 9.0;
    }
    for (std::size_t iw = 0; iw < ws.size(); ++iw) {
        for (std::size_t iv = 0; iv < vs.size(); ++iv) {
            const double f = eff3::normalized_fluorescence_eq1(vs[iv], ws[iw], gamma1, pump);
            if (iv > 0)
                CHECK(f > eff3::normalized_fluorescence_eq1(vs[iv - 1], ws[iw], gamma1, pump));
            if (iw > 0)
                CHECK(f >= eff3::normalized_fluorescence_eq1(vs[iv], ws[iw - 1], gamma1, pump));
        }
    }
}

TEST_CASE("effective rates: repump-off extraction gives zero repump rate") {
    auto p = io::RunConfig::defaults().to_system_params();
    p.l850.rabi = 0.0;
    p.l854.rabi = 0.0;
    p.sigma_inhom = 0.0;
    const eff3::RateParams r = eff3::effective_rates_from_full(p);
    CHECK(r.gamma3 == 0.0);
    CHECK(r.pump > 0.0);
    CHECK(r.gamma2_prime > r.gamma2); // cavity on at default coupling
}

TEST_CASE("effective rates: decoupled cavity reproduces the bare branching rate") {
    auto p = io::RunConfig::defaults().to_system_params();
    p.g_bar = 0.0;
    p.sigma_inhom = 0.0;
    const eff3::RateParams r = eff3::effective_rates_from_full(p);
    CHECK(r.gamma2 == doctest::Approx(p.decay.p12_d32).epsilon(1e-14));
    CHECK(r.gamma2_prime == doctest::Approx(r.gamma2).epsilon(0.10));
}

TEST_CASE("effective rates: detuning the repumper weakens it and deepens suppression") {
    auto p = io::RunConfig::defaults().to_system_params();
    p.sigma_inhom = 0.0;
    const double two_pi_mhz = 2.0 * std::numbers::pi * 1e6;

    auto at = [&](double delta850_mhz) {
        auto q = p;
        q.l850.detuning = delta850_mhz * two_pi_mhz;
        return eff3::effective_rates_from_full(q);
    };
    const eff3::RateParams near = at(-1.1);
    const eff3::RateParams far = at(-15.0);
    CHECK(far.gamma3 < near.gamma3);
    CHECK(near.gamma3 > 0.0);

    // Same trend end to end: the far-detuned repumper deepens the UV dip.
    auto ps = io::RunConfig::defaults().to_system_params();
    experiments::SuppressionSettings ss;
    ss.scan_points = 21;
    ss.gh_nodes = 7;
    const auto sweep = experiments::suppression_sweep(
        ps, {-1.1 * two_pi_mhz, -15.0 * two_pi_mhz}, ss);
    REQUIRE(sweep.size() == 2);
    CHECK(sweep[1].suppression_with_393 > sweep[0].suppression_with_393);
    CHECK(sweep[1].suppression_without_393 > sweep[0].suppression_without_393);
}

} // TEST_SUITE
