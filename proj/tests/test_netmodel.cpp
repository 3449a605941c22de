#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cranbf/netmodel.hpp"

using namespace cranbf;
using namespace cranbf::netmodel;

TEST_CASE("path loss formulas")
{
    CHECK(pathloss_fronthaul_db(100.0) == doctest::Approx(102.8).epsilon(1e-12));
    CHECK(pathloss_fronthaul_db(1.0) == doctest::Approx(24.6).epsilon(1e-12));
    CHECK(pathloss_fronthaul_db(1000.0) == doctest::Approx(141.9).epsilon(1e-12));
    CHECK(pathloss_access_db(100.0) == doctest::Approx(110.2).epsilon(1e-12));
    CHECK(pathloss_access_db(1.0) == doctest::Approx(36.8).epsilon(1e-12));
    CHECK(pathloss_access_db(1000.0) == doctest::Approx(146.9).epsilon(1e-12));
    CHECK_THROWS_AS(pathloss_fronthaul_db(0.0), std::invalid_argument);
    CHECK_THROWS_AS(pathloss_access_db(-3.0), std::invalid_argument);

    double prev_f = -1e9, prev_a = -1e9;
    for (double d = 1.0; d < 3000.0; d *= 1.3) {
        CHECK(pathloss_fronthaul_db(d) > prev_f);
        CHECK(pathloss_access_db(d) > prev_a);
        prev_f = pathloss_fronthaul_db(d);
        prev_a = pathloss_access_db(d);
    }
}

TEST_CASE("noise powers from the noise floor")
{
    const NoisePowers n = noise_powers(10e6, -174.0, 2.0, 10.0);
    // -102 dBm and -94 dBm in watts
    CHECK(n.sigma_rrh_sq == doctest::Approx(std::pow(10.0, -13.2)).epsilon(1e-12));
    CHECK(n.sigma_ms_sq == doctest::Approx(std::pow(10.0, -12.4)).epsilon(1e-12));
    CHECK(n.sigma_ms_sq / n.sigma_rrh_sq == doctest::Approx(std::pow(10.0, 0.8)).epsilon(1e-12));

    const NoisePowers one = noise_powers(1.0, -174.0, 0.0, 0.0);
    CHECK(one.sigma_rrh_sq == doctest::Approx(std::pow(10.0, -20.4)).epsilon(1e-12));
    CHECK(one.sigma_ms_sq == doctest::Approx(one.sigma_rrh_sq).epsilon(1e-12));
    CHECK_THROWS_AS(noise_powers(0.0, -174.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("config validation")
{
    NetworkConfig c;
    CHECK_NOTHROW(c.validate());
    c.M = 3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = NetworkConfig{};
    c.gamma_ch = -0.1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = NetworkConfig{};
    c.gamma_db = {5.0, 5.0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = NetworkConfig{};
    c.gamma_db[2] = std::nan("");
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("geometry respects the cell and distance guards")
{
    NetworkConfig cfg;
    ChannelParams par;
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng rng(s);
        const Geometry g = sample_geometry(cfg, par, rng);
        CHECK(g.cp_position.x == 0.0);
        CHECK(g.cp_position.y == 0.0);
        REQUIRE(g.rrh_positions.size() == 4u);
        REQUIRE(g.ms_positions.size() == 4u);
        for (const auto& r : g.rrh_positions) {
            CHECK(std::hypot(r.x, r.y) <= 1000.0);
            CHECK(distance(g.cp_position, r) >= 50.0);
            for (const auto& m : g.ms_positions) {
                CHECK(distance(r, m) >= 50.0);
                CHECK(distance(r, m) <= 2000.0);
            }
        }
        for (const auto& m : g.ms_positions) {
            CHECK(std::hypot(m.x, m.y) <= 1000.0);
            CHECK(distance(g.cp_position, m) >= 50.0);
        }
        CHECK(geometry_guards_hold(g, par));
    }
}

TEST_CASE("geometry is deterministic per seed")
{
    NetworkConfig cfg;
    cfg.K = cfg.N = 1;
    cfg.gamma_db = {5.0};
    ChannelParams par;
    Rng a(42), b(42);
    const Geometry g1 = sample_geometry(cfg, par, a), g2 = sample_geometry(cfg, par, b);
    CHECK(g1.rrh_positions[0].x == g2.rrh_positions[0].x);
    CHECK(g1.ms_positions[0].y == g2.ms_positions[0].y);
}

TEST_CASE("fixed positions are kept and checked")
{
    NetworkConfig cfg;
    cfg.K = 2;
    cfg.N = 2;
    cfg.gamma_db = {5.0, 5.0};
    ChannelParams par;
    FixedPositions fx;
    fx.rrh = {{300.0, 0.0}, {-300.0, 0.0}};
    Rng rng(5);
    const Geometry g = sample_geometry(cfg, par, fx, rng);
    CHECK(g.rrh_positions[0].x == 300.0);
    CHECK(g.rrh_positions[1].x == -300.0);
    CHECK(geometry_guards_hold(g, par));

    fx.rrh = {{300.0, 0.0}};
    CHECK_THROWS_AS(sample_geometry(cfg, par, fx, rng), std::invalid_argument);
    fx.rrh = {{3000.0, 0.0}, {0.0, 100.0}};
    CHECK_THROWS_AS(sample_geometry(cfg, par, fx, rng), std::invalid_argument);
}

TEST_CASE("impossible distance guards hit the draw cap")
{
    NetworkConfig cfg;
    cfg.K = cfg.N = 1;
    cfg.gamma_db = {5.0};
    ChannelParams par;
    par.cell_radius_m = 10.0;
    par.min_distance_m = 50.0;
    Rng rng(1);
    CHECK_THROWS_AS(sample_geometry(cfg, par, rng), std::runtime_error);
}

TEST_CASE("channel shapes and unit-gain draws")
{
    NetworkConfig cfg;
    cfg.K = 3;
    cfg.N = 2;
    cfg.L = 3;
    cfg.M = 5;
    cfg.gamma_db.assign(3, 0.0);
    ChannelParams par;
    Rng rng(9);
    const Geometry g = sample_geometry(cfg, par, rng);
    const auto ch = sample_channels(cfg, g, par, rng);
    CHECK(ch.G.rows() == 5);
    CHECK(ch.G.cols() == 6);
    CHECK(ch.h.rows() == 6);
    CHECK(ch.h.cols() == 3);
    CHECK(ch.G.allFinite());
    CHECK(link_gain(0.0, 0.0, 0.0, 0.0) == 1.0);
    CHECK(link_gain(100.0, 9.0, 0.0, -3.0) == doctest::Approx(std::pow(10.0, -9.4)).epsilon(1e-12));
}

TEST_CASE("per-entry access power matches the link gain")
{
    // Without shadowing the gain of each link is deterministic, so the sample mean of
    // |h_kn|^2 / L must approach it.
    NetworkConfig cfg;
    cfg.K = cfg.N = cfg.M = 1;
    cfg.L = 2;
    cfg.gamma_db = {0.0};
    ChannelParams par;
    par.shadowing_std_db = {0.0, 0.0};
    Geometry g;
    g.rrh_positions = {{200.0, 0.0}};
    g.ms_positions = {{200.0, 150.0}};
    const double expect_h = std::pow(10.0, -(36.8 + 36.7 * std::log10(150.0)) / 10.0);
    const double expect_g = std::pow(10.0, (-(24.6 + 39.1 * std::log10(200.0)) + 9.0) / 10.0);
    Rng rng(17);
    double acc_h = 0.0, acc_g = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto ch = sample_channels(cfg, g, par, rng);
        acc_h += ch.h.squaredNorm() / cfg.L;
        acc_g += ch.G.squaredNorm() / (cfg.M * cfg.L);
    }
    CHECK(acc_h / n == doctest::Approx(expect_h).epsilon(0.02));
    CHECK(acc_g / n == doctest::Approx(expect_g).epsilon(0.02));
}

TEST_CASE("shadowing spreads link gains with the configured deviation")
{
    NetworkConfig cfg;
    cfg.K = cfg.N = cfg.M = cfg.L = 1;
    cfg.gamma_db = {0.0};
    ChannelParams par;
    Geometry g;
    g.rrh_positions = {{400.0, 0.0}};
    g.ms_positions = {{0.0, 400.0}};
    // With L = M = 1 the entry power is gain * Exp(1); log of Exp(1) has a fixed
    // variance pi^2/6 (in nepers^2), so the dB variance is shadow^2 + (10/ln10)^2 pi^2/6.
    Rng rng(3);
    const int n = 40000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto ch = sample_channels(cfg, g, par, rng);
        const double db = 10.0 * std::log10(std::norm(ch.h(0, 0)));
        s += db;
        s2 += db * db;
    }
    const double var = s2 / n - (s / n) * (s / n);
    const double c = 10.0 / std::log(10.0);
    const double expect = 16.0 + c * c * M_PI * M_PI / 6.0;
    CHECK(var == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("estimation error: zero error and reported variances")
{
    NetworkConfig cfg;
    ChannelParams par;
    Rng rng(4);
    const auto ch = sample_channels(cfg, sample_geometry(cfg, par, rng), par, rng);
    const auto noise = noise_powers(par);

    const auto exact = apply_estimation_error(ch, cfg.N, cfg.L, 0.0, noise, rng);
    CHECK(exact.G_hat == ch.G);
    CHECK(exact.h_hat == ch.h);
    CHECK(exact.sigma1_sq.isZero());
    CHECK(exact.sigma2_sq.isZero());

    const auto kn = apply_estimation_error(ch, cfg.N, cfg.L, 0.01, noise, rng);
    for (int n = 0; n < cfg.N; ++n) {
        const double from_estimate = 0.01 * kn.G_hat.middleCols(n * cfg.L, cfg.L).squaredNorm() / (cfg.M * cfg.L);
        CHECK(kn.sigma1_sq(n) == doctest::Approx(from_estimate).epsilon(1e-12));
        for (int k = 0; k < cfg.K; ++k) {
            const double e = 0.01 * kn.h_hat.col(k).segment(n * cfg.L, cfg.L).squaredNorm() / cfg.L;
            CHECK(kn.sigma2_sq(k, n) == doctest::Approx(e).epsilon(1e-12));
        }
    }
    CHECK(kn.sigma_rrh_sq == noise.sigma_rrh_sq);
    CHECK_THROWS_AS(apply_estimation_error(ch, cfg.N, cfg.L, -1.0, noise, rng), std::invalid_argument);
}

TEST_CASE("estimation error power ratio approaches gamma_ch")
{
    NetworkConfig cfg;
    cfg.K = 2;
    cfg.N = 2;
    cfg.L = 2;
    cfg.M = 3;
    cfg.gamma_db.assign(2, 0.0);
    ChannelParams par;
    Rng rng(8);
    const auto ch = sample_channels(cfg, sample_geometry(cfg, par, rng), par, rng);
    const auto noise = noise_powers(par);
    const double gch = 0.05;
    const int n = 10000;
    double ratio_g = 0.0, ratio_h = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto kn = apply_estimation_error(ch, cfg.N, cfg.L, gch, noise, rng);
        const CMat dG = ch.G - kn.G_hat;
        ratio_g += dG.middleCols(0, cfg.L).squaredNorm() / ch.G.middleCols(0, cfg.L).squaredNorm();
        const CVec dh = ch.h.col(1) - kn.h_hat.col(1);
        ratio_h += dh.segment(cfg.L, cfg.L).squaredNorm() / ch.h.col(1).segment(cfg.L, cfg.L).squaredNorm();
    }
    CHECK(ratio_g / n == doctest::Approx(gch).epsilon(0.02));
    CHECK(ratio_h / n == doctest::Approx(gch).epsilon(0.02));
}

TEST_CASE("channel pipeline is bit-reproducible")
{
    NetworkConfig cfg;
    ChannelParams par;
    auto build = [&] {
        Rng rng(123);
        const auto g = sample_geometry(cfg, par, rng);
        const auto ch = sample_channels(cfg, g, par, rng);
        return apply_estimation_error(ch, cfg.N, cfg.L, cfg.gamma_ch, noise_powers(par), rng);
    };
    const auto a = build(), b = build();
    CHECK(a.G_hat == b.G_hat);
    CHECK(a.h_hat == b.h_hat);
    CHECK(a.sigma1_sq == b.sigma1_sq);
    CHECK(a.sigma2_sq == b.sigma2_sq);
}
