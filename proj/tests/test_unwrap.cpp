#include <doctest.h>

#include <cmath>
#include <random>

#include "phasorsec/attack.hpp"
#include "phasorsec/errors.hpp"
#include "phasorsec/simulator.hpp"
#include "phasorsec/unwrap.hpp"

using namespace phasorsec;

namespace {

// argmin over N in [-3, 3], ties toward 0
int brute_force_n(double a, double b) {
    int best = 0;
    double best_v = std::abs(b - a);
    for (int N : {1, -1, 2, -2, 3, -3}) {
        const double v = std::abs(b - a + 360.0 * N);
        if (v < best_v) {
            best_v = v;
            best = N;
        }
    }
    return best;
}

std::vector<double> random_wrapped(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-180.0, 180.0);
    std::vector<double> v(n);
    for (auto& x : v) x = wrap_angle(u(rng));
    return v;
}

}  // namespace

TEST_CASE("step_n examples") {
    CHECK(step_n(179.0, -179.0) == 1);
    CHECK(step_n(-170.0, 175.0) == -1);
    CHECK(step_n(10.0, 12.0) == 0);
    CHECK(step_n(180.0, 180.0) == 0);
}

TEST_CASE("step_n exact half turn breaks toward zero") {
    for (double x : {-179.0, -90.0, -0.5, 0.0}) {
        CHECK(step_n(x, x + 180.0) == 0);
        CHECK(brute_force_n(x, x + 180.0) == 0);
    }
    for (double x : {0.5, 90.0, 180.0}) CHECK(step_n(x, x - 180.0) == 0);
}

TEST_CASE("step_n matches brute force on random wrapped pairs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-180.0, 180.0);
    for (int i = 0; i < 200000; ++i) {
        const double a = wrap_angle(u(rng)), b = wrap_angle(u(rng));
        REQUIRE(step_n(a, b) == brute_force_n(a, b));
    }
}

TEST_CASE("unwrap_series examples") {
    const std::vector<double> x{170, 179, -175, -165};
    const auto r = unwrap_series(x);
    CHECK(r.roc == std::vector<int>{0, 0, 1, 1});
    CHECK(r.n_steps == std::vector<int>{0, 1, 0});
    CHECK(r.unwrapped_deg == std::vector<double>{170, 179, 185, 195});

    const auto c = unwrap_series(std::vector<double>{5, 5, 5});
    CHECK(c.unwrapped_deg == std::vector<double>{5, 5, 5});
    CHECK(c.roc == std::vector<int>{0, 0, 0});

    const auto one = unwrap_series(std::vector<double>{-12.5});
    CHECK(one.roc == std::vector<int>{0});
    CHECK(one.n_steps.empty());
}

TEST_CASE("unwrap_series rejects out-of-range input") {
    CHECK_THROWS_AS(unwrap_series(std::vector<double>{0, -180.0}), DomainError);
    CHECK_THROWS_AS(unwrap_series(std::vector<double>{0, 181.0}), DomainError);
    CHECK_THROWS_AS(unwrap_series(std::vector<double>{std::nan("")}), DomainError);
}

TEST_CASE("unwrap invariants on random series") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 300; ++t) {
        const auto x = random_wrapped(rng, 1 + static_cast<std::size_t>(t % 97));
        const auto r = unwrap_series(x);
        REQUIRE(r.roc[0] == 0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            REQUIRE(r.unwrapped_deg[i] == x[i] + 360.0 * r.roc[i]);
            REQUIRE(std::abs(wrap_angle(r.unwrapped_deg[i]) - x[i]) < 1e-9);
            if (i + 1 < x.size()) {
                REQUIRE(r.roc[i + 1] == r.roc[i] + r.n_steps[i]);
                REQUIRE(std::abs(r.unwrapped_deg[i + 1] - r.unwrapped_deg[i]) <= 180.0 + 1e-9);
                const double d = std::abs(x[i + 1] - x[i] + 360.0 * r.n_steps[i]);
                REQUIRE(d <= 180.0);
                // no other N does strictly better
                for (int N = -3; N <= 3; ++N)
                    REQUIRE(std::abs(x[i + 1] - x[i] + 360.0 * N) >= d);
            }
        }
    }
}

TEST_CASE("unwrapping a constant frequency offset gives an affine ramp") {
    SimConfig cfg;
    cfg.m = 1;
    cfg.duration_s = 20.0;
    cfg.f_nominal_hz = 60.1;
    cfg.freq_wander = {0.0, 300.0, 0.0};
    cfg.noise_std_deg = 0.0;
    cfg.channel_offsets_deg = {170.0};
    const auto ch = generate(cfg);
    const auto r = unwrap_series(ch[0].angles());
    for (std::size_t i = 1; i < r.unwrapped_deg.size(); ++i)
        REQUIRE(r.unwrapped_deg[i] - r.unwrapped_deg[i - 1] == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("unwrap_matrix") {
    SUBCASE("single row equals unwrap_series") {
        Matrix Y(1, 4);
        Y << 170, 179, -175, -165;
        const Matrix U = unwrap_matrix(Y);
        CHECK(U(0, 2) == 185.0);
        CHECK(U(0, 3) == 195.0);
    }
    SUBCASE("zeros stay zeros") {
        const Matrix Z = Matrix::Zero(6, 100);
        CHECK(unwrap_matrix(Z) == Z);
    }
    SUBCASE("6x100 window, parallel equals serial bit for bit") {
        SimConfig cfg;
        cfg.duration_s = 100.0 / 30.0;
        cfg.f_nominal_hz = 62.0;
        cfg.noise_std_deg = 2.0;
        const auto ch = generate(cfg);
        const auto Y = assemble_matrix(ch, ch[0].samples[0].t, 100);
        const Matrix U = unwrap_matrix(Y);
        CHECK(U.rows() == 6);
        CHECK(U.cols() == 100);
        CHECK(U == serial::unwrap_matrix(Y.values()));
        for (Eigen::Index c = 0; c < 6; ++c) {
            const auto r = unwrap_series(ch[static_cast<std::size_t>(c)].angles());
            for (Eigen::Index j = 0; j < 100; ++j)
                REQUIRE(U(c, j) == r.unwrapped_deg[static_cast<std::size_t>(j)]);
        }
    }
    SUBCASE("domain error propagates from any row") {
        Matrix Y = Matrix::Zero(4, 10);
        Y(2, 5) = 200.0;
        CHECK_THROWS_AS(unwrap_matrix(Y), DomainError);
        CHECK_THROWS_AS(serial::unwrap_matrix(Y), DomainError);
    }
}

namespace {

std::vector<ChannelSeries> drifting(double offset, double noise, std::uint64_t seed = 3) {
    SimConfig cfg;
    cfg.m = 2;
    cfg.duration_s = 200.0 / 30.0;
    cfg.f_nominal_hz = 60.0 + 0.955 * 30.0 / 360.0;
    cfg.freq_wander = {0.0, 300.0, 0.0};
    cfg.noise_std_deg = noise;
    cfg.channel_offsets_deg = {offset, offset + 1.0};
    cfg.seed = seed;
    return generate(cfg);
}

}  // namespace

TEST_CASE("FDIA that moves no transition leaves ROC steps unchanged") {
    // crossing near sample 25; attack from sample 60 where angles sit far from the boundary
    const auto clean = drifting(180.0 - 0.955 * 25.0, 0.0);
    FdiaSpec f;
    f.onset = clean[0].samples[60].t;
    f.affected_channels = {0};
    f.values = 20.0;
    const auto hit = inject_fdia(clean, f);
    const auto rc = unwrap_series(clean[0].angles());
    const auto ra = unwrap_series(hit[0].angles());
    CHECK(ra.n_steps == rc.n_steps);
    for (std::size_t i = 60; i < 100; ++i)
        REQUIRE(ra.unwrapped_deg[i] - rc.unwrapped_deg[i] == doctest::Approx(20.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 60; ++i) REQUIRE(ra.unwrapped_deg[i] == rc.unwrapped_deg[i]);
}

TEST_CASE("timing splice across a transition changes ROC steps") {
    // wrap transition at sample ~70 lies inside (onset, onset + T)
    const auto clean = drifting(180.0 - 0.955 * 70.0, 0.0);
    TimingSpec t;
    t.onset = clean[0].samples[50].t;
    t.delay_s = 2.0;
    t.affected_channels = std::vector<std::size_t>{0};
    const auto hit = inject_timing(clean, t, 100);
    auto head = clean[0].angles();
    head.resize(100);
    const auto rc = unwrap_series(head);
    const auto ra = unwrap_series(hit[0].angles());
    CHECK(ra.n_steps != rc.n_steps);
}
