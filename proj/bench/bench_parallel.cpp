// Serial reference vs OpenMP kernels on the same inputs.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <omp.h>

#include "phasorsec/detector.hpp"
#include "phasorsec/lowrank.hpp"
#include "phasorsec/simulator.hpp"
#include "phasorsec/unwrap.hpp"

using namespace phasorsec;
using Clock = std::chrono::steady_clock;

template <class F>
double best_ms(int reps, F&& f) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        f();
        const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
        best = std::min(best, ms);
    }
    return best;
}

int main(int argc, char** argv) {
    const double minutes = argc > 1 ? std::atof(argv[1]) : 5.0;
    SimConfig sim;
    sim.duration_s = 60.0 * minutes;
    sim.f_nominal_hz = 60.08;
    sim.noise_std_deg = 1.0;
    const auto ch = generate(sim);
    DetectorConfig cfg;
    const auto base = calibrate_baseline(ch, cfg);
    const std::span<const Baseline> bs(&base, 1);

    // wide matrix for the row kernels
    Matrix Y(64, 20000);
    for (Eigen::Index i = 0; i < Y.rows(); ++i)
        for (Eigen::Index j = 0; j < Y.cols(); ++j)
            Y(i, j) = wrap_angle(0.7 * static_cast<double>(j) * (1.0 + 0.01 * static_cast<double>(i)));

    std::printf("threads: %d, windows: %zu\n", omp_get_max_threads(),
                window_count(ch[0].samples.size(), cfg));
    std::printf("%-18s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

    auto row = [](const char* name, double s, double p) {
        std::printf("%-18s %12.2f %12.2f %8.2f\n", name, s, p, s / p);
    };
    row("unwrap_matrix", best_ms(5, [&] { serial::unwrap_matrix(Y); }),
        best_ms(5, [&] { unwrap_matrix(Y); }));
    // 64 x 200 rows by 3801 columns, about 390 MB
    const Matrix Yh = Y.leftCols(4000);
    row("build_hankel", best_ms(5, [&] { serial::build_hankel(Yh, 200); }),
        best_ms(5, [&] { build_hankel(Yh, 200); }));
    row("classify_stream", best_ms(2, [&] { serial::classify_stream(ch, cfg, bs); }),
        best_ms(2, [&] { classify_stream(ch, cfg, bs); }));
    return 0;
}
