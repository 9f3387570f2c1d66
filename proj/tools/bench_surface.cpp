// Timing harness: streaming surface kernel (serial vs OpenMP) against the
// unfused reference, plus an optional simulation batch. Verifies that all
// builds agree bitwise before reporting speedups.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "drg/sim.hpp"
#include "drg/surface.hpp"

namespace {

template <typename F>
double time_s(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    drg::IndexConfig cfg;
    cfg.k = 0.5;
    cfg.beta = 0.9999;
    cfg.T = 200;
    cfg.np = 101;
    cfg.ngamma = 201;
    bool with_sim = false;
    bool with_reference = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--sim") == 0) with_sim = true;
        else if (std::strcmp(argv[i], "--reference") == 0) with_reference = true;
        else if (std::strcmp(argv[i], "--T") == 0 && i + 1 < argc) cfg.T = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--np") == 0 && i + 1 < argc) cfg.np = std::atoi(argv[++i]);
        else if (std::strcmp(argv[i], "--ngamma") == 0 && i + 1 < argc) cfg.ngamma = std::atoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: bench_surface [--T n] [--np n] [--ngamma n] [--reference] [--sim]\n");
            return 2;
        }
    }
    cfg.validate();

    int threads = 1;
#ifdef _OPENMP
#pragma omp parallel
#pragma omp single
    threads = omp_get_num_threads();
#endif
    std::printf("surface build: T=%d Np=%d Ngamma=%d, %d thread(s)\n", cfg.T, cfg.np,
                cfg.ngamma, threads);

    drg::IndexSurface serial, parallel;
    const double ts = time_s([&] { serial = drg::build_surface(cfg, drg::ExecMode::Serial); });
    const double tp = time_s([&] { parallel = drg::build_surface(cfg, drg::ExecMode::Parallel); });
    if (serial.gamma != parallel.gamma) {
        std::fprintf(stderr, "FAIL: serial and parallel surfaces differ\n");
        return 1;
    }
    std::printf("  serial   %8.3f s\n", ts);
    std::printf("  parallel %8.3f s  (speedup %.2fx, bitwise identical)\n", tp, ts / tp);

    if (with_reference) {
        drg::IndexSurface ref;
        const double tr = time_s([&] { ref = drg::build_surface_reference(cfg); });
        if (ref.gamma != serial.gamma) {
            std::fprintf(stderr, "FAIL: reference surface differs from streaming kernel\n");
            return 1;
        }
        std::printf("  reference %7.3f s  (unfused per-gamma tables, bitwise identical)\n", tr);
    }

    if (with_sim) {
        drg::ScenarioConfig sc;
        sc.M = 10;
        sc.L = 500;
        sc.seed = 17;
        const std::vector<drg::PolicySpec> pols = {drg::GreedyPolicy{}, drg::ThompsonPolicy{},
                                                   drg::UcbPolicy{}};
        std::vector<drg::SummaryRow> rs, rp;
        const double bs = time_s([&] { rs = drg::run_batch(pols, sc, 100, drg::ExecMode::Serial); });
        const double bp = time_s([&] { rp = drg::run_batch(pols, sc, 100, drg::ExecMode::Parallel); });
        for (std::size_t i = 0; i < rs.size(); ++i)
            if (rs[i].mean != rp[i].mean || rs[i].sd != rp[i].sd) {
                std::fprintf(stderr, "FAIL: batch results differ across modes\n");
                return 1;
            }
        std::printf("sim batch (M=10, L=500, 100 sims, 3 policies):\n");
        std::printf("  serial   %8.3f s\n", bs);
        std::printf("  parallel %8.3f s  (speedup %.2fx, identical summaries)\n", bp, bs / bp);
    }
    return 0;
}
