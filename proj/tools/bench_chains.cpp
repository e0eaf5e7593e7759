// Compares the OpenMP chain driver against the serial reference on the
// trimodal analytic target and checks that both produce identical stores.

#include "elute/posterior.hpp"
#include "elute/sampler.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace elute;

namespace {

GaussianMixtureTarget make_trimodal() {
    std::vector<GaussianMixtureTarget::Mode> modes(3);
    modes[0].mean = Eigen::Vector2d(0.0, 0.0);
    modes[1].mean = Eigen::Vector2d(20.0, 0.0);
    modes[2].mean = Eigen::Vector2d(10.0, 17.3205);
    for (auto& m : modes) {
        m.weight = 1.0;
        m.covariance = Eigen::Matrix2d::Identity();
    }
    return GaussianMixtureTarget(std::move(modes), Eigen::Vector2d(-5.0, -5.0),
                                 Eigen::Vector2d(25.0, 22.0));
}

double run_once(const GaussianMixtureTarget& target, const SamplerConfig& config,
                bool use_openmp, ChainStore& store_out) {
    const auto start = std::chrono::steady_clock::now();
    store_out = run_parallel(target, config, use_openmp);
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(end - start).count();
}

} // namespace

int main(int argc, char** argv) {
    SamplerConfig config;
    config.chains = argc > 1 ? std::atoi(argv[1]) : 6;
    config.iterations = argc > 2 ? std::atol(argv[2]) : 30000;
    config.master_seed = 42;
    config.delayed_rejection = true;
    config.adapt_interval = 100;

    const auto target = make_trimodal();

    ChainStore serial_store, parallel_store;
    const double t_serial = run_once(target, config, false, serial_store);
    const double t_parallel = run_once(target, config, true, parallel_store);

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("chains=%d iterations=%ld threads=%d\n", config.chains, config.iterations,
                threads);
    std::printf("serial reference: %8.3f s\n", t_serial);
    std::printf("openmp chains:    %8.3f s  (speedup %.2fx)\n", t_parallel,
                t_serial / t_parallel);
    if (!serial_store.equals(parallel_store)) {
        std::printf("MISMATCH: serial and OpenMP stores differ\n");
        return 1;
    }
    std::printf("stores identical: yes\n");
    return 0;
}
