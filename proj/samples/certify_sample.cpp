// Certifies a mixture file at a given TV level and prints the bounds.
//
//   certify_sample samples/fig_example1_stable.json 0.001 0.45 2.9999999

#include <sgmm/sgmm.hpp>

#include <cstdio>
#include <cstdlib>

int main(int argc, char** argv) {
    if (argc < 3) {
        std::fprintf(stderr, "usage: %s mixture.json epsilon [pi_min] [c]\n", argv[0]);
        return 1;
    }
    try {
        const sgmm::MixtureModel p = sgmm::load_mixture(argv[1]);
        const double epsilon = std::atof(argv[2]);
        sgmm::ClassSpecRule rule;
        rule.pi_min_fraction = 1.0;
        if (argc > 3) {
            rule.pi_min = std::atof(argv[3]);
        }
        if (argc > 4) {
            rule.c = std::atof(argv[4]);
        }
        const auto cert = sgmm::certify(p, rule.resolve(p), epsilon);
        if (!cert.applicable) {
            std::printf("not applicable:");
            for (const auto& id : cert.failed_conditions) {
                std::printf(" %s", id.c_str());
            }
            std::printf("\n");
            return 2;
        }
        std::printf("c0 = %.6g  eta0 = %.6g  c* = %.6g  eta* = %.6g\n", cert.c0, cert.eta0, cert.c_star,
                    cert.eta_star);
        for (std::size_t k = 0; k < cert.per_component.size(); ++k) {
            const auto& b = cert.per_component[k];
            std::printf("component %zu: |mu - mu'| <= %.4g, sigma ratio <= %.4g, |pi - pi'| <= %.4g\n", k,
                        b.mean_bound, b.sigma_ratio_bound, b.proportion_bound);
        }
        if (cert.vacuous) {
            std::printf("(vacuous: component TV bound %.3g >= 0.5)\n", cert.component_tv_bound);
        }
    } catch (const sgmm::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
