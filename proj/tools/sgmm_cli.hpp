#pragma once

// Command-line front end for sgmm_cert. Kept in a header so tests can run
// commands in-process with captured streams.

#include <sgmm/sgmm.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sgmm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInapplicable = 2;

/// "2:40" (inclusive range) or "2,5,10".
inline std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    const auto colon = text.find(':');
    try {
        if (colon != std::string::npos) {
            const int lo = std::stoi(text.substr(0, colon));
            const int hi = std::stoi(text.substr(colon + 1));
            if (hi < lo) {
                throw ParseError("empty range: " + text);
            }
            for (int k = lo; k <= hi; ++k) {
                out.push_back(k);
            }
            return out;
        }
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (!item.empty()) {
                out.push_back(std::stoi(item));
            }
        }
    } catch (const std::logic_error&) {
        throw ParseError("cannot parse integer list: " + text);
    }
    if (out.empty()) {
        throw ParseError("empty integer list: " + text);
    }
    return out;
}

struct Output {
    std::string path;
    std::ostream& fallback;
    std::ofstream file;

    std::ostream& open() {
        if (path.empty() || path == "-") {
            return fallback;
        }
        const auto parent = std::filesystem::path(path).parent_path();
        if (!parent.empty() && !std::filesystem::is_directory(parent)) {
            throw ParseError("output directory does not exist: " + parent.string());
        }
        file.open(path);
        if (!file) {
            throw ParseError("cannot write " + path);
        }
        return file;
    }
};

struct CertifyArgs {
    std::string mixture;
    std::string example;
    std::optional<double> pi_min;
    std::optional<double> pi_max;
    std::string c = "auto";
    double epsilon = 0.0;
};

struct MinSepArgs {
    std::vector<int> d{5, 20, 35};
    std::string K = "2:40";
    std::vector<double> eta_pi{1, 2, 4, 8, 16};
    double epsilon = 0.0;
};

struct BoundsArgs {
    int d = 20;
    std::string K = "2,5,10";
    std::vector<double> c{3, 4, 5, 6};
    std::vector<double> epsilon{1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    std::optional<double> pi_min;
};

struct ContaminateArgs {
    std::string example;
    std::string base;
    std::string contaminant;
    std::vector<double> lambda{0.0, 0.01, 0.1};
    std::vector<double> sweep;
    int K = 2;
    std::int64_t n = 1000000;
    std::uint64_t seed = 0;
    std::optional<double> pi_min;
    std::optional<double> pi_max;
    std::string c = "auto";
};

struct TvArgs {
    std::string a;
    std::string b;
    std::int64_t n = 1000000;
    std::uint64_t seed = 0;
    bool exact = false;
};

inline std::optional<double> parse_c(const std::string& text) {
    if (text == "auto") {
        return std::nullopt;
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw ParseError("bad --c value: " + text);
        }
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("bad --c value: " + text);
    }
}

inline int cmd_certify(const CertifyArgs& a, std::ostream& out) {
    if (a.mixture.empty() == a.example.empty()) {
        throw ParseError("certify: give exactly one of a mixture file or --example");
    }
    const MixtureModel p = a.example.empty() ? load_mixture(a.mixture) : builtin_example(a.example).first;
    ClassSpecRule rule;
    rule.pi_min = a.pi_min;
    rule.pi_max = a.pi_max;
    rule.c = parse_c(a.c);
    rule.pi_min_fraction = 1.0;
    const ModelClassSpec spec = rule.resolve(p);
    const StabilityCertificate cert = certify(p, spec, a.epsilon);
    out << to_json(cert).dump(2) << '\n';
    return cert.applicable ? kExitOk : kExitInapplicable;
}

inline int cmd_min_separation(const MinSepArgs& a, std::ostream& out) {
    const std::vector<int> ks = parse_int_list(a.K);
    out << "d,K,eta_pi,c0,eta0,c0_eta0,pi_min,pi_max,status\n";
    for (int d : a.d) {
        for (double eta_pi : a.eta_pi) {
            for (int k : ks) {
                const double pi_min = 1.0 / (k - 1 + eta_pi);
                const double pi_max = 1.0 - (k - 1) * pi_min;
                out << d << ',' << k << ',' << fmt12(eta_pi) << ',';
                std::string status = "ok";
                if (k < 2 || d < 1 || !(eta_pi >= 1.0)) {
                    status = "infeasible";
                } else {
                    try {
                        const StabilityInputs in{ModelClassSpec{k, pi_min, pi_max, 0.0}, a.epsilon, d};
                        const double c0 = solve_c0(pi_min, a.epsilon);
                        const double eta0 = solve_eta0(in);
                        out << fmt12(c0) << ',' << fmt12(eta0) << ',' << fmt12(c0 * eta0) << ',' << fmt12(pi_min)
                            << ',' << fmt12(pi_max) << ',' << status << '\n';
                        continue;
                    } catch (const Error&) {
                        status = "infeasible";
                    }
                }
                out << ",,," << fmt12(pi_min) << ',' << fmt12(pi_max) << ',' << status << '\n';
            }
        }
    }
    return kExitOk;
}

inline int cmd_bounds_sweep(const BoundsArgs& a, std::ostream& out) {
    const std::vector<int> ks = parse_int_list(a.K);
    out << "K,c,epsilon,c_star,eta_star_minus_1,pi_bound_over_pi_min,d,pi_min,pi_max,status\n";
    for (int k : ks) {
        const double pi_min = a.pi_min.value_or(1.0 / (k + 1));
        const ModelClassSpec base = ModelClassSpec::with_default_pi_max(k, pi_min, 0.0);
        for (double c : a.c) {
            for (double eps : a.epsilon) {
                ModelClassSpec spec = base;
                spec.c = c;
                const StabilityInputs in{spec, eps, a.d};
                out << k << ',' << fmt12(c) << ',' << fmt12(eps) << ',';
                std::string status = "ok";
                try {
                    const RefinementTrace t = refine(in);
                    const double pb = proportion_bound(in, t.c_star, t.eta_star);
                    out << fmt12(t.c_star) << ',' << fmt12(t.eta_star - 1.0) << ',' << fmt12(pb / pi_min);
                } catch (const SeparationTooSmall&) {
                    status = condition::separation;
                    out << ",,";
                } catch (const InfeasibleEpsilon&) {
                    status = condition::epsilon;
                    out << ",,";
                } catch (const Error&) {
                    status = condition::refinement;
                    out << ",,";
                }
                out << ',' << a.d << ',' << fmt12(spec.pi_min) << ',' << fmt12(spec.pi_max) << ',' << status << '\n';
            }
        }
    }
    return kExitOk;
}

inline int cmd_contaminate(const ContaminateArgs& a, std::ostream& out) {
    const bool by_example = !a.example.empty();
    if (by_example == (!a.base.empty() || !a.contaminant.empty())) {
        throw ParseError("contaminate: give either --example or both --base and --contaminant");
    }
    if (!by_example && (a.base.empty() || a.contaminant.empty())) {
        throw ParseError("contaminate: --base and --contaminant are both required");
    }
    if (a.n < 1000) {
        throw ParseError("contaminate: --n must be >= 1000");
    }
    ClassSpecRule rule;
    rule.pi_min = a.pi_min;
    rule.pi_max = a.pi_max;
    rule.c = parse_c(a.c);
    std::optional<MixtureModel> base;
    std::optional<MixtureModel> contaminant;
    if (!by_example) {
        base = load_mixture(a.base);
        contaminant = load_mixture(a.contaminant);
    }
    out << "# seed=" << a.seed << " n=" << a.n << " source=" << (by_example ? a.example : "files") << '\n';
    bool header = true;
    for (double lambda : a.lambda) {
        ContaminationScenario sc;
        if (by_example) {
            ExampleParams params;
            params.K = a.K;
            sc = example_scenario(a.example, lambda, a.sweep, params);
        } else {
            sc = fixed_scenario(*base, *contaminant, lambda, a.sweep.empty() ? std::vector<double>{0.0} : a.sweep);
        }
        write_contamination_csv(out, run_contamination(sc, rule, a.n, a.seed), header);
        header = false;
    }
    return kExitOk;
}

inline int cmd_tv(const TvArgs& a, std::ostream& out) {
    const MixtureModel p = load_mixture(a.a);
    const MixtureModel q = load_mixture(a.b);
    if (p.dim() != q.dim()) {
        throw DimensionMismatch("tv: inputs have different dimensions");
    }
    if (a.exact) {
        if (p.size() != 1 || q.size() != 1) {
            throw ParseError("tv: --exact requires single-component inputs");
        }
        const nlohmann::json j{{"exact", tv_exact(p.component(0), q.component(0))}};
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    if (a.n < 1000) {
        throw ParseError("tv: --n must be >= 1000");
    }
    out << to_json(mc_tv(p, q, a.n, a.seed)).dump(2) << '\n';
    return kExitOk;
}

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parameter-stability certificates for spherical Gaussian mixtures", "sgmm_cert"};
    app.require_subcommand(1);
    std::string output;
    app.add_option("-o,--output", output, "Write to this file instead of stdout");

    CertifyArgs ca;
    auto* certify_cmd = app.add_subcommand("certify", "Certificate for one mixture (exit 2 when inapplicable)");
    certify_cmd->add_option("mixture", ca.mixture, "Mixture JSON file");
    certify_cmd->add_option("--example", ca.example, "Built-in example id instead of a file");
    certify_cmd->add_option("--pi-min", ca.pi_min, "Class pi_min (default: smallest weight)");
    certify_cmd->add_option("--pi-max", ca.pi_max, "Class pi_max (default: 1 - (K-1) pi_min)");
    certify_cmd->add_option("--c", ca.c, "Class separation c, or 'auto' for min s_ij - 1e-9")->capture_default_str();
    certify_cmd->add_option("--epsilon", ca.epsilon, "TV goodness-of-fit level")->capture_default_str();

    MinSepArgs ma;
    auto* minsep_cmd = app.add_subcommand("min-separation", "CSV of c0, eta0 and c0*eta0 over (d, K, eta_pi)");
    minsep_cmd->add_option("--d", ma.d, "Dimensions")->delimiter(',')->capture_default_str();
    minsep_cmd->add_option("--K", ma.K, "K values: 'lo:hi' or a comma list")->capture_default_str();
    minsep_cmd->add_option("--eta-pi", ma.eta_pi, "pi_max / pi_min ratios")->delimiter(',')->capture_default_str();
    minsep_cmd->add_option("--epsilon", ma.epsilon)->capture_default_str();

    BoundsArgs ba;
    auto* bounds_cmd = app.add_subcommand("bounds-sweep", "CSV of c*, eta*-1 and pi bound / pi_min over (K, c, eps)");
    bounds_cmd->add_option("--d", ba.d)->capture_default_str();
    bounds_cmd->add_option("--K", ba.K, "K values: 'lo:hi' or a comma list")->capture_default_str();
    bounds_cmd->add_option("--c", ba.c, "Separations")->delimiter(',')->capture_default_str();
    bounds_cmd->add_option("--epsilon-grid", ba.epsilon, "Epsilon values")->delimiter(',')->capture_default_str();
    bounds_cmd->add_option("--pi-min", ba.pi_min, "Class pi_min (default: 1/(K+1))");

    ContaminateArgs ta;
    auto* contam_cmd = app.add_subcommand("contaminate", "Contamination study CSV, one row per (lambda, sweep value)");
    contam_cmd->add_option("--example", ta.example, "example1 | example2-noise | example2-outlier");
    contam_cmd->add_option("--base", ta.base, "Base mixture JSON (P0)");
    contam_cmd->add_option("--contaminant", ta.contaminant, "Contaminant mixture JSON (Q)");
    contam_cmd->add_option("--lambda", ta.lambda, "Contamination fractions")->delimiter(',')->capture_default_str();
    contam_cmd->add_option("--sweep", ta.sweep, "Sweep values (sigma for example1, s for example2)")->delimiter(',');
    contam_cmd->add_option("--K", ta.K, "Components for example2")->capture_default_str();
    contam_cmd->add_option("--n", ta.n, "Monte Carlo samples")->capture_default_str();
    contam_cmd->add_option("--seed", ta.seed)->capture_default_str();
    contam_cmd->add_option("--pi-min", ta.pi_min, "Class pi_min (default: 0.9 * smallest weight)");
    contam_cmd->add_option("--pi-max", ta.pi_max, "Class pi_max (default: 1 - (K-1) pi_min)");
    contam_cmd->add_option("--c", ta.c, "Class separation c, or 'auto'")->capture_default_str();

    TvArgs va;
    auto* tv_cmd = app.add_subcommand("tv", "Total variation between two mixtures");
    tv_cmd->add_option("a", va.a, "First mixture JSON")->required();
    tv_cmd->add_option("b", va.b, "Second mixture JSON")->required();
    tv_cmd->add_option("--n", va.n, "Monte Carlo samples")->capture_default_str();
    tv_cmd->add_option("--seed", va.seed)->capture_default_str();
    tv_cmd->add_flag("--exact", va.exact, "Closed form; single-component inputs only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        Output sink{output, out, {}};
        std::ostream& os = sink.open();
        if (*certify_cmd) {
            return cmd_certify(ca, os);
        }
        if (*minsep_cmd) {
            return cmd_min_separation(ma, os);
        }
        if (*bounds_cmd) {
            return cmd_bounds_sweep(ba, os);
        }
        if (*contam_cmd) {
            return cmd_contaminate(ta, os);
        }
        if (*tv_cmd) {
            return cmd_tv(va, os);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace sgmm::cli
