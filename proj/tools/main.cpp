// proxidtr command line: simulate, identify-check, estimate, experiment.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "proxidtr/harness.hpp"

using namespace proxidtr;

namespace {

constexpr int kOk = 0, kUsage = 1, kNumerical = 2;

std::set<Component> parse_components(const std::string& list) {
    std::set<Component> out;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.insert(component_from_string(item));
    return out;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    return nlohmann::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proximal multiply robust estimation of two-stage treatment regimes"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "sample from the data-generating process");
    std::size_t n = 35000;
    std::uint64_t seed = 1;
    bool oracle = false;
    std::string out_path;
    sim->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "generator seed");
    sim->add_flag("--oracle", oracle, "include the hidden u0,u1 columns");
    sim->add_option("-o,--output", out_path, "CSV path (stdout if omitted)");

    auto* idc = app.add_subcommand("identify-check", "compare identified densities to the oracle on the true law");
    std::string pseudo_list;
    std::uint64_t pseudo_seed = 7;
    idc->add_option("--pseudo", pseudo_list, "comma-separated components to replace, e.g. h22,q11");
    idc->add_option("--pseudo-seed", pseudo_seed, "seed for pseudo bridges");

    auto* est = app.add_subcommand("estimate", "estimate the value of a regime from data");
    std::string data_path, method = "pmr", regime_path;
    int folds = 1;
    double alpha = 0.0;
    est->add_option("--data", data_path, "CSV produced by simulate")->required();
    est->add_option("--method", method, "por | pha | pipw | pmr | sra | oracle");
    est->add_option("--regime", regime_path, "regime JSON")->required();
    est->add_option("--folds", folds, "cross-fitting folds (1 = none)")->check(CLI::PositiveNumber);
    est->add_option("--laplace", alpha, "Laplace smoothing pseudo-count")->check(CLI::NonNegativeNumber);

    auto* exp = app.add_subcommand("experiment", "run a Monte Carlo experiment");
    std::string config_path, report_path;
    exp->add_option("--config", config_path, "config JSON")->required();
    exp->add_option("-o,--output", report_path, "report CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*sim) {
            Dataset d = sample(DgpParams::defaults(), n, seed);
            if (out_path.empty()) {
                write_csv(std::cout, d, oracle);
            } else {
                std::ofstream f(out_path);
                if (!f) throw std::invalid_argument("cannot write " + out_path);
                write_csv(f, d, oracle);
            }
        } else if (*idc) {
            IdentifyCheck c = identify_check(DgpParams::defaults(), parse_components(pseudo_list), pseudo_seed);
            print_identify_check(std::cout, c);
            return c.pass() ? kOk : kNumerical;
        } else if (*est) {
            std::ifstream f(data_path);
            if (!f) throw std::invalid_argument("cannot open " + data_path);
            Dataset d = read_csv(f);
            Regime r = regime_from_json(read_json(regime_path));
            Method m = method_from_string(method);
            ValueEstimate v;
            if (m == Method::SRA) {
                v = sra_value(d.observed, r);
            } else if (m == Method::Oracle) {
                v = oracle_value(d, r);
            } else {
                FitOptions opts;
                opts.folds = folds;
                opts.laplace_alpha = alpha;
                v = cross_fit(m, d.observed, opts, r);
            }
            std::cout << to_json(v).dump(2) << '\n';
        } else if (*exp) {
            ExperimentConfig cfg = config_from_json(read_json(config_path));
            ExperimentReport rep = run_experiment(cfg);
            std::ofstream f(report_path);
            if (!f) throw std::invalid_argument("cannot write " + report_path);
            emit_csv(f, rep);
            emit_text(std::cout, rep);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kOk;
}
