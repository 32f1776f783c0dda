#include "proxidtr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace proxidtr {

std::string to_string(Optimizer o) { return o == Optimizer::ValueMax ? "value-max" : "q-learning"; }

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "value-max") return Optimizer::ValueMax;
    if (s == "q-learning") return Optimizer::QLearning;
    throw std::invalid_argument("unknown optimizer: " + s);
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    static const std::set<std::string> known{"scenarios", "methods", "optimizers", "optimizer", "n",
                                             "reps", "base_seed", "seed", "folds", "pseudo_seed",
                                             "laplace_alpha", "class", "threads"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) throw std::invalid_argument("unknown config key: " + k);
    ExperimentConfig c;
    if (j.contains("scenarios")) {
        c.scenarios.clear();
        for (const auto& s : j["scenarios"]) c.scenarios.push_back(scenario_from_string(s));
    }
    if (j.contains("methods")) {
        c.methods.clear();
        for (const auto& s : j["methods"]) c.methods.push_back(method_from_string(s));
    }
    if (j.contains("optimizer")) c.optimizers = {optimizer_from_string(j["optimizer"])};
    if (j.contains("optimizers")) {
        c.optimizers.clear();
        for (const auto& s : j["optimizers"]) c.optimizers.push_back(optimizer_from_string(s));
    }
    c.n = j.value("n", c.n);
    c.reps = j.value("reps", c.reps);
    c.base_seed = j.value("base_seed", j.value("seed", c.base_seed));
    c.folds = j.value("folds", c.folds);
    c.pseudo_seed = j.value("pseudo_seed", c.pseudo_seed);
    c.laplace_alpha = j.value("laplace_alpha", c.laplace_alpha);
    if (j.contains("class")) c.value_class = class_from_string(j["class"]);
    c.threads = j.value("threads", c.threads);
    if (c.n < 1 || c.reps < 1 || c.folds < 1) throw std::invalid_argument("n, reps and folds must be positive");
    return c;
}

const ReportRow* ExperimentReport::find(Scenario s, Method m, Optimizer o) const {
    for (const auto& r : rows)
        if (r.scenario == s && r.method == m && r.optimizer == o) return &r;
    return nullptr;
}

unsigned thread_budget() {
    if (const char* env = std::getenv("PROXIDTR_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return static_cast<unsigned>(t);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

namespace {

struct Outcome {
    double regret;
    double overall;
};

// [scenario][method][optimizer] for one repetition
using RepResult = std::vector<std::vector<std::vector<std::optional<Outcome>>>>;

bool bridge_based(Method m) { return m != Method::SRA && m != Method::Oracle; }

Summary summarize(const std::vector<double>& x) {
    Summary s;
    if (x.empty()) return {NAN, NAN, NAN};
    double k = static_cast<double>(x.size());
    double sum = 0.0, sq = 0.0;
    for (double v : x) {
        sum += v;
        sq += v * v;
    }
    s.mean = sum / k;
    s.rmse = std::sqrt(sq / k);
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(ss / (k - 1.0) / k);
    }
    return s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const JointPmf truth = true_joint(cfg.params);
    const PotentialDensity oracle = oracle_density(truth);
    const auto py0 = y0_marginal(truth);
    auto true_v = [&](const Regime& d) { return regime_value(oracle, py0, d); };

    std::map<Optimizer, double> optimum;
    for (Optimizer o : cfg.optimizers) {
        ClassTag cls = o == Optimizer::ValueMax ? cfg.value_class : ClassTag::AllBoolean;
        optimum[o] = value_maximize(true_v, enumerate_class(cls)).second;
    }
    const RegimeClass& search = enumerate_class(cfg.value_class);

    const std::size_t S = cfg.scenarios.size(), M = cfg.methods.size(), O = cfg.optimizers.size();
    std::vector<RepResult> results(cfg.reps);

    auto assess = [&](const FittedValue& fv, Optimizer o) -> std::optional<Outcome> {
        try {
            Regime d;
            double est;
            if (o == Optimizer::ValueMax) {
                auto best = value_maximize([&](const Regime& r) { return fv.value(r); }, search);
                d = best.first;
                est = best.second;
            } else {
                d = q_learning_regime(fv.q_tables());
                est = fv.value(d);
            }
            double vstar = optimum.at(o);
            return Outcome{vstar - true_v(d), std::abs(vstar - est)};
        } catch (const NumericalError&) {
            return std::nullopt;
        }
    };

    auto run_rep = [&](int rep) {
        RepResult out(S, std::vector<std::vector<std::optional<Outcome>>>(M, std::vector<std::optional<Outcome>>(O)));
        Dataset data = sample(cfg.params, cfg.n, cfg.base_seed + static_cast<std::uint64_t>(rep));

        std::optional<FoldFits> fits;
        bool need_bridges = false;
        for (Method m : cfg.methods) need_bridges |= bridge_based(m);
        if (need_bridges) {
            try {
                fits.emplace(data.observed, cfg.folds, cfg.laplace_alpha);
            } catch (const NumericalError&) {
            }
        }
        for (std::size_t mi = 0; mi < M; ++mi) {
            Method m = cfg.methods[mi];
            if (!bridge_based(m)) {
                // identical across scenarios
                std::vector<std::optional<Outcome>> per_opt(O);
                try {
                    FittedValue fv = [&] {
                        if (m == Method::SRA) {
                            JointPmf pmf = empirical_pmf(data.observed);
                            return FittedValue::from_density(sra_density(pmf), pmf);
                        }
                        JointPmf full = empirical_full_pmf(data);
                        return FittedValue::from_density(IdentifiedDensity{Method::Oracle, oracle_density(full), {}},
                                                         full);
                    }();
                    for (std::size_t oi = 0; oi < O; ++oi) per_opt[oi] = assess(fv, cfg.optimizers[oi]);
                } catch (const NumericalError&) {
                }
                for (std::size_t si = 0; si < S; ++si) out[si][mi] = per_opt;
                continue;
            }
            if (!fits) continue;
            for (std::size_t si = 0; si < S; ++si) {
                try {
                    FittedValue fv = fits->model(m, pseudo_components(cfg.scenarios[si]), cfg.pseudo_seed);
                    for (std::size_t oi = 0; oi < O; ++oi) out[si][mi][oi] = assess(fv, cfg.optimizers[oi]);
                } catch (const NumericalError&) {
                }
            }
        }
        results[rep] = std::move(out);
    };

    unsigned threads = cfg.threads ? cfg.threads : thread_budget();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfg.reps)));
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int rep; (rep = next.fetch_add(1)) < cfg.reps;) run_rep(rep);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    ExperimentReport report;
    report.n = cfg.n;
    report.base_seed = cfg.base_seed;
    report.pseudo_seed = cfg.pseudo_seed;
    report.folds = cfg.folds;
    report.optimum = optimum;
    for (std::size_t oi = 0; oi < O; ++oi)
        for (std::size_t si = 0; si < S; ++si)
            for (std::size_t mi = 0; mi < M; ++mi) {
                std::vector<double> regret, overall;
                int failures = 0;
                for (int rep = 0; rep < cfg.reps; ++rep) {
                    const auto& r = results[rep][si][mi][oi];
                    if (!r) {
                        ++failures;
                        continue;
                    }
                    regret.push_back(r->regret);
                    overall.push_back(r->overall);
                }
                report.rows.push_back({cfg.scenarios[si], cfg.methods[mi], cfg.optimizers[oi],
                                       static_cast<int>(regret.size()), failures, summarize(regret),
                                       summarize(overall)});
            }
    return report;
}

std::string format_metric(double x, int precision) {
    if (std::isnan(x)) return "NA";
    if (std::abs(x) < 1e-10) return kEpsilonMark;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, x);
    return buf;
}

namespace {

constexpr const char* kCsvHeader =
    "scenario,method,optimizer,n,reps,failures,regret_mean,regret_se,regret_rmse,overall_mean,overall_se,"
    "overall_rmse";

// setw pads by bytes; pad by code points so "<ε" cells line up
std::string pad(const std::string& s, std::size_t width) {
    std::size_t cps = 0;
    for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
    return cps >= width ? s + " " : s + std::string(width - cps, ' ');
}

double parse_metric(const std::string& s) {
    if (s == kEpsilonMark) return 0.0;
    if (s == "NA") return NAN;
    return std::stod(s);
}

}  // namespace

void emit_csv(std::ostream& os, const ExperimentReport& r) {
    os << kCsvHeader << '\n';
    for (const auto& row : r.rows) {
        os << to_string(row.scenario) << ',' << to_string(row.method) << ',' << to_string(row.optimizer) << ','
           << r.n << ',' << row.reps << ',' << row.failures;
        for (const Summary* s : {&row.regret, &row.overall})
            os << ',' << format_metric(s->mean, 10) << ',' << format_metric(s->se, 10) << ','
               << format_metric(s->rmse, 10);
        os << '\n';
    }
}

ExperimentReport parse_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kCsvHeader) throw std::invalid_argument("not a report CSV");
    ExperimentReport r;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
        if (f.size() != 12) throw std::invalid_argument("malformed report line: " + line);
        ReportRow row{scenario_from_string(f[0]), method_from_string(f[1]), optimizer_from_string(f[2]),
                      std::stoi(f[4]), std::stoi(f[5]),
                      {parse_metric(f[6]), parse_metric(f[7]), parse_metric(f[8])},
                      {parse_metric(f[9]), parse_metric(f[10]), parse_metric(f[11])}};
        r.n = std::stoull(f[3]);
        r.rows.push_back(row);
    }
    return r;
}

void emit_text(std::ostream& os, const ExperimentReport& r) {
    std::vector<Scenario> scenarios;
    std::vector<Method> methods;
    std::vector<Optimizer> optimizers;
    auto add = [](auto& v, auto x) {
        if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
    };
    for (const auto& row : r.rows) {
        add(scenarios, row.scenario);
        add(optimizers, row.optimizer);
        if (bridge_based(row.method)) add(methods, row.method);
    }
    const int w0 = 13, w = 20;
    for (Optimizer o : optimizers) {
        auto opt = r.optimum.find(o);
        for (int metric = 0; metric < 2; ++metric) {
            const char* name = metric == 0 ? "Regret" : "Overall error";
            for (int block = 0; block < 2; ++block) {
                os << name << ", " << to_string(o) << (block == 0 ? ": mean (SE)" : ": RMSE") << ", n = " << r.n;
                if (opt != r.optimum.end()) os << ", V* = " << format_metric(opt->second);
                os << '\n' << pad("scenario", w0);
                for (Method m : methods) os << pad(to_string(m), w);
                os << '\n';
                for (Scenario s : scenarios) {
                    os << pad(to_string(s), w0);
                    for (Method m : methods) {
                        const ReportRow* row = r.find(s, m, o);
                        std::string cell = "-";
                        if (row) {
                            const Summary& x = metric == 0 ? row->regret : row->overall;
                            cell = block == 0 ? format_metric(x.mean) + " (" + format_metric(x.se) + ")"
                                              : format_metric(x.rmse);
                            if (row->failures) cell += " f" + std::to_string(row->failures);
                        }
                        os << pad(cell, w);
                    }
                    os << '\n';
                }
                os << '\n';
            }
        }
        for (Method m : {Method::SRA, Method::Oracle}) {
            const ReportRow* row = nullptr;
            for (Scenario s : scenarios)
                if ((row = r.find(s, m, o))) break;
            if (!row) continue;
            os << to_string(m) << ", " << to_string(o) << ": regret " << format_metric(row->regret.mean) << " ("
               << format_metric(row->regret.se) << "), RMSE " << format_metric(row->regret.rmse)
               << "; overall error " << format_metric(row->overall.mean) << " (" << format_metric(row->overall.se)
               << "), RMSE " << format_metric(row->overall.rmse) << '\n';
        }
        os << '\n';
    }
}

bool IdentifyCheck::pass(double tol) const {
    for (const auto& [m, d] : deviation)
        if (!(d <= tol)) return false;
    return true;
}

IdentifyCheck identify_check(const DgpParams& params, const std::set<Component>& pseudo, std::uint64_t pseudo_seed) {
    JointPmf truth = true_joint(params);
    PotentialDensity oracle = oracle_density(truth);
    BridgeSet b = solve_bridges(truth, Provenance::SolvedFromTruth);
    IdentifyCheck c;
    c.bridge_residual = verify_bridges(b, truth).max();
    if (!pseudo.empty()) b.overlay(pseudo_bridges(pseudo_seed, pseudo));
    for (Method m : {Method::POR, Method::PHA, Method::PIPW, Method::PMR})
        c.deviation[m] = max_deviation(identified_density(m, truth, b).density, oracle);
    return c;
}

void print_identify_check(std::ostream& os, const IdentifyCheck& c, double tol) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "bridge residual (solved from truth)  %.3e\n", c.bridge_residual);
    os << buf;
    for (const auto& [m, d] : c.deviation) {
        std::snprintf(buf, sizeof buf, "%-5s max |g - g_oracle| = %.3e  %s\n", to_string(m).c_str(), d,
                      d <= tol ? "ok" : "FAIL");
        os << buf;
    }
    os << (c.pass(tol) ? "identification check passed" : "identification check FAILED") << '\n';
}

}  // namespace proxidtr
