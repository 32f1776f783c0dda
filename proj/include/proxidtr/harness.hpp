#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "proxidtr/estimators.hpp"

namespace proxidtr {

enum class Optimizer { ValueMax, QLearning };
std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

struct ExperimentConfig {
    std::vector<Scenario> scenarios{Scenario::AllCorrect, Scenario::M0Correct, Scenario::M1Correct,
                                    Scenario::M2Correct, Scenario::AllWrong};
    std::vector<Method> methods{Method::POR, Method::PHA, Method::PIPW, Method::PMR, Method::SRA, Method::Oracle};
    std::vector<Optimizer> optimizers{Optimizer::ValueMax, Optimizer::QLearning};
    std::size_t n = 35000;
    int reps = 20;
    std::uint64_t base_seed = 20240101;
    int folds = 5;
    std::uint64_t pseudo_seed = 7;
    double laplace_alpha = 0.0;
    // class searched by value maximization; Q-learning is unrestricted
    ClassTag value_class = ClassTag::Linear;
    unsigned threads = 0;  // 0 = PROXIDTR_THREADS or hardware concurrency
    DgpParams params = DgpParams::defaults();
};

ExperimentConfig config_from_json(const nlohmann::json& j);

struct Summary {
    double mean = 0.0;
    double se = 0.0;
    double rmse = 0.0;
};

struct ReportRow {
    Scenario scenario;
    Method method;
    Optimizer optimizer;
    int reps = 0;      // successful repetitions
    int failures = 0;  // repetitions excluded after a numerical error
    Summary regret;
    Summary overall;
};

struct ExperimentReport {
    std::size_t n = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t pseudo_seed = 0;
    int folds = 0;
    std::map<Optimizer, double> optimum;  // true class optimum per optimizer
    std::vector<ReportRow> rows;

    const ReportRow* find(Scenario s, Method m, Optimizer o) const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// Thread budget: PROXIDTR_THREADS if set, else hardware concurrency.
unsigned thread_budget();

// Numbers below 1e-10 in magnitude print as this.
inline constexpr const char* kEpsilonMark = "<ε";
std::string format_metric(double x, int precision = 4);

void emit_csv(std::ostream& os, const ExperimentReport& r);
void emit_text(std::ostream& os, const ExperimentReport& r);
ExperimentReport parse_csv(std::istream& is);

struct IdentifyCheck {
    std::map<Method, double> deviation;  // max cell deviation from the oracle
    double bridge_residual = 0.0;
    bool pass(double tol = 1e-9) const;
};

IdentifyCheck identify_check(const DgpParams& params, const std::set<Component>& pseudo = {},
                             std::uint64_t pseudo_seed = 0);
void print_identify_check(std::ostream& os, const IdentifyCheck& c, double tol = 1e-9);

}  // namespace proxidtr
