#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "proxidtr/identify.hpp"

namespace proxidtr {

enum class Scenario { AllCorrect, M0Correct, M1Correct, M2Correct, AllWrong };
std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);
// Components replaced by pseudo versions under the scenario.
std::set<Component> pseudo_components(Scenario s);

struct FitOptions {
    int folds = 5;
    double laplace_alpha = 0.0;  // 0 = raw frequencies
    std::set<Component> pseudo;
    std::uint64_t pseudo_seed = 0;
};

struct ValueEstimate {
    Method method;
    double estimate = 0.0;
    std::optional<double> variance;  // influence-function variance, PMR only
    std::vector<double> folds;       // per-fold values when cross-fit
};

nlohmann::json to_json(const ValueEstimate& v);

// Observed-order pmf from counts over the selected rows (all rows if mask is
// empty). alpha > 0 adds alpha to every one of the 512 cells.
JointPmf empirical_pmf(const ObservedData& data, double alpha = 0.0, const std::vector<char>& mask = {});
// Full 11-variable pmf; needs the hidden block.
JointPmf empirical_full_pmf(const Dataset& data, double alpha = 0.0);

// fold id per row, deterministic in (data seed, folds)
std::vector<int> fold_assignment(const ObservedData& data, int folds);

struct FittedBridges {
    JointPmf pmf;
    BridgeSet bridges;
};

// Fits on every row whose fold differs from exclude_fold (all rows if none).
FittedBridges fit_bridges(const ObservedData& data, const FitOptions& opts,
                          std::optional<int> exclude_fold = std::nullopt);

// Per-row summands of the sample estimators.
double summand(Method m, const ObservedRow& row, const BridgeSet& b, const Regime& d);
double pmr_summand_alt(const ObservedRow& row, const BridgeSet& b, const Regime& d);

ValueEstimate v_hat(Method m, const ObservedData& data, const BridgeSet& b, const Regime& d);
ValueEstimate v_hat_pmr_alt(const ObservedData& data, const BridgeSet& b, const Regime& d);
ValueEstimate cross_fit(Method m, const ObservedData& data, const FitOptions& opts, const Regime& d);

// Empirical second moment of the PMR influence function centered at the PMR
// estimate.
double if_variance(const ObservedData& data, const BridgeSet& b, const Regime& d);
// sum over observed cells of f(cell) * IF(cell), centered at `value`
double if_population_mean(const JointPmf& pmf, const BridgeSet& b, const Regime& d, double value);

IdentifiedDensity sra_density(const JointPmf& pmf);
ValueEstimate sra_value(const ObservedData& data, const Regime& d);
ValueEstimate oracle_value(const Dataset& data, const Regime& d);
ValueEstimate oracle_value(const DgpParams& params, const Regime& d);

// Fold-wise plug-in model of an estimator, for evaluating many regimes
// against the same fitted nuisances. value(d) equals cross_fit(...).estimate.
class FittedValue {
public:
    FittedValue(Method m, const ObservedData& data, const FitOptions& opts);
    // Bridge-free baselines: SRA from observed data, Oracle from the full law.
    static FittedValue from_density(IdentifiedDensity g, JointPmf pmf);

    double value(const Regime& d) const;
    // Q tables from the fold-averaged identified density
    QTables q_tables() const;
    Method method() const { return method_; }

private:
    friend class FoldFits;
    FittedValue() = default;
    struct Fold {
        Fold(JointPmf e, IdentifiedDensity g) : eval(std::move(e)), density(std::move(g)), p_y0(y0_marginal(eval)) {}
        JointPmf eval;
        IdentifiedDensity density;
        std::array<double, 2> p_y0;
    };
    Method method_{};
    std::vector<Fold> folds_;
};

// Solved bridges for every fold of one dataset, shared across scenarios and
// methods; pseudo components are overlaid per request.
class FoldFits {
public:
    FoldFits(const ObservedData& data, int folds, double laplace_alpha = 0.0);
    FittedValue model(Method m, const std::set<Component>& pseudo, std::uint64_t pseudo_seed) const;

private:
    std::vector<JointPmf> eval_;
    std::vector<BridgeSet> solved_;
};

}  // namespace proxidtr
