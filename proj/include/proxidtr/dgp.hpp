#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "proxidtr/policy.hpp"
#include "proxidtr/tables.hpp"

namespace proxidtr {

double expit(double x);

// coef * product of the named variables
struct Term {
    double coef;
    std::vector<std::string> vars;
};

struct LogisticModel {
    std::string target;
    double intercept = 0.0;
    std::vector<Term> terms;
};

// Sequential logistic models in ancestral order. Each model may only refer to
// variables generated before its target.
struct DgpParams {
    std::vector<LogisticModel> models;

    static DgpParams defaults();
    LogisticModel& model(const std::string& target);
};

// Precomputed form of DgpParams over full_order() positions.
class CompiledDgp {
public:
    explicit CompiledDgp(const DgpParams& p);
    // P(target = 1 | parents) for model k, given values at full_order positions.
    double p1(std::size_t k, const std::array<int, 11>& v) const;
    std::size_t size() const { return models_.size(); }
    std::size_t target(std::size_t k) const { return models_[k].target; }

private:
    struct CTerm {
        double coef;
        std::vector<std::size_t> vars;
    };
    struct CModel {
        std::size_t target;
        double intercept;
        std::vector<CTerm> terms;
    };
    std::vector<CModel> models_;
};

JointPmf true_joint(const DgpParams& params);

// Observed columns in the order y0,z1,w1,a1,y1,z2,w2,a2,y2.
enum Obs : int { oY0, oZ1, oW1, oA1, oY1, oZ2, oW2, oA2, oY2 };
using ObservedRow = std::array<std::uint8_t, 9>;
using HiddenRow = std::array<std::uint8_t, 2>;  // u0, u1

struct ObservedData {
    std::vector<ObservedRow> rows;
    std::uint64_t seed = 0;  // generator seed, also drives fold assignment
    std::size_t size() const { return rows.size(); }
};

// Only the Oracle may read this block.
struct HiddenData {
    std::vector<HiddenRow> rows;
};

struct Dataset {
    ObservedData observed;
    std::optional<HiddenData> hidden;
    std::size_t size() const { return observed.size(); }
    std::uint64_t seed() const { return observed.seed; }
};

Dataset sample(const DgpParams& params, std::size_t n, std::uint64_t seed);

void write_csv(std::ostream& os, const Dataset& data, bool include_hidden);
Dataset read_csv(std::istream& is);

// g index: a1*16 + a2*8 + y2*4 + y1*2 + y0, i.e. g[a1 a2][y2][y1][y0].
// g1 index: a1*4 + y1*2 + y0.
struct PotentialDensity {
    std::array<double, 32> g{};
    std::array<double, 8> g1{};

    static constexpr int idx(int a1, int a2, int y2, int y1, int y0) {
        return a1 * 16 + a2 * 8 + y2 * 4 + y1 * 2 + y0;
    }
    static constexpr int idx1(int a1, int y1, int y0) { return a1 * 4 + y1 * 2 + y0; }
    double at(int a1, int a2, int y2, int y1, int y0) const { return g[idx(a1, a2, y2, y1, y0)]; }
    double& at(int a1, int a2, int y2, int y1, int y0) { return g[idx(a1, a2, y2, y1, y0)]; }
};

// g-formula over the hidden confounders of a law that contains U0 and U1.
PotentialDensity oracle_density(const JointPmf& full);
PotentialDensity oracle_potential_density(const DgpParams& params);

// Sum over y0 of P(y0) times the regime-indicator weighted mass of y2 = 1.
double regime_value(const PotentialDensity& g, const std::array<double, 2>& p_y0, const Regime& r);
std::array<double, 2> y0_marginal(const JointPmf& pmf);

double true_value(const DgpParams& params, const Regime& regime);
std::pair<double, Regime> optimal_value(const DgpParams& params, ClassTag cls);

}  // namespace proxidtr
