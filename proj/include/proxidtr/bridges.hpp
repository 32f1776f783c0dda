#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "json.hpp"
#include "proxidtr/tables.hpp"

namespace proxidtr {

struct TreatmentBridge {
    std::array<double, 8> q11_{};   // [y0][a1][z1]
    std::array<double, 64> q22_{};  // [y0][y1][a1][a2][z1][z2]

    static constexpr int i11(int y0, int a1, int z1) { return y0 * 4 + a1 * 2 + z1; }
    static constexpr int i22(int y0, int y1, int a1, int a2, int z1, int z2) {
        return y0 * 32 + y1 * 16 + a1 * 8 + a2 * 4 + z1 * 2 + z2;
    }
    double q11(int y0, int a1, int z1) const { return q11_[i11(y0, a1, z1)]; }
    double q22(int y0, int y1, int a1, int a2, int z1, int z2) const {
        return q22_[i22(y0, y1, a1, a2, z1, z2)];
    }
};

struct OutcomeBridge {
    std::array<double, 128> h22_{};  // [y0][y1][y2][w1][w2][a1][a2]
    std::array<double, 64> h21_{};   // [y0][y1][y2][w1][a1][a2]
    std::array<double, 16> h11_{};   // [y0][y1][w1][a1]

    static constexpr int i22(int y0, int y1, int y2, int w1, int w2, int a1, int a2) {
        return y0 * 64 + y1 * 32 + y2 * 16 + w1 * 8 + w2 * 4 + a1 * 2 + a2;
    }
    static constexpr int i21(int y0, int y1, int y2, int w1, int a1, int a2) {
        return y0 * 32 + y1 * 16 + y2 * 8 + w1 * 4 + a1 * 2 + a2;
    }
    static constexpr int i11(int y0, int y1, int w1, int a1) { return y0 * 8 + y1 * 4 + w1 * 2 + a1; }
    double h22(int y0, int y1, int y2, int w1, int w2, int a1, int a2) const {
        return h22_[i22(y0, y1, y2, w1, w2, a1, a2)];
    }
    double h21(int y0, int y1, int y2, int w1, int a1, int a2) const {
        return h21_[i21(y0, y1, y2, w1, a1, a2)];
    }
    double h11(int y0, int y1, int w1, int a1) const { return h11_[i11(y0, y1, w1, a1)]; }
};

enum class Component { H22, H21, H11, Q11, Q22 };
std::string to_string(Component c);
Component component_from_string(const std::string& s);

struct Provenance {
    enum Kind { SolvedFromTruth, SolvedFromSample, Pseudo } kind;
    std::uint64_t seed = 0;  // pseudo only
    bool operator==(const Provenance&) const = default;
};
std::string to_string(const Provenance& p);

// A component is present iff it has a provenance entry.
struct BridgeSet {
    OutcomeBridge outcome;
    TreatmentBridge treatment;
    std::map<Component, Provenance> provenance;

    bool has(Component c) const { return provenance.count(c) > 0; }
    void require(Component c) const;
    // Copy the components present in `other` over this set's.
    void overlay(const BridgeSet& other);
};

TreatmentBridge solve_q(const JointPmf& pmf);
OutcomeBridge solve_h(const JointPmf& pmf);
BridgeSet solve_bridges(const JointPmf& pmf, Provenance::Kind kind);

// Max absolute residuals of the defining equations. Families whose
// components are absent stay empty.
struct BridgeResiduals {
    std::optional<double> h22;  // outcome, second stage
    std::optional<double> h21;  // outcome, first stage
    std::optional<double> q11;
    std::optional<double> q22;
    std::optional<double> h11;
    double max() const;
    bool pass(double tol = 1e-8) const { return max() <= tol; }
};

BridgeResiduals verify_bridges(const BridgeSet& b, const JointPmf& pmf);

BridgeSet pseudo_bridges(std::uint64_t seed, const std::set<Component>& which);

struct CollapseResidual {
    double equation = 0.0;  // sum_y2 h21 plugged into h11's equation
    double vs_h11 = 0.0;    // |sum_y2 h21 - h11|
};
CollapseResidual bridge_collapse_check(const OutcomeBridge& b, const JointPmf& pmf);

// max |sum_y2 h22 - 1| over slices; reported, never enforced
double h22_normalization_gap(const OutcomeBridge& b);

// Scalar bridge of the marginal-mean formulation: sum_y2 y2 * h22, indexed
// like h22 with y2 dropped: [y0][y1][w1][w2][a1][a2].
std::array<double, 64> marginal_outcome_bridge(const OutcomeBridge& b);
// Residual of E[Y2 | ybar1, zbar2, abar2] = sum_wbar2 h * f(wbar2 | ...).
double marginal_bridge_residual(const std::array<double, 64>& h, const JointPmf& pmf);

nlohmann::json to_json(const BridgeSet& b);
BridgeSet bridges_from_json(const nlohmann::json& j);

}  // namespace proxidtr
