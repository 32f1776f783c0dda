#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace proxidtr {

// Two-stage binary regime. d2 is stored in (y0, y1, a1) lexicographic order,
// cell index y0*4 + y1*2 + a1.
struct Regime {
    std::array<int, 2> d1{};
    std::array<int, 8> d2{};
    std::optional<std::array<double, 2>> theta1;
    std::optional<std::array<double, 4>> theta2;

    int act1(int y0) const { return d1[y0]; }
    int act2(int y0, int y1, int a1) const { return d2[y0 * 4 + y1 * 2 + a1]; }

    // Canonical integers: bit i holds table entry i.
    int d1_index() const { return d1[0] | (d1[1] << 1); }
    int d2_index() const;

    static Regime from_indices(int d1_index, int d2_index);
    // Constant regime treating with (a1, a2) regardless of history.
    static Regime constant(int a1, int a2);

    bool same_rules(const Regime& o) const { return d1 == o.d1 && d2 == o.d2; }
};

enum class ClassTag { Linear, AllBoolean };

std::string to_string(ClassTag t);
ClassTag class_from_string(const std::string& s);

struct RegimeClass {
    ClassTag tag;
    std::vector<Regime> members;  // canonical order
};

// Integer weight certificate for a strict threshold representation of a d2
// truth table over (1, y0, y1, a1), searched in {-bound..bound}^4.
std::optional<std::array<int, 4>> separating_weights(int d2_index, int bound = 4);
std::optional<std::array<int, 2>> separating_weights_d1(int d1_index);

// Truth tables (ascending) of the linearly separable functions of 3 bits.
const std::vector<int>& linear_d2_tables();

const RegimeClass& enumerate_class(ClassTag tag);

using ValueFn = std::function<double(const Regime&)>;
std::pair<Regime, double> value_maximize(const ValueFn& value_fn, const RegimeClass& cls);

// Q2 indexed y0*8 + y1*4 + a1*2 + a2, Q1 indexed y0*2 + a1.
struct QTables {
    std::array<double, 16> q2{};
    std::array<double, 4> q1{};
    double Q2(int y0, int y1, int a1, int a2) const { return q2[y0 * 8 + y1 * 4 + a1 * 2 + a2]; }
    double Q1(int y0, int a1) const { return q1[y0 * 2 + a1]; }
};

// d = I(Q(.;1) > Q(.;0)); ties go to action 0.
Regime q_learning_regime(const QTables& q);

// d1 table plus d2 on the reachable cells (y0, y1, d1(y0)).
int regime_equivalence_key(const Regime& r);

nlohmann::json to_json(const Regime& r);
Regime regime_from_json(const nlohmann::json& j);

}  // namespace proxidtr
