#include "proxidtr/policy.hpp"

#include <cmath>
#include <stdexcept>

namespace proxidtr {

int Regime::d2_index() const {
    int t = 0;
    for (int i = 0; i < 8; ++i) t |= d2[i] << i;
    return t;
}

Regime Regime::from_indices(int d1_index, int d2_index) {
    Regime r;
    for (int i = 0; i < 2; ++i) r.d1[i] = (d1_index >> i) & 1;
    for (int i = 0; i < 8; ++i) r.d2[i] = (d2_index >> i) & 1;
    return r;
}

Regime Regime::constant(int a1, int a2) {
    Regime r;
    r.d1.fill(a1);
    r.d2.fill(a2);
    return r;
}

std::string to_string(ClassTag t) { return t == ClassTag::Linear ? "linear" : "all-boolean"; }

ClassTag class_from_string(const std::string& s) {
    if (s == "linear") return ClassTag::Linear;
    if (s == "all-boolean" || s == "boolean") return ClassTag::AllBoolean;
    throw std::invalid_argument("unknown regime class: " + s);
}

std::optional<std::array<int, 4>> separating_weights(int d2_index, int bound) {
    for (int w0 = -bound; w0 <= bound; ++w0)
        for (int w1 = -bound; w1 <= bound; ++w1)
            for (int w2 = -bound; w2 <= bound; ++w2)
                for (int w3 = -bound; w3 <= bound; ++w3) {
                    if (w0 == 0 && w1 == 0 && w2 == 0 && w3 == 0) continue;
                    bool ok = true;
                    for (int i = 0; i < 8 && ok; ++i) {
                        int y0 = (i >> 2) & 1, y1 = (i >> 1) & 1, a1 = i & 1;
                        int d = (w0 + w1 * y0 + w2 * y1 + w3 * a1) > 0;
                        ok = d == ((d2_index >> i) & 1);
                    }
                    if (ok) return std::array<int, 4>{w0, w1, w2, w3};
                }
    return std::nullopt;
}

std::optional<std::array<int, 2>> separating_weights_d1(int d1_index) {
    for (int w0 = -1; w0 <= 1; ++w0)
        for (int w1 = -2; w1 <= 2; ++w1) {
            if (w0 == 0 && w1 == 0) continue;
            if (((w0 > 0) == (d1_index & 1)) && ((w0 + w1 > 0) == ((d1_index >> 1) & 1)))
                return std::array<int, 2>{w0, w1};
        }
    return std::nullopt;
}

const std::vector<int>& linear_d2_tables() {
    static const std::vector<int> tables = [] {
        std::vector<int> out;
        for (int t = 0; t < 256; ++t)
            if (separating_weights(t)) out.push_back(t);
        return out;
    }();
    return tables;
}

namespace {

template <std::size_t N, std::size_t M>
std::array<double, N> unit(const std::array<int, M>& w) {
    static_assert(N == M);
    double norm = 0.0;
    for (int v : w) norm += double(v) * v;
    norm = std::sqrt(norm);
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = w[i] / norm;
    return out;
}

// The search certificate may sit exactly on the boundary (w.x = 0 for some
// x). Doubling and lowering the intercept by one keeps every sign but makes
// all values odd, so the unit-norm floats never land on zero.
template <std::size_t M>
std::array<int, M> off_boundary(std::array<int, M> w) {
    for (auto& v : w) v *= 2;
    w[0] -= 1;
    return w;
}

RegimeClass build(ClassTag tag) {
    RegimeClass cls{tag, {}};
    for (int i1 = 0; i1 < 4; ++i1) {
        if (tag == ClassTag::Linear) {
            auto w1 = separating_weights_d1(i1);
            for (int t : linear_d2_tables()) {
                Regime r = Regime::from_indices(i1, t);
                r.theta1 = unit<2>(off_boundary(*w1));
                r.theta2 = unit<4>(off_boundary(*separating_weights(t)));
                cls.members.push_back(r);
            }
        } else {
            for (int t = 0; t < 256; ++t) cls.members.push_back(Regime::from_indices(i1, t));
        }
    }
    return cls;
}

}  // namespace

const RegimeClass& enumerate_class(ClassTag tag) {
    static const RegimeClass linear = build(ClassTag::Linear);
    static const RegimeClass boolean = build(ClassTag::AllBoolean);
    return tag == ClassTag::Linear ? linear : boolean;
}

std::pair<Regime, double> value_maximize(const ValueFn& value_fn, const RegimeClass& cls) {
    if (cls.members.empty()) throw std::invalid_argument("value_maximize over an empty class");
    std::size_t best = 0;
    double best_v = value_fn(cls.members[0]);
    for (std::size_t i = 1; i < cls.members.size(); ++i) {
        double v = value_fn(cls.members[i]);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return {cls.members[best], best_v};
}

Regime q_learning_regime(const QTables& q) {
    Regime r;
    for (int y0 = 0; y0 < 2; ++y0) {
        r.d1[y0] = q.Q1(y0, 1) > q.Q1(y0, 0);
        for (int y1 = 0; y1 < 2; ++y1)
            for (int a1 = 0; a1 < 2; ++a1)
                r.d2[y0 * 4 + y1 * 2 + a1] = q.Q2(y0, y1, a1, 1) > q.Q2(y0, y1, a1, 0);
    }
    return r;
}

int regime_equivalence_key(const Regime& r) {
    int key = r.d1_index();
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            key |= r.act2(y0, y1, r.act1(y0)) << (2 + y0 * 2 + y1);
    return key;
}

nlohmann::json to_json(const Regime& r) {
    nlohmann::json j{{"d1", r.d1}, {"d2", r.d2}};
    if (r.theta1) j["theta1"] = *r.theta1;
    if (r.theta2) j["theta2"] = *r.theta2;
    return j;
}

Regime regime_from_json(const nlohmann::json& j) {
    Regime r;
    auto d1 = j.at("d1").get<std::vector<int>>();
    auto d2 = j.at("d2").get<std::vector<int>>();
    if (d1.size() != 2 || d2.size() != 8) throw std::invalid_argument("regime needs 2 d1 bits and 8 d2 bits");
    for (int i = 0; i < 2; ++i) r.d1[i] = d1[i] != 0;
    for (int i = 0; i < 8; ++i) r.d2[i] = d2[i] != 0;
    if (j.contains("theta1")) r.theta1 = j["theta1"].get<std::array<double, 2>>();
    if (j.contains("theta2")) r.theta2 = j["theta2"].get<std::array<double, 4>>();
    if (r.theta1) {
        for (int y0 = 0; y0 < 2; ++y0)
            if (((*r.theta1)[0] + (*r.theta1)[1] * y0 > 0) != (r.d1[y0] == 1))
                throw std::invalid_argument("theta1 does not reproduce d1");
    }
    if (r.theta2) {
        const auto& t = *r.theta2;
        for (int i = 0; i < 8; ++i) {
            int y0 = (i >> 2) & 1, y1 = (i >> 1) & 1, a1 = i & 1;
            if ((t[0] + t[1] * y0 + t[2] * y1 + t[3] * a1 > 0) != (r.d2[i] == 1))
                throw std::invalid_argument("theta2 does not reproduce d2");
        }
    }
    return r;
}

}  // namespace proxidtr
