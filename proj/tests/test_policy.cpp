#include <set>

#include "doctest.h"
#include "proxidtr/identify.hpp"
#include "proxidtr/policy.hpp"
#include "proxidtr/rng.hpp"

using namespace proxidtr;

namespace {

// A function of 3 bits is unate if it is monotone (up or down) in each input;
// for three inputs the unate and the threshold functions coincide.
bool unate(int table) {
    for (int var = 0; var < 3; ++var) {
        int bit = 1 << (2 - var);
        bool up = true, down = true;
        for (int x = 0; x < 8; ++x) {
            if (x & bit) continue;
            int lo = (table >> x) & 1, hi = (table >> (x | bit)) & 1;
            up = up && lo <= hi;
            down = down && lo >= hi;
        }
        if (!up && !down) return false;
    }
    return true;
}

// brute-force separation on a wider grid than the library's certificate search
bool separable_on_grid(int table, int bound) {
    for (int w0 = -bound; w0 <= bound; ++w0)
        for (int w1 = -bound; w1 <= bound; ++w1)
            for (int w2 = -bound; w2 <= bound; ++w2)
                for (int w3 = -bound; w3 <= bound; ++w3) {
                    bool ok = true;
                    for (int x = 0; x < 8 && ok; ++x) {
                        int s = w0 + w1 * (x >> 2) + w2 * ((x >> 1) & 1) + w3 * (x & 1);
                        ok = (s > 0) == bool((table >> x) & 1);
                    }
                    if (ok) return true;
                }
    return false;
}

const DgpParams& params() {
    static const DgpParams p = DgpParams::defaults();
    return p;
}

}  // namespace

TEST_CASE("class sizes") {
    const RegimeClass& lin = enumerate_class(ClassTag::Linear);
    const RegimeClass& all = enumerate_class(ClassTag::AllBoolean);
    CHECK(linear_d2_tables().size() == 104);
    CHECK(lin.members.size() == 4 * 104);
    CHECK(all.members.size() == 1024);
    std::set<int> d1s;
    for (const Regime& r : lin.members) d1s.insert(r.d1_index());
    CHECK(d1s.size() == 4);
    for (int i = 0; i < 4; ++i) CHECK(separating_weights_d1(i));
}

TEST_CASE("linear truth tables match independent characterizations") {
    std::set<int> lib(linear_d2_tables().begin(), linear_d2_tables().end());
    std::set<int> by_unate, by_grid;
    for (int t = 0; t < 256; ++t) {
        if (unate(t)) by_unate.insert(t);
        if (separable_on_grid(t, 8)) by_grid.insert(t);
    }
    CHECK(by_unate.size() == 104);
    CHECK(lib == by_unate);
    CHECK(lib == by_grid);
}

TEST_CASE("linear members carry unit parameters that reproduce their tables") {
    for (const Regime& r : enumerate_class(ClassTag::Linear).members) {
        REQUIRE(r.theta1);
        REQUIRE(r.theta2);
        const auto& t1 = *r.theta1;
        const auto& t2 = *r.theta2;
        CHECK(std::abs(std::hypot(t1[0], t1[1]) - 1.0) <= 1e-9);
        CHECK(std::abs(std::sqrt(t2[0] * t2[0] + t2[1] * t2[1] + t2[2] * t2[2] + t2[3] * t2[3]) - 1.0) <= 1e-9);
        for (int y0 = 0; y0 < 2; ++y0) {
            CHECK(int(t1[0] + t1[1] * y0 > 0) == r.act1(y0));
            CHECK(std::abs(t1[0] + t1[1] * y0) > 1e-6);
            for (int y1 = 0; y1 < 2; ++y1)
                for (int a1 = 0; a1 < 2; ++a1) {
                    double s = t2[0] + t2[1] * y0 + t2[2] * y1 + t2[3] * a1;
                    CHECK(int(s > 0) == r.act2(y0, y1, a1));
                    CHECK(std::abs(s) > 1e-6);
                }
        }
    }
}

TEST_CASE("enumeration order") {
    const auto& m = enumerate_class(ClassTag::AllBoolean).members;
    for (std::size_t i = 1; i < m.size(); ++i) {
        auto prev = std::make_pair(m[i - 1].d1_index(), m[i - 1].d2_index());
        auto cur = std::make_pair(m[i].d1_index(), m[i].d2_index());
        CHECK(prev < cur);
    }
    CHECK(&enumerate_class(ClassTag::Linear) == &enumerate_class(ClassTag::Linear));
    Regime r = Regime::from_indices(2, 0xA5);
    CHECK(r.d1_index() == 2);
    CHECK(r.d2_index() == 0xA5);
    CHECK(r.act2(1, 0, 1) == ((0xA5 >> 5) & 1));
}

TEST_CASE("value maximization") {
    for (ClassTag t : {ClassTag::Linear, ClassTag::AllBoolean}) {
        const RegimeClass& c = enumerate_class(t);
        auto [best, v] = value_maximize([](const Regime&) { return 0.25; }, c);
        CHECK(best.same_rules(c.members.front()));
        CHECK(v == 0.25);
    }
    auto pick = value_maximize([](const Regime& r) { return r.d2_index() == 0x17 && r.d1_index() == 1 ? 1.0 : 0.0; },
                               enumerate_class(ClassTag::AllBoolean));
    CHECK(pick.first.d2_index() == 0x17);
    CHECK(pick.first.d1_index() == 1);

    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        std::array<double, 1024> w;
        for (double& x : w) x = rng.uniform();
        ValueFn f = [&](const Regime& r) { return w[r.d1_index() * 256 + r.d2_index()]; };
        double lin = value_maximize(f, enumerate_class(ClassTag::Linear)).second;
        double all = value_maximize(f, enumerate_class(ClassTag::AllBoolean)).second;
        CHECK(lin <= all);
    }
    ValueFn truth = [](const Regime& r) { return true_value(params(), r); };
    CHECK(value_maximize(truth, enumerate_class(ClassTag::Linear)).second <=
          value_maximize(truth, enumerate_class(ClassTag::AllBoolean)).second);
}

TEST_CASE("Q-learning extraction") {
    QTables q;
    Regime zero = q_learning_regime(q);
    CHECK(zero.same_rules(Regime::constant(0, 0)));

    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        for (double& x : q.q2) x = rng.uniform();
        for (double& x : q.q1) x = rng.uniform();
        Regime r = q_learning_regime(q);
        for (int y0 = 0; y0 < 2; ++y0) {
            CHECK(r.act1(y0) == int(q.Q1(y0, 1) > q.Q1(y0, 0)));
            for (int y1 = 0; y1 < 2; ++y1)
                for (int a1 = 0; a1 < 2; ++a1) CHECK(r.act2(y0, y1, a1) == int(q.Q2(y0, y1, a1, 1) > q.Q2(y0, y1, a1, 0)));
        }
        QTables shifted = q;
        for (int cell = 0; cell < 8; ++cell) {
            double c = rng.uniform(-5.0, 5.0);
            shifted.q2[cell * 2] += c;
            shifted.q2[cell * 2 + 1] += c;
        }
        CHECK(q_learning_regime(shifted).same_rules(r));
    }
}

TEST_CASE("Q-learning on the true law reaches the unrestricted optimum") {
    IdentifiedDensity orc{Method::Oracle, oracle_potential_density(params()), {}};
    Regime r = q_learning_regime(q_functions(orc));
    double best = optimal_value(params(), ClassTag::AllBoolean).first;
    CHECK(std::abs(true_value(params(), r) - best) <= 1e-12);

    JointPmf J = true_joint(params());
    BridgeSet b = solve_bridges(J, Provenance::SolvedFromTruth);
    b.overlay(pseudo_bridges(7, {Component::H21, Component::Q22}));
    Regime m1 = q_learning_regime(q_functions(density_pmr(J, b)));
    CHECK(m1.same_rules(r));
}

TEST_CASE("equivalence keys") {
    const auto& all = enumerate_class(ClassTag::AllBoolean).members;
    std::map<int, double> value_of;
    double worst = 0.0;
    for (const Regime& r : all) {
        CHECK(regime_equivalence_key(r) == regime_equivalence_key(r));
        int k = regime_equivalence_key(r);
        double v = true_value(params(), r);
        auto [it, fresh] = value_of.emplace(k, v);
        if (!fresh) worst = std::max(worst, std::abs(it->second - v));
    }
    CHECK(value_of.size() == 64);
    CHECK(worst <= 1e-12);

    Regime r = Regime::from_indices(1, 0x3C);  // d1(0) = 1, d1(1) = 0
    Regime s = r;
    s.d2[0 * 4 + 1 * 2 + 0] ^= 1;  // y0 = 0, a1 = 0 is off path
    CHECK(regime_equivalence_key(s) == regime_equivalence_key(r));
    CHECK(true_value(params(), s) == doctest::Approx(true_value(params(), r)).epsilon(1e-12));
    Regime t = r;
    t.d2[0 * 4 + 1 * 2 + 1] ^= 1;  // on path
    CHECK(regime_equivalence_key(t) != regime_equivalence_key(r));
}

TEST_CASE("regime json") {
    for (const Regime& r : enumerate_class(ClassTag::Linear).members) {
        Regime back = regime_from_json(nlohmann::json::parse(to_json(r).dump()));
        CHECK(back.same_rules(r));
        CHECK(back.theta2 == r.theta2);
    }
    auto j = to_json(Regime::from_indices(3, 0x80));
    CHECK(j.at("d2") == nlohmann::json({0, 0, 0, 0, 0, 0, 0, 1}));
    CHECK(!j.contains("theta1"));

    auto bad = to_json(enumerate_class(ClassTag::Linear).members[5]);
    bad["d1"] = {1 - bad["d1"][0].get<int>(), bad["d1"][1]};
    CHECK_THROWS_AS(regime_from_json(bad), std::invalid_argument);
    CHECK_THROWS(regime_from_json(nlohmann::json{{"d1", {0}}, {"d2", {0, 0, 0, 0, 0, 0, 0, 0}}}));

    CHECK(class_from_string(to_string(ClassTag::Linear)) == ClassTag::Linear);
    CHECK(class_from_string("all-boolean") == ClassTag::AllBoolean);
    CHECK_THROWS(class_from_string("quadratic"));
}
