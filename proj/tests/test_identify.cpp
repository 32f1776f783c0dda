#include "doctest.h"
#include "oracles.hpp"
#include "proxidtr/estimators.hpp"
#include "proxidtr/identify.hpp"

using namespace proxidtr;

namespace {

const JointPmf& truth() {
    static const JointPmf J = true_joint(DgpParams::defaults());
    return J;
}
const BridgeSet& solved() {
    static const BridgeSet b = solve_bridges(truth(), Provenance::SolvedFromTruth);
    return b;
}
const PotentialDensity& reference() {
    static const PotentialDensity g = oracle::forced_intervention(DgpParams::defaults());
    return g;
}

BridgeSet corrupted(const std::set<Component>& which, std::uint64_t seed) {
    BridgeSet b = solved();
    b.overlay(pseudo_bridges(seed, which));
    return b;
}

}  // namespace

TEST_CASE("every method recovers the intervention density at the true law") {
    for (Method m : {Method::POR, Method::PHA, Method::PIPW, Method::PMR}) {
        CAPTURE(to_string(m));
        IdentifiedDensity g = identified_density(m, truth(), solved());
        CHECK(g.method == m);
        CHECK(max_deviation(g.density, reference()) <= 1e-10);
        for (int a = 0; a < 4; ++a)
            for (int y0 = 0; y0 < 2; ++y0) {
                double s = 0.0;
                for (int y = 0; y < 4; ++y) s += g.at(a >> 1, a & 1, y >> 1, y & 1, y0);
                CHECK(std::abs(s - 1.0) <= 1e-9);
            }
        for (int i = 0; i < 8; ++i) CHECK(std::abs(g.density.g1[i] - reference().g1[i]) <= 1e-10);
    }
}

TEST_CASE("first-stage weighting form of the marginal density") {
    const JointPmf& J = truth();
    const TreatmentBridge& q = solved().treatment;
    for (int a1 = 0; a1 < 2; ++a1)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int y0 = 0; y0 < 2; ++y0) {
                double s = 0.0;
                for (int z1 = 0; z1 < 2; ++z1)
                    s += q.q11(y0, a1, z1) * oracle::cond(J, {{"Y1", y1}, {"A1", a1}, {"Z1", z1}}, {{"Y0", y0}});
                CHECK(std::abs(s - reference().g1[PotentialDensity::idx1(a1, y1, y0)]) <= 1e-10);
            }
}

TEST_CASE("hybrid split degenerates at its endpoints") {
    BridgeSet b = corrupted({Component::H21, Component::Q22}, 11);
    IdentifiedDensity k0 = density_pha(truth(), b, 0), k2 = density_pha(truth(), b, 2);
    CHECK(k0.density.g == density_por(truth(), b).density.g);
    CHECK(k2.density.g == density_pipw(truth(), b).density.g);
    CHECK(k0.method == Method::PHA);
    CHECK(k0.density.g != density_pha(truth(), b, 1).density.g);
}

TEST_CASE("misspecified bridges move the single-method densities") {
    std::uint64_t seed = 7;
    CHECK(max_deviation(density_por(truth(), corrupted({Component::H21}, seed)).density, reference()) > 1e-3);
    CHECK(max_deviation(density_pipw(truth(), corrupted({Component::Q22}, seed)).density, reference()) > 1e-3);
    CHECK(max_deviation(density_pha(truth(), corrupted({Component::Q11}, seed)).density, reference()) > 1e-3);
}

TEST_CASE("multiple robustness of the combined density") {
    struct Case {
        Scenario s;
        std::vector<Method> broken;
    };
    std::vector<Case> cases{{Scenario::M0Correct, {Method::POR, Method::PHA}},
                            {Scenario::M1Correct, {Method::POR, Method::PIPW}},
                            {Scenario::M2Correct, {Method::PHA, Method::PIPW}}};
    for (const auto& c : cases) {
        CAPTURE(to_string(c.s));
        std::map<Method, int> moved;
        const int seeds = 25;
        for (std::uint64_t s = 1; s <= seeds; ++s) {
            BridgeSet b = corrupted(pseudo_components(c.s), s);
            CHECK(max_deviation(density_pmr(truth(), b).density, reference()) <= 1e-9);
            for (Method m : c.broken) moved[m] += max_deviation(identified_density(m, truth(), b).density, reference()) > 1e-4;
        }
        for (Method m : c.broken) CHECK(moved[m] * 100 >= 95 * seeds);
    }
    BridgeSet all = corrupted(pseudo_components(Scenario::AllWrong), 3);
    CHECK(max_deviation(density_pmr(truth(), all).density, reference()) > 1e-3);
}

TEST_CASE("missing components are named") {
    BridgeSet b;
    b.outcome = solved().outcome;
    b.provenance[Component::H22] = b.provenance[Component::H21] = b.provenance[Component::H11] =
        Provenance{Provenance::SolvedFromTruth, 0};
    CHECK_NOTHROW(density_por(truth(), b));
    try {
        density_pmr(truth(), b);
        FAIL("expected MissingBridge");
    } catch (const MissingBridge& e) {
        CHECK((e.name == "q11" || e.name == "q22"));
    }
    CHECK_THROWS_AS(density_pipw(truth(), b), MissingBridge);
}

TEST_CASE("value from density") {
    IdentifiedDensity orc{Method::Oracle, reference(), {}};
    const auto& members = enumerate_class(ClassTag::AllBoolean).members;
    DgpParams p = DgpParams::defaults();
    double worst = 0.0;
    for (const Regime& r : members) worst = std::max(worst, std::abs(value_from_density(orc, truth(), r) - true_value(p, r)));
    CHECK(worst <= 1e-12);

    std::vector<IdentifiedDensity> gs;
    for (Method m : {Method::POR, Method::PHA, Method::PIPW, Method::PMR}) gs.push_back(identified_density(m, truth(), solved()));
    for (int i = 0; i < 1024; i += 7)
        for (std::size_t a = 0; a < gs.size(); ++a)
            for (std::size_t b = a + 1; b < gs.size(); ++b)
                CHECK(std::abs(value_from_density(gs[a], truth(), members[i]) -
                               value_from_density(gs[b], truth(), members[i])) <= 1e-10);

    // affine in the density
    IdentifiedDensity other = density_por(truth(), corrupted({Component::H21}, 2));
    IdentifiedDensity mix = orc;
    for (int i = 0; i < 32; ++i) mix.density.g[i] = 0.3 * orc.density.g[i] + 0.7 * other.density.g[i];
    for (int i = 0; i < 1024; i += 31) {
        double lhs = value_from_density(mix, truth(), members[i]);
        double rhs = 0.3 * value_from_density(orc, truth(), members[i]) + 0.7 * value_from_density(other, truth(), members[i]);
        CHECK(std::abs(lhs - rhs) <= 1e-14);
    }
}

TEST_CASE("identified Q functions") {
    const PotentialDensity& g = reference();
    QTables q = q_functions(IdentifiedDensity{Method::Oracle, g, {}});
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1) {
            double q1 = 0.0;
            for (int y1 = 0; y1 < 2; ++y1) {
                double best = -1.0;
                for (int a2 = 0; a2 < 2; ++a2) {
                    double mean = g.at(a1, a2, 1, y1, y0) / (g.at(a1, a2, 0, y1, y0) + g.at(a1, a2, 1, y1, y0));
                    CHECK(std::abs(q.Q2(y0, y1, a1, a2) - mean) <= 1e-12);
                    best = std::max(best, mean);
                }
                q1 += best * g.g1[PotentialDensity::idx1(a1, y1, y0)];
            }
            CHECK(std::abs(q.Q1(y0, a1) - q1) <= 1e-10);
        }

    for (Scenario s : {Scenario::M0Correct, Scenario::M1Correct, Scenario::M2Correct}) {
        QTables r = q_functions(density_pmr(truth(), corrupted(pseudo_components(s), 7)));
        for (int i = 0; i < 16; ++i) CHECK(std::abs(r.q2[i] - q.q2[i]) <= 1e-9);
        for (int i = 0; i < 4; ++i) CHECK(std::abs(r.q1[i] - q.q1[i]) <= 1e-9);
    }

    PotentialDensity empty = g;
    for (int y2 = 0; y2 < 2; ++y2) empty.at(1, 0, y2, 1, 0) = 0.0;
    CHECK_THROWS_AS(q_functions(IdentifiedDensity{Method::Oracle, empty, {}}), PositivityError);
}

TEST_CASE("method names and json export") {
    for (Method m : {Method::POR, Method::PHA, Method::PIPW, Method::PMR, Method::SRA, Method::Oracle})
        CHECK(method_from_string(to_string(m)) == m);
    CHECK(method_from_string("pmr") == Method::PMR);
    CHECK_THROWS(method_from_string("dr"));
    auto j = to_json(density_pmr(truth(), solved()));
    CHECK(j.at("method") == "PMR");
    CHECK(j.dump().find("q22") != std::string::npos);
}
