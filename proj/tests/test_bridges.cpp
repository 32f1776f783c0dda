#include "doctest.h"
#include "oracles.hpp"
#include "proxidtr/bridges.hpp"

using namespace proxidtr;

namespace {

const JointPmf& truth() {
    static const JointPmf J = true_joint(DgpParams::defaults());
    return J;
}

// Z and W are exact copies of the hidden U at each stage.
JointPmf perfect_proxy_law() {
    return oracle::chain_pmf(full_order().names(), [](const std::string& n, const Assignment& v) {
        if (n == "U0") return 0.6;
        if (n == "Y0") return oracle::expit(-0.5 + 0.8 * v.at("U0"));
        if (n == "Z1" || n == "W1") return double(v.at("U0"));
        if (n == "A1") return oracle::expit(-0.3 + 1.1 * v.at("U0") - 0.4 * v.at("Y0"));
        if (n == "Y1") return oracle::expit(0.2 - 0.7 * v.at("A1") + 0.9 * v.at("U0") + 0.5 * v.at("Y0"));
        if (n == "U1") return oracle::expit(-0.2 + 1.3 * v.at("U0") + 0.3 * v.at("A1"));
        if (n == "Z2" || n == "W2") return double(v.at("U1"));
        if (n == "A2") return oracle::expit(0.1 + 0.6 * v.at("U1") - 0.8 * v.at("Y1") + 0.4 * v.at("A1"));
        return oracle::expit(-0.4 + 1.2 * v.at("U1") - 0.6 * v.at("U0") + 0.7 * v.at("A2") * v.at("Y1") +
                             0.3 * v.at("A1") - 0.2 * v.at("Y0"));
    });
}

}  // namespace

TEST_CASE("solved bridges satisfy their equations on the true law") {
    BridgeSet b = solve_bridges(truth(), Provenance::SolvedFromTruth);
    BridgeResiduals r = verify_bridges(b, truth());
    CHECK(*r.h22 <= 1e-10);
    CHECK(*r.h21 <= 1e-10);
    CHECK(*r.h11 <= 1e-10);
    CHECK(*r.q11 <= 1e-10);
    CHECK(*r.q22 <= 1e-10);
    CHECK(r.pass());
    for (double q : b.treatment.q11_) CHECK(q > 0.0);
    CHECK(h22_normalization_gap(b.outcome) <= 1e-8);
}

TEST_CASE("treatment bridges reproduce the latent reciprocal propensities") {
    const JointPmf& J = truth();
    TreatmentBridge q = solve_q(J);
    for (int y0 = 0; y0 < 2; ++y0)
        for (int u0 = 0; u0 < 2; ++u0)
            for (int a1 = 0; a1 < 2; ++a1) {
                double lhs = 0.0;
                for (int z1 = 0; z1 < 2; ++z1)
                    lhs += q.q11(y0, a1, z1) * oracle::cond(J, {{"Z1", z1}}, {{"U0", u0}, {"A1", a1}, {"Y0", y0}});
                double pa1 = oracle::cond(J, {{"A1", a1}}, {{"U0", u0}, {"Y0", y0}});
                CHECK(std::abs(lhs - 1.0 / pa1) < 1e-10);
                for (int y1 = 0; y1 < 2; ++y1)
                    for (int u1 = 0; u1 < 2; ++u1)
                        for (int a2 = 0; a2 < 2; ++a2) {
                            Assignment g{{"U0", u0}, {"U1", u1}, {"A1", a1}, {"A2", a2}, {"Y0", y0}, {"Y1", y1}};
                            double l2 = 0.0;
                            for (int z = 0; z < 4; ++z)
                                l2 += q.q22(y0, y1, a1, a2, z >> 1, z & 1) *
                                      oracle::cond(J, {{"Z1", z >> 1}, {"Z2", z & 1}}, g);
                            double pa2 = oracle::cond(J, {{"A2", a2}},
                                                      {{"U0", u0}, {"U1", u1}, {"A1", a1}, {"Y0", y0}, {"Y1", y1}});
                            CHECK(std::abs(l2 - 1.0 / (pa1 * pa2)) < 1e-9);
                        }
            }
}

TEST_CASE("perfect proxies collapse the bridges to latent quantities") {
    JointPmf L = perfect_proxy_law();
    TreatmentBridge q = solve_q(L);
    OutcomeBridge h = solve_h(L);
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1)
            for (int z1 = 0; z1 < 2; ++z1) {
                double pa = oracle::cond(L, {{"A1", a1}}, {{"U0", z1}, {"Y0", y0}});
                CHECK(std::abs(q.q11(y0, a1, z1) - 1.0 / pa) < 1e-10);
            }
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int y2 = 0; y2 < 2; ++y2)
                for (int w = 0; w < 4; ++w)
                    for (int a1 = 0; a1 < 2; ++a1)
                        for (int a2 = 0; a2 < 2; ++a2) {
                            double ref = oracle::cond(L, {{"Y2", y2}},
                                                      {{"Y0", y0}, {"Y1", y1}, {"U0", w >> 1}, {"U1", w & 1},
                                                       {"A1", a1}, {"A2", a2}});
                            CHECK(std::abs(h.h22(y0, y1, y2, w >> 1, w & 1, a1, a2) - ref) < 1e-10);
                        }
}

TEST_CASE("solving is deterministic and storage-order invariant") {
    BridgeSet a = solve_bridges(truth(), Provenance::SolvedFromTruth);
    BridgeSet b = solve_bridges(truth(), Provenance::SolvedFromTruth);
    CHECK(a.outcome.h22_ == b.outcome.h22_);
    CHECK(a.treatment.q22_ == b.treatment.q22_);

    // the same law stored in reversed variable order
    std::vector<std::string> rev(full_order().names().rbegin(), full_order().names().rend());
    std::vector<double> mass(2048);
    for (std::size_t c = 0; c < 2048; ++c) {
        std::size_t r = 0;
        for (int k = 0; k < 11; ++k) r |= ((c >> k) & 1u) << (10 - k);
        mass[r] = truth()[c];
    }
    JointPmf P(VarOrder(rev), mass);
    OutcomeBridge h = solve_h(P);
    TreatmentBridge q = solve_q(P);
    for (std::size_t i = 0; i < 128; ++i) CHECK(std::abs(h.h22_[i] - a.outcome.h22_[i]) <= 1e-12);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(h.h21_[i] - a.outcome.h21_[i]) <= 1e-12);
    for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(q.q22_[i] - a.treatment.q22_[i]) <= 1e-12);
}

TEST_CASE("bridges solved on one law fail on another") {
    DgpParams other = DgpParams::defaults();
    other.model("Z1").intercept = -1.0;
    other.model("Y2").terms[0].coef = 0.5;
    JointPmf J2 = true_joint(other);
    BridgeSet b = solve_bridges(J2, Provenance::SolvedFromTruth);
    CHECK(verify_bridges(b, J2).pass());
    CHECK(!verify_bridges(b, truth()).pass());
}

TEST_CASE("pseudo bridges") {
    std::set<Component> all{Component::H22, Component::H21, Component::Q11, Component::Q22};
    BridgeSet a = pseudo_bridges(5, all), b = pseudo_bridges(5, all), c = pseudo_bridges(6, all);
    CHECK(a.outcome.h22_ == b.outcome.h22_);
    CHECK(a.treatment.q22_ == b.treatment.q22_);
    CHECK(a.outcome.h22_ != c.outcome.h22_);
    CHECK(a.provenance.at(Component::Q11) == Provenance{Provenance::Pseudo, 5});
    CHECK(!a.has(Component::H11));
    CHECK(h22_normalization_gap(a.outcome) < 1e-15);
    for (double q : a.treatment.q22_) CHECK((q >= 0.5 && q < 4.0));
    // a component's draws do not depend on which others were requested
    CHECK(pseudo_bridges(5, {Component::Q22}).treatment.q22_ == a.treatment.q22_);

    int detected = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        BridgeSet fake = pseudo_bridges(s, {Component::Q11});
        detected += *verify_bridges(fake, truth()).q11 > 1e-3;
    }
    CHECK(detected == 100);

    BridgeSet solved = solve_bridges(truth(), Provenance::SolvedFromTruth);
    solved.overlay(pseudo_bridges(3, all));
    CHECK(verify_bridges(solved, truth()).max() > 1e-3);
}

TEST_CASE("collapse of the first-stage outcome bridge") {
    OutcomeBridge h = solve_h(truth());
    CollapseResidual r = bridge_collapse_check(h, truth());
    CHECK(r.equation <= 1e-8);
    CHECK(r.vs_h11 <= 1e-8);

    int large = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        OutcomeBridge fake = h;
        fake.h21_ = pseudo_bridges(s, {Component::H21}).outcome.h21_;
        large += bridge_collapse_check(fake, truth()).equation > 1e-3;
    }
    CHECK(large >= 95);

    auto m = marginal_outcome_bridge(h);
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int w = 0; w < 4; ++w)
                for (int a = 0; a < 4; ++a)
                    CHECK(m[y0 * 32 + y1 * 16 + w * 4 + a] == h.h22(y0, y1, 1, w >> 1, w & 1, a >> 1, a & 1));
    CHECK(marginal_bridge_residual(m, truth()) <= 1e-10);
}

TEST_CASE("rank and positivity failures surface") {
    // Z1 carries no information about U0: P(Z1 | W1, ...) has identical columns
    JointPmf L = oracle::chain_pmf(full_order().names(), [](const std::string& n, const Assignment& v) {
        if (n == "Z1") return 0.3;
        if (n == "U0") return 0.5;
        if (n == "W1" || n == "W2" || n == "Z2") return 0.2 + 0.6 * v.at(n == "W2" || n == "Z2" ? "U1" : "U0");
        if (n == "U1") return 0.3 + 0.4 * v.at("U0");
        return 0.5;
    });
    try {
        solve_q(L);
        FAIL("expected RankError");
    } catch (const RankError& e) {
        CHECK(e.role.find("P(Z1|W1,a1,y0)") != std::string::npos);
    }
    JointPmf z(observed_order(), [] {
        std::vector<double> m(512, 0.0);
        m[0] = 1.0;
        return m;
    }());
    CHECK_THROWS_AS(solve_h(z), PositivityError);
}

TEST_CASE("bridge set json round trip") {
    BridgeSet b = solve_bridges(truth(), Provenance::SolvedFromTruth);
    b.overlay(pseudo_bridges(4, {Component::Q22}));
    BridgeSet c = bridges_from_json(nlohmann::json::parse(to_json(b).dump()));
    CHECK(c.provenance == b.provenance);
    CHECK(c.outcome.h22_ == b.outcome.h22_);
    CHECK(c.treatment.q22_ == b.treatment.q22_);
    CHECK(c.outcome.h11_ == b.outcome.h11_);
}
