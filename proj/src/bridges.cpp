#include "proxidtr/bridges.hpp"

#include <algorithm>
#include <cmath>

#include "proxidtr/rng.hpp"

namespace proxidtr {

std::string to_string(Component c) {
    switch (c) {
        case Component::H22: return "h22";
        case Component::H21: return "h21";
        case Component::H11: return "h11";
        case Component::Q11: return "q11";
        case Component::Q22: return "q22";
    }
    return "?";
}

Component component_from_string(const std::string& s) {
    for (Component c : {Component::H22, Component::H21, Component::H11, Component::Q11, Component::Q22})
        if (to_string(c) == s) return c;
    throw std::invalid_argument("unknown bridge component: " + s);
}

std::string to_string(const Provenance& p) {
    switch (p.kind) {
        case Provenance::SolvedFromTruth: return "solved-from-truth";
        case Provenance::SolvedFromSample: return "solved-from-sample";
        case Provenance::Pseudo: return "pseudo(" + std::to_string(p.seed) + ")";
    }
    return "?";
}

void BridgeSet::require(Component c) const {
    if (!has(c)) throw MissingBridge(to_string(c));
}

void BridgeSet::overlay(const BridgeSet& o) {
    if (o.has(Component::H22)) outcome.h22_ = o.outcome.h22_;
    if (o.has(Component::H21)) outcome.h21_ = o.outcome.h21_;
    if (o.has(Component::H11)) outcome.h11_ = o.outcome.h11_;
    if (o.has(Component::Q11)) treatment.q11_ = o.treatment.q11_;
    if (o.has(Component::Q22)) treatment.q22_ = o.treatment.q22_;
    for (const auto& [c, p] : o.provenance) provenance[c] = p;
}

namespace {

std::string s(int v) { return std::to_string(v); }

JointPmf observed_part(const JointPmf& pmf) {
    if (pmf.order() == observed_order()) return pmf;
    return marginalize(pmf, observed_order().names());
}

Eigen::MatrixXd P(const JointPmf& pmf, std::vector<std::string> target, std::vector<std::string> given,
                  const Assignment& fixed) {
    return cond_matrix(pmf, target, given, fixed).entries;
}

}  // namespace

TreatmentBridge solve_q(const JointPmf& pmf_in) {
    const JointPmf pmf = observed_part(pmf_in);
    TreatmentBridge q;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1) {
            std::string slice = "y0=" + s(y0) + ",a1=" + s(a1);
            Eigen::RowVectorXd pa = P(pmf, {"A1"}, {"W1"}, {{"Y0", y0}}).row(a1);
            Eigen::MatrixXd Mz = P(pmf, {"Z1"}, {"W1"}, {{"A1", a1}, {"Y0", y0}});
            Eigen::RowVectorXd row = reciprocal(pa, "P(a1|W1,y0) " + slice) *
                                     invert2or4(Mz, "P(Z1|W1,a1,y0) " + slice);
            for (int z1 = 0; z1 < 2; ++z1) q.q11_[TreatmentBridge::i11(y0, a1, z1)] = row(z1);
        }
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int a1 = 0; a1 < 2; ++a1) {
                Assignment f1{{"A1", a1}, {"Y0", y0}, {"Y1", y1}};
                Eigen::RowVectorXd q11(2);
                q11 << q.q11(y0, a1, 0), q.q11(y0, a1, 1);
                Eigen::RowVectorXd chain = q11 * P(pmf, {"Z1"}, {"W1", "W2"}, f1);
                Eigen::MatrixXd pa2 = P(pmf, {"A2"}, {"W1", "W2"}, f1);
                for (int a2 = 0; a2 < 2; ++a2) {
                    std::string slice = "y0=" + s(y0) + ",y1=" + s(y1) + ",a1=" + s(a1) + ",a2=" + s(a2);
                    Eigen::MatrixXd rhs = broadcast_product(
                        Eigen::MatrixXd(reciprocal(pa2.row(a2), "P(a2|W2bar,a1,y1bar) " + slice)),
                        Eigen::MatrixXd(chain));
                    Assignment f2 = f1;
                    f2["A2"] = a2;
                    Eigen::MatrixXd Mz = P(pmf, {"Z1", "Z2"}, {"W1", "W2"}, f2);
                    Eigen::RowVectorXd row = rhs * invert2or4(Mz, "P(Z2bar|a2bar,W2bar,y1bar) " + slice);
                    for (int z = 0; z < 4; ++z)
                        q.q22_[TreatmentBridge::i22(y0, y1, a1, a2, z >> 1, z & 1)] = row(z);
                }
            }
    return q;
}

OutcomeBridge solve_h(const JointPmf& pmf_in) {
    const JointPmf pmf = observed_part(pmf_in);
    OutcomeBridge h;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2) {
                    std::string slice = "y0=" + s(y0) + ",y1=" + s(y1) + ",a1=" + s(a1) + ",a2=" + s(a2);
                    Assignment f{{"Y0", y0}, {"Y1", y1}, {"A1", a1}, {"A2", a2}};
                    Eigen::MatrixXd py = P(pmf, {"Y2"}, {"Z1", "Z2"}, f);
                    Eigen::MatrixXd Mi =
                        invert2or4(P(pmf, {"W1", "W2"}, {"Z1", "Z2"}, f), "P(W2bar|Z2bar,y1bar,a2bar) " + slice);
                    for (int y2 = 0; y2 < 2; ++y2) {
                        Eigen::RowVectorXd row = py.row(y2) * Mi;
                        for (int w = 0; w < 4; ++w)
                            h.h22_[OutcomeBridge::i22(y0, y1, y2, w >> 1, w & 1, a1, a2)] = row(w);
                    }
                }
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1) {
            std::string slice = "y0=" + s(y0) + ",a1=" + s(a1);
            Assignment f{{"Y0", y0}, {"A1", a1}};
            Eigen::MatrixXd Mi = invert2or4(P(pmf, {"W1"}, {"Z1"}, f), "P(W1|Z1,y0,a1) " + slice);
            // rows (w1, w2, y1), y1 fastest
            Eigen::MatrixXd wy = P(pmf, {"W1", "W2", "Y1"}, {"Z1"}, f);
            Eigen::MatrixXd py1 = P(pmf, {"Y1"}, {"Z1"}, f);
            for (int y1 = 0; y1 < 2; ++y1) {
                Eigen::MatrixXd B(4, 2);
                for (int w = 0; w < 4; ++w) B.row(w) = wy.row(w * 2 + y1);
                Eigen::RowVectorXd r11 = py1.row(y1) * Mi;
                for (int w1 = 0; w1 < 2; ++w1) h.h11_[OutcomeBridge::i11(y0, y1, w1, a1)] = r11(w1);
                for (int a2 = 0; a2 < 2; ++a2)
                    for (int y2 = 0; y2 < 2; ++y2) {
                        Eigen::RowVectorXd h22(4);
                        for (int w = 0; w < 4; ++w) h22(w) = h.h22(y0, y1, y2, w >> 1, w & 1, a1, a2);
                        Eigen::RowVectorXd row = h22 * B * Mi;
                        for (int w1 = 0; w1 < 2; ++w1)
                            h.h21_[OutcomeBridge::i21(y0, y1, y2, w1, a1, a2)] = row(w1);
                    }
            }
        }
    return h;
}

BridgeSet solve_bridges(const JointPmf& pmf_in, Provenance::Kind kind) {
    const JointPmf pmf = observed_part(pmf_in);
    BridgeSet b;
    b.outcome = solve_h(pmf);
    b.treatment = solve_q(pmf);
    for (Component c : {Component::H22, Component::H21, Component::H11, Component::Q11, Component::Q22})
        b.provenance[c] = Provenance{kind, 0};
    return b;
}

double BridgeResiduals::max() const {
    double m = 0.0;
    for (const auto& r : {h22, h21, q11, q22, h11})
        if (r) m = std::max(m, *r);
    return m;
}

BridgeResiduals verify_bridges(const BridgeSet& b, const JointPmf& pmf_in) {
    const JointPmf pmf = observed_part(pmf_in);
    const auto& h = b.outcome;
    const auto& q = b.treatment;
    BridgeResiduals out;

    if (b.has(Component::H22)) {
        double r = 0.0;
        for (int y0 = 0; y0 < 2; ++y0)
            for (int y1 = 0; y1 < 2; ++y1)
                for (int a1 = 0; a1 < 2; ++a1)
                    for (int a2 = 0; a2 < 2; ++a2) {
                        Assignment f{{"Y0", y0}, {"Y1", y1}, {"A1", a1}, {"A2", a2}};
                        auto py = P(pmf, {"Y2"}, {"Z1", "Z2"}, f);
                        auto pw = P(pmf, {"W1", "W2"}, {"Z1", "Z2"}, f);
                        for (int z = 0; z < 4; ++z)
                            for (int y2 = 0; y2 < 2; ++y2) {
                                double rhs = 0.0;
                                for (int w = 0; w < 4; ++w)
                                    rhs += h.h22(y0, y1, y2, w >> 1, w & 1, a1, a2) * pw(w, z);
                                r = std::max(r, std::abs(py(y2, z) - rhs));
                            }
                    }
        out.h22 = r;
    }
    if (b.has(Component::H22) && b.has(Component::H21)) {
        double r = 0.0;
        for (int y0 = 0; y0 < 2; ++y0)
            for (int a1 = 0; a1 < 2; ++a1) {
                Assignment f{{"Y0", y0}, {"A1", a1}};
                auto wy = P(pmf, {"W1", "W2", "Y1"}, {"Z1"}, f);
                auto pw1 = P(pmf, {"W1"}, {"Z1"}, f);
                for (int z1 = 0; z1 < 2; ++z1)
                    for (int a2 = 0; a2 < 2; ++a2)
                        for (int y1 = 0; y1 < 2; ++y1)
                            for (int y2 = 0; y2 < 2; ++y2) {
                                double lhs = 0.0, rhs = 0.0;
                                for (int w = 0; w < 4; ++w)
                                    lhs += h.h22(y0, y1, y2, w >> 1, w & 1, a1, a2) * wy(w * 2 + y1, z1);
                                for (int w1 = 0; w1 < 2; ++w1)
                                    rhs += h.h21(y0, y1, y2, w1, a1, a2) * pw1(w1, z1);
                                r = std::max(r, std::abs(lhs - rhs));
                            }
            }
        out.h21 = r;
    }
    if (b.has(Component::H11)) {
        double r = 0.0;
        for (int y0 = 0; y0 < 2; ++y0)
            for (int a1 = 0; a1 < 2; ++a1) {
                Assignment f{{"Y0", y0}, {"A1", a1}};
                auto py1 = P(pmf, {"Y1"}, {"Z1"}, f);
                auto pw1 = P(pmf, {"W1"}, {"Z1"}, f);
                for (int z1 = 0; z1 < 2; ++z1)
                    for (int y1 = 0; y1 < 2; ++y1) {
                        double rhs = 0.0;
                        for (int w1 = 0; w1 < 2; ++w1) rhs += h.h11(y0, y1, w1, a1) * pw1(w1, z1);
                        r = std::max(r, std::abs(py1(y1, z1) - rhs));
                    }
            }
        out.h11 = r;
    }
    if (b.has(Component::Q11)) {
        double r = 0.0;
        for (int y0 = 0; y0 < 2; ++y0) {
            // rows (z1, a1)
            auto za = P(pmf, {"Z1", "A1"}, {"W1"}, {{"Y0", y0}});
            for (int w1 = 0; w1 < 2; ++w1)
                for (int a1 = 0; a1 < 2; ++a1) {
                    double lhs = 0.0;
                    for (int z1 = 0; z1 < 2; ++z1) lhs += q.q11(y0, a1, z1) * za(z1 * 2 + a1, w1);
                    r = std::max(r, std::abs(lhs - 1.0));
                }
        }
        out.q11 = r;
    }
    if (b.has(Component::Q11) && b.has(Component::Q22)) {
        double r = 0.0;
        for (int y0 = 0; y0 < 2; ++y0)
            for (int y1 = 0; y1 < 2; ++y1)
                for (int a1 = 0; a1 < 2; ++a1) {
                    Assignment f{{"Y0", y0}, {"Y1", y1}, {"A1", a1}};
                    auto zza = P(pmf, {"Z1", "Z2", "A2"}, {"W1", "W2"}, f);
                    auto pz1 = P(pmf, {"Z1"}, {"W1", "W2"}, f);
                    for (int w = 0; w < 4; ++w)
                        for (int a2 = 0; a2 < 2; ++a2) {
                            double lhs = 0.0, rhs = 0.0;
                            for (int z = 0; z < 4; ++z)
                                lhs += q.q22(y0, y1, a1, a2, z >> 1, z & 1) * zza(z * 2 + a2, w);
                            for (int z1 = 0; z1 < 2; ++z1) rhs += q.q11(y0, a1, z1) * pz1(z1, w);
                            r = std::max(r, std::abs(lhs - rhs));
                        }
                }
        out.q22 = r;
    }
    return out;
}

BridgeSet pseudo_bridges(std::uint64_t seed, const std::set<Component>& which) {
    BridgeSet b;
    for (Component c : which) {
        // one stream per component so the draws do not depend on `which`
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        switch (c) {
            case Component::H22:
                for (int y0 = 0; y0 < 2; ++y0)
                    for (int y1 = 0; y1 < 2; ++y1)
                        for (int w = 0; w < 4; ++w)
                            for (int a1 = 0; a1 < 2; ++a1)
                                for (int a2 = 0; a2 < 2; ++a2) {
                                    double u0 = rng.uniform(), u1 = rng.uniform();
                                    double t = u0 + u1;
                                    b.outcome.h22_[OutcomeBridge::i22(y0, y1, 0, w >> 1, w & 1, a1, a2)] = u0 / t;
                                    b.outcome.h22_[OutcomeBridge::i22(y0, y1, 1, w >> 1, w & 1, a1, a2)] = u1 / t;
                                }
                break;
            case Component::H21:
                for (int y0 = 0; y0 < 2; ++y0)
                    for (int w1 = 0; w1 < 2; ++w1)
                        for (int a1 = 0; a1 < 2; ++a1)
                            for (int a2 = 0; a2 < 2; ++a2) {
                                std::array<double, 4> u;
                                double t = 0.0;
                                for (auto& x : u) t += (x = rng.uniform());
                                for (int k = 0; k < 4; ++k)
                                    b.outcome.h21_[OutcomeBridge::i21(y0, k >> 1, k & 1, w1, a1, a2)] = u[k] / t;
                            }
                break;
            case Component::H11:
                for (int y0 = 0; y0 < 2; ++y0)
                    for (int w1 = 0; w1 < 2; ++w1)
                        for (int a1 = 0; a1 < 2; ++a1) {
                            double u0 = rng.uniform(), u1 = rng.uniform();
                            b.outcome.h11_[OutcomeBridge::i11(y0, 0, w1, a1)] = u0 / (u0 + u1);
                            b.outcome.h11_[OutcomeBridge::i11(y0, 1, w1, a1)] = u1 / (u0 + u1);
                        }
                break;
            case Component::Q11:
                for (auto& x : b.treatment.q11_) x = rng.uniform(0.5, 4.0);
                break;
            case Component::Q22:
                for (auto& x : b.treatment.q22_) x = rng.uniform(0.5, 4.0);
                break;
        }
        b.provenance[c] = Provenance{Provenance::Pseudo, seed};
    }
    return b;
}

CollapseResidual bridge_collapse_check(const OutcomeBridge& h, const JointPmf& pmf_in) {
    const JointPmf pmf = observed_part(pmf_in);
    CollapseResidual out;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1) {
            Assignment f{{"Y0", y0}, {"A1", a1}};
            auto py1 = P(pmf, {"Y1"}, {"Z1"}, f);
            auto pw1 = P(pmf, {"W1"}, {"Z1"}, f);
            for (int a2 = 0; a2 < 2; ++a2)
                for (int y1 = 0; y1 < 2; ++y1) {
                    double hs[2];
                    for (int w1 = 0; w1 < 2; ++w1) {
                        hs[w1] = h.h21(y0, y1, 0, w1, a1, a2) + h.h21(y0, y1, 1, w1, a1, a2);
                        out.vs_h11 = std::max(out.vs_h11, std::abs(hs[w1] - h.h11(y0, y1, w1, a1)));
                    }
                    for (int z1 = 0; z1 < 2; ++z1) {
                        double rhs = hs[0] * pw1(0, z1) + hs[1] * pw1(1, z1);
                        out.equation = std::max(out.equation, std::abs(py1(y1, z1) - rhs));
                    }
                }
        }
    return out;
}

double h22_normalization_gap(const OutcomeBridge& h) {
    double gap = 0.0;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int w = 0; w < 4; ++w)
                for (int a1 = 0; a1 < 2; ++a1)
                    for (int a2 = 0; a2 < 2; ++a2) {
                        double t = h.h22(y0, y1, 0, w >> 1, w & 1, a1, a2) + h.h22(y0, y1, 1, w >> 1, w & 1, a1, a2);
                        gap = std::max(gap, std::abs(t - 1.0));
                    }
    return gap;
}

std::array<double, 64> marginal_outcome_bridge(const OutcomeBridge& h) {
    std::array<double, 64> m{};
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int w = 0; w < 4; ++w)
                for (int a1 = 0; a1 < 2; ++a1)
                    for (int a2 = 0; a2 < 2; ++a2) {
                        double v = 0.0;
                        for (int y2 = 0; y2 < 2; ++y2) v += y2 * h.h22(y0, y1, y2, w >> 1, w & 1, a1, a2);
                        m[y0 * 32 + y1 * 16 + w * 4 + a1 * 2 + a2] = v;
                    }
    return m;
}

double marginal_bridge_residual(const std::array<double, 64>& m, const JointPmf& pmf_in) {
    const JointPmf pmf = observed_part(pmf_in);
    double r = 0.0;
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2) {
                    Assignment f{{"Y0", y0}, {"Y1", y1}, {"A1", a1}, {"A2", a2}};
                    auto py = P(pmf, {"Y2"}, {"Z1", "Z2"}, f);
                    auto pw = P(pmf, {"W1", "W2"}, {"Z1", "Z2"}, f);
                    for (int z = 0; z < 4; ++z) {
                        double rhs = 0.0;
                        for (int w = 0; w < 4; ++w) rhs += m[y0 * 32 + y1 * 16 + w * 4 + a1 * 2 + a2] * pw(w, z);
                        r = std::max(r, std::abs(py(1, z) - rhs));
                    }
                }
    return r;
}

namespace {

template <std::size_t N>
nlohmann::json table_json(const std::array<double, N>& t, std::vector<std::string> args) {
    nlohmann::json values = nlohmann::json::object();
    const std::size_t m = args.size();
    for (std::size_t i = 0; i < N; ++i) {
        std::string key;
        for (std::size_t k = 0; k < m; ++k) key += char('0' + ((i >> (m - 1 - k)) & 1));
        values[key] = t[i];
    }
    return {{"args", args}, {"values", values}};
}

template <std::size_t N>
void table_from_json(const nlohmann::json& j, std::array<double, N>& t) {
    const auto& values = j.at("values");
    std::size_t m = j.at("args").size();
    if ((std::size_t{1} << m) != N) throw std::invalid_argument("bridge table has wrong arity");
    for (std::size_t i = 0; i < N; ++i) {
        std::string key;
        for (std::size_t k = 0; k < m; ++k) key += char('0' + ((i >> (m - 1 - k)) & 1));
        t[i] = values.at(key).get<double>();
    }
}

}  // namespace

nlohmann::json to_json(const BridgeSet& b) {
    nlohmann::json j;
    nlohmann::json prov = nlohmann::json::object();
    for (const auto& [c, p] : b.provenance) {
        nlohmann::json e{{"kind", p.kind == Provenance::Pseudo ? "pseudo"
                                  : p.kind == Provenance::SolvedFromTruth ? "solved-from-truth"
                                                                          : "solved-from-sample"}};
        if (p.kind == Provenance::Pseudo) e["seed"] = p.seed;
        prov[to_string(c)] = e;
    }
    j["provenance"] = prov;
    if (b.has(Component::H22))
        j["h22"] = table_json(b.outcome.h22_, {"y0", "y1", "y2", "w1", "w2", "a1", "a2"});
    if (b.has(Component::H21)) j["h21"] = table_json(b.outcome.h21_, {"y0", "y1", "y2", "w1", "a1", "a2"});
    if (b.has(Component::H11)) j["h11"] = table_json(b.outcome.h11_, {"y0", "y1", "w1", "a1"});
    if (b.has(Component::Q11)) j["q11"] = table_json(b.treatment.q11_, {"y0", "a1", "z1"});
    if (b.has(Component::Q22))
        j["q22"] = table_json(b.treatment.q22_, {"y0", "y1", "a1", "a2", "z1", "z2"});
    return j;
}

BridgeSet bridges_from_json(const nlohmann::json& j) {
    BridgeSet b;
    for (const auto& [name, e] : j.at("provenance").items()) {
        Component c = component_from_string(name);
        std::string kind = e.at("kind");
        Provenance p{kind == "pseudo" ? Provenance::Pseudo
                     : kind == "solved-from-truth" ? Provenance::SolvedFromTruth
                                                   : Provenance::SolvedFromSample,
                     e.value("seed", std::uint64_t{0})};
        b.provenance[c] = p;
        switch (c) {
            case Component::H22: table_from_json(j.at("h22"), b.outcome.h22_); break;
            case Component::H21: table_from_json(j.at("h21"), b.outcome.h21_); break;
            case Component::H11: table_from_json(j.at("h11"), b.outcome.h11_); break;
            case Component::Q11: table_from_json(j.at("q11"), b.treatment.q11_); break;
            case Component::Q22: table_from_json(j.at("q22"), b.treatment.q22_); break;
        }
    }
    return b;
}

}  // namespace proxidtr
