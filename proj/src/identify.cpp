#include "proxidtr/identify.hpp"

#include <cmath>

namespace proxidtr {

std::string to_string(Method m) {
    switch (m) {
        case Method::POR: return "POR";
        case Method::PHA: return "PHA";
        case Method::PIPW: return "PIPW";
        case Method::PMR: return "PMR";
        case Method::SRA: return "SRA";
        case Method::Oracle: return "Oracle";
    }
    return "?";
}

Method method_from_string(const std::string& s) {
    std::string u;
    for (char c : s) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (Method m : {Method::POR, Method::PHA, Method::PIPW, Method::PMR, Method::SRA, Method::Oracle}) {
        std::string t;
        for (char c : to_string(m)) t += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        if (t == u) return m;
    }
    throw std::invalid_argument("unknown method: " + s);
}

namespace {

// Observed cell unpacked; the observed order is Y0 Z1 W1 A1 Y1 Z2 W2 A2 Y2.
struct Cell {
    int y0, z1, w1, a1, y1, z2, w2, a2, y2;
    double f;  // f(cell | y0)
};

struct Law {
    std::vector<Cell> cells;
    std::array<double, 2> p_y0{};
    std::array<std::array<double, 2>, 2> w1_given_y0{};  // [y0][w1]
};

Law prepare(const JointPmf& pmf_in) {
    const JointPmf pmf =
        pmf_in.order() == observed_order() ? pmf_in : marginalize(pmf_in, observed_order().names());
    Law law;
    for (std::size_t c = 0; c < pmf.cells(); ++c) law.p_y0[pmf.bit(c, 0)] += pmf[c];
    for (int y0 = 0; y0 < 2; ++y0)
        if (law.p_y0[y0] <= 0.0) throw PositivityError("identification needs P(y0) > 0", "Y0=" + std::to_string(y0));
    for (std::size_t c = 0; c < pmf.cells(); ++c) {
        if (pmf[c] == 0.0) continue;
        Cell x{pmf.bit(c, 0), pmf.bit(c, 1), pmf.bit(c, 2), pmf.bit(c, 3), pmf.bit(c, 4),
               pmf.bit(c, 5), pmf.bit(c, 6), pmf.bit(c, 7), pmf.bit(c, 8), 0.0};
        x.f = pmf[c] / law.p_y0[x.y0];
        law.w1_given_y0[x.y0][x.w1] += x.f;
        law.cells.push_back(x);
    }
    return law;
}

IdentifiedDensity tagged(Method m, const BridgeSet& b) {
    IdentifiedDensity d{m, {}, b.provenance};
    return d;
}

// sum_w1 h21 f(w1 | y0) and its one-stage analogue
void add_outcome_base(PotentialDensity& g, const Law& law, const OutcomeBridge& h, double sign, bool stage1) {
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1)
            for (int y1 = 0; y1 < 2; ++y1) {
                for (int a2 = 0; a2 < 2; ++a2)
                    for (int y2 = 0; y2 < 2; ++y2) {
                        double s = 0.0;
                        for (int w1 = 0; w1 < 2; ++w1) s += h.h21(y0, y1, y2, w1, a1, a2) * law.w1_given_y0[y0][w1];
                        g.at(a1, a2, y2, y1, y0) += sign * s;
                    }
                if (stage1) {
                    double s = 0.0;
                    for (int w1 = 0; w1 < 2; ++w1) s += h.h11(y0, y1, w1, a1) * law.w1_given_y0[y0][w1];
                    g.g1[PotentialDensity::idx1(a1, y1, y0)] += sign * s;
                }
            }
}

// sum_z1 q11 f(y1, a1, z1 | y0)
void add_ipw_stage1(PotentialDensity& g, const Law& law, const TreatmentBridge& q) {
    for (const Cell& c : law.cells)
        g.g1[PotentialDensity::idx1(c.a1, c.y1, c.y0)] += q.q11(c.y0, c.a1, c.z1) * c.f;
}

}  // namespace

IdentifiedDensity density_por(const JointPmf& pmf, const BridgeSet& b) {
    b.require(Component::H21);
    b.require(Component::H11);
    Law law = prepare(pmf);
    IdentifiedDensity d = tagged(Method::POR, b);
    add_outcome_base(d.density, law, b.outcome, 1.0, true);
    return d;
}

IdentifiedDensity density_pipw(const JointPmf& pmf, const BridgeSet& b) {
    b.require(Component::Q11);
    b.require(Component::Q22);
    Law law = prepare(pmf);
    IdentifiedDensity d = tagged(Method::PIPW, b);
    const auto& q = b.treatment;
    for (const Cell& c : law.cells)
        d.density.at(c.a1, c.a2, c.y2, c.y1, c.y0) += q.q22(c.y0, c.y1, c.a1, c.a2, c.z1, c.z2) * c.f;
    add_ipw_stage1(d.density, law, q);
    return d;
}

IdentifiedDensity density_pha(const JointPmf& pmf, const BridgeSet& b, int k) {
    if (k == 0) {
        IdentifiedDensity d = density_por(pmf, b);
        d.method = Method::PHA;
        return d;
    }
    if (k == 2) {
        IdentifiedDensity d = density_pipw(pmf, b);
        d.method = Method::PHA;
        return d;
    }
    if (k != 1) throw std::invalid_argument("hybrid split must be 0, 1 or 2");
    b.require(Component::H22);
    b.require(Component::Q11);
    Law law = prepare(pmf);
    IdentifiedDensity d = tagged(Method::PHA, b);
    const auto& h = b.outcome;
    const auto& q = b.treatment;
    for (const Cell& c : law.cells) {
        double wq = q.q11(c.y0, c.a1, c.z1) * c.f;
        for (int a2 = 0; a2 < 2; ++a2)
            for (int y2 = 0; y2 < 2; ++y2)
                d.density.at(c.a1, a2, y2, c.y1, c.y0) += h.h22(c.y0, c.y1, y2, c.w1, c.w2, c.a1, a2) * wq;
    }
    add_ipw_stage1(d.density, law, q);
    return d;
}

IdentifiedDensity density_pmr(const JointPmf& pmf, const BridgeSet& b) {
    for (Component c : {Component::H22, Component::H21, Component::H11, Component::Q11, Component::Q22})
        b.require(c);
    Law law = prepare(pmf);
    IdentifiedDensity d = tagged(Method::PMR, b);
    auto& g = d.density;
    const auto& h = b.outcome;
    const auto& q = b.treatment;
    for (const Cell& c : law.cells) {
        // stage 2: q22 (f(ybar2, zbar2, abar2 | y0) - sum_w h22 f(wbar2, zbar2, ybar1, abar2 | y0))
        double w22 = q.q22(c.y0, c.y1, c.a1, c.a2, c.z1, c.z2) * c.f;
        g.at(c.a1, c.a2, c.y2, c.y1, c.y0) += w22;
        for (int y2 = 0; y2 < 2; ++y2)
            g.at(c.a1, c.a2, y2, c.y1, c.y0) -= w22 * h.h22(c.y0, c.y1, y2, c.w1, c.w2, c.a1, c.a2);
        // stage 1: q11 (sum_w h22 f(wbar2, z1, ybar1, a1 | y0) - sum_w1 h21 f(w1, z1, a1 | y0))
        double w11 = q.q11(c.y0, c.a1, c.z1) * c.f;
        for (int a2 = 0; a2 < 2; ++a2)
            for (int y2 = 0; y2 < 2; ++y2) {
                g.at(c.a1, a2, y2, c.y1, c.y0) += w11 * h.h22(c.y0, c.y1, y2, c.w1, c.w2, c.a1, a2);
                for (int y1 = 0; y1 < 2; ++y1)
                    g.at(c.a1, a2, y2, y1, c.y0) -= w11 * h.h21(c.y0, y1, y2, c.w1, c.a1, a2);
            }
        // one-stage marginal
        g.g1[PotentialDensity::idx1(c.a1, c.y1, c.y0)] += w11;
        for (int y1 = 0; y1 < 2; ++y1)
            g.g1[PotentialDensity::idx1(c.a1, y1, c.y0)] -= w11 * h.h11(c.y0, y1, c.w1, c.a1);
    }
    add_outcome_base(g, law, h, 1.0, true);
    return d;
}

IdentifiedDensity identified_density(Method m, const JointPmf& pmf, const BridgeSet& b) {
    switch (m) {
        case Method::POR: return density_por(pmf, b);
        case Method::PHA: return density_pha(pmf, b, 1);
        case Method::PIPW: return density_pipw(pmf, b);
        case Method::PMR: return density_pmr(pmf, b);
        default: throw std::invalid_argument(to_string(m) + " is not a bridge-based method");
    }
}

double value_from_density(const IdentifiedDensity& g, const JointPmf& pmf, const Regime& regime) {
    return regime_value(g.density, y0_marginal(pmf), regime);
}

QTables q_functions(const IdentifiedDensity& gd) {
    const auto& g = gd.density;
    QTables q;
    auto cell = [](int y0, int y1, int a1, int a2) {
        return "y0=" + std::to_string(y0) + ",y1=" + std::to_string(y1) + ",a1=" + std::to_string(a1) +
               ",a2=" + std::to_string(a2);
    };
    for (int y0 = 0; y0 < 2; ++y0)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2) {
                    double den = g.at(a1, a2, 0, y1, y0) + g.at(a1, a2, 1, y1, y0);
                    if (den == 0.0 || !std::isfinite(den))
                        throw PositivityError("Q2 denominator is zero", cell(y0, y1, a1, a2));
                    q.q2[y0 * 8 + y1 * 4 + a1 * 2 + a2] = g.at(a1, a2, 1, y1, y0) / den;
                }
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1) {
            double v = 0.0;
            for (int y1 = 0; y1 < 2; ++y1) {
                // the weight is taken at the maximizing second-stage action
                int a2 = q.Q2(y0, y1, a1, 1) > q.Q2(y0, y1, a1, 0) ? 1 : 0;
                double num = g.at(a1, a2, 0, y1, y0) + g.at(a1, a2, 1, y1, y0);
                double den = 0.0;
                for (int yy = 0; yy < 2; ++yy) den += g.at(a1, a2, 0, yy, y0) + g.at(a1, a2, 1, yy, y0);
                if (den == 0.0 || !std::isfinite(den))
                    throw PositivityError("Q1 weight denominator is zero", cell(y0, y1, a1, a2));
                v += q.Q2(y0, y1, a1, a2) * num / den;
            }
            q.q1[y0 * 2 + a1] = v;
        }
    return q;
}

double max_deviation(const PotentialDensity& g, const PotentialDensity& h) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.g.size(); ++i) m = std::max(m, std::abs(g.g[i] - h.g[i]));
    return m;
}

nlohmann::json to_json(const IdentifiedDensity& d) {
    nlohmann::json cells = nlohmann::json::array();
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < 2; ++a2)
            for (int y2 = 0; y2 < 2; ++y2)
                for (int y1 = 0; y1 < 2; ++y1)
                    for (int y0 = 0; y0 < 2; ++y0)
                        cells.push_back({{"a1", a1}, {"a2", a2}, {"y2", y2}, {"y1", y1}, {"y0", y0},
                                         {"g", d.at(a1, a2, y2, y1, y0)}});
    nlohmann::json marg = nlohmann::json::array();
    for (int a1 = 0; a1 < 2; ++a1)
        for (int y1 = 0; y1 < 2; ++y1)
            for (int y0 = 0; y0 < 2; ++y0)
                marg.push_back({{"a1", a1}, {"y1", y1}, {"y0", y0}, {"g1", d.density.g1[PotentialDensity::idx1(a1, y1, y0)]}});
    nlohmann::json prov = nlohmann::json::object();
    for (const auto& [c, p] : d.provenance) prov[to_string(c)] = to_string(p);
    return {{"method", to_string(d.method)}, {"cells", cells}, {"marginal", marg}, {"provenance", prov}};
}

}  // namespace proxidtr
