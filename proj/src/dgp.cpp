#include "proxidtr/dgp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "proxidtr/rng.hpp"

namespace proxidtr {

double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

DgpParams DgpParams::defaults() {
    DgpParams p;
    p.models = {
        {"U0", 0.5, {}},
        {"Y0", -1.0, {{-0.2, {"U0"}}}},
        {"Z1", -2.0, {{5.0, {"U0"}}, {0.1, {"Y0"}}}},
        {"A1", -1.0, {{0.2, {"Z1"}}, {2.0, {"U0"}}, {-0.25, {"Y0"}}}},
        {"W1", -2.2, {{5.2, {"U0"}}, {0.1, {"Y0"}}}},
        {"Y1", 0.1,
         {{-0.55, {"A1"}}, {0.25, {"W1"}}, {1.0, {"U0"}}, {-3.0, {"Y0"}}, {5.0, {"A1", "Y0"}}}},
        {"U1", 0.1, {{0.15, {"A1"}}, {1.0, {"U0"}}, {-0.1, {"Y0"}}}},
        {"W2", -2.0,
         {{0.2, {"Y1"}}, {5.0, {"U1"}}, {0.2, {"W1"}}, {-0.2, {"U0"}}, {-0.2, {"Y0"}}}},
        {"Z2", -2.0,
         {{0.2, {"Y1"}}, {5.0, {"U1"}}, {0.002, {"A1"}}, {0.2, {"Z1"}}, {-0.2, {"U0"}}, {-0.2, {"Y0"}}}},
        {"A2", -0.6,
         {{0.2, {"Y1"}},
          {1.5, {"U1"}},
          {-0.5, {"Z2"}},
          {-0.6, {"A1"}},
          {-0.1, {"Z1"}},
          {0.5, {"U0"}},
          {0.2, {"Y0"}}}},
        {"Y2", 0.0,
         {{-0.25, {"Y1"}},
          {1.0, {"A2"}},
          {3.0, {"U1"}},
          {-0.7, {"W2"}},
          {-0.25, {"A1"}},
          {-0.7, {"W1"}},
          {-3.0, {"U0"}},
          {-0.25, {"Y0"}},
          {-4.0, {"Y1", "A2"}},
          {2.0, {"A2", "A1"}},
          {-2.0, {"A2", "Y0"}},
          {-1.0, {"Y1", "A2", "A1"}},
          {8.0, {"Y1", "A2", "Y0"}},
          {7.0, {"A1", "A2", "Y0"}}}},
    };
    return p;
}

LogisticModel& DgpParams::model(const std::string& target) {
    for (auto& m : models)
        if (m.target == target) return m;
    throw UnknownVariable(target);
}

CompiledDgp::CompiledDgp(const DgpParams& p) {
    const auto& order = full_order();
    std::vector<bool> generated(order.size(), false);
    for (const auto& m : p.models) {
        CModel cm{order.index(m.target), m.intercept, {}};
        for (const auto& t : m.terms) {
            CTerm ct{t.coef, {}};
            for (const auto& v : t.vars) {
                std::size_t pos = order.index(v);
                if (!generated[pos])
                    throw std::invalid_argument("model for " + m.target + " uses " + v +
                                                " before it is generated");
                ct.vars.push_back(pos);
            }
            cm.terms.push_back(std::move(ct));
        }
        generated[cm.target] = true;
        models_.push_back(std::move(cm));
    }
    for (std::size_t i = 0; i < generated.size(); ++i)
        if (!generated[i]) throw std::invalid_argument("no model generates " + order[i]);
}

double CompiledDgp::p1(std::size_t k, const std::array<int, 11>& v) const {
    const CModel& m = models_[k];
    double eta = m.intercept;
    for (const auto& t : m.terms) {
        double x = t.coef;
        for (std::size_t pos : t.vars) x *= v[pos];
        eta += x;
    }
    return expit(eta);
}

JointPmf true_joint(const DgpParams& params) {
    CompiledDgp dgp(params);
    std::vector<double> mass(2048);
    std::array<int, 11> v{};
    for (std::size_t cell = 0; cell < 2048; ++cell) {
        for (int i = 0; i < 11; ++i) v[i] = static_cast<int>((cell >> (10 - i)) & 1);
        double p = 1.0;
        for (std::size_t k = 0; k < dgp.size(); ++k) {
            double q = dgp.p1(k, v);
            p *= v[dgp.target(k)] ? q : 1.0 - q;
        }
        mass[cell] = p;
    }
    return JointPmf(full_order(), std::move(mass));
}

namespace {

// full_order positions of the observed columns and of (U0, U1)
constexpr std::array<int, 9> kObsPos{0, 2, 3, 4, 5, 7, 8, 9, 10};
constexpr std::array<int, 2> kHidPos{1, 6};
const char* const kObsNames[9] = {"y0", "z1", "w1", "a1", "y1", "z2", "w2", "a2", "y2"};

}  // namespace

Dataset sample(const DgpParams& params, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be at least 1");
    CompiledDgp dgp(params);
    Rng rng(seed);
    Dataset d;
    d.observed.seed = seed;
    d.observed.rows.resize(n);
    d.hidden = HiddenData{std::vector<HiddenRow>(n)};
    std::array<int, 11> v{};
    for (std::size_t i = 0; i < n; ++i) {
        v.fill(0);
        for (std::size_t k = 0; k < dgp.size(); ++k) v[dgp.target(k)] = rng.bernoulli(dgp.p1(k, v));
        for (int c = 0; c < 9; ++c) d.observed.rows[i][c] = static_cast<std::uint8_t>(v[kObsPos[c]]);
        for (int c = 0; c < 2; ++c) d.hidden->rows[i][c] = static_cast<std::uint8_t>(v[kHidPos[c]]);
    }
    return d;
}

void write_csv(std::ostream& os, const Dataset& data, bool include_hidden) {
    if (include_hidden && !data.hidden) throw std::invalid_argument("dataset has no hidden block");
    for (int c = 0; c < 9; ++c) os << (c ? "," : "") << kObsNames[c];
    if (include_hidden) os << ",u0,u1";
    os << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& r = data.observed.rows[i];
        for (int c = 0; c < 9; ++c) os << (c ? "," : "") << int(r[c]);
        if (include_hidden) os << ',' << int(data.hidden->rows[i][0]) << ',' << int(data.hidden->rows[i][1]);
        os << '\n';
    }
}

Dataset read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::invalid_argument("empty CSV");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) header.push_back(f);
    }
    bool hidden = header.size() == 11;
    if (header.size() != 9 && !hidden) throw std::invalid_argument("CSV must have 9 or 11 columns");
    for (int c = 0; c < 9; ++c)
        if (header[c] != kObsNames[c]) throw std::invalid_argument("unexpected CSV column " + header[c]);
    if (hidden && (header[9] != "u0" || header[10] != "u1"))
        throw std::invalid_argument("hidden columns must be u0,u1");
    Dataset d;
    if (hidden) d.hidden = HiddenData{};
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<int> vals;
        while (std::getline(ss, f, ',')) {
            if (f != "0" && f != "1") throw std::invalid_argument("non-binary cell on line " + std::to_string(lineno));
            vals.push_back(f[0] - '0');
        }
        if (vals.size() != header.size()) throw std::invalid_argument("ragged CSV line " + std::to_string(lineno));
        ObservedRow r;
        for (int c = 0; c < 9; ++c) r[c] = static_cast<std::uint8_t>(vals[c]);
        d.observed.rows.push_back(r);
        if (hidden) d.hidden->rows.push_back({static_cast<std::uint8_t>(vals[9]), static_cast<std::uint8_t>(vals[10])});
    }
    return d;
}

PotentialDensity oracle_density(const JointPmf& full) {
    // (Y0, U0, A1, Y1, U1, A2, Y2), last fastest
    JointPmf m = marginalize(full, {"Y0", "U0", "A1", "Y1", "U1", "A2", "Y2"});
    auto P = [&](int y0, int u0, int a1, int y1, int u1, int a2, int y2) {
        return m[(y0 << 6) | (u0 << 5) | (a1 << 4) | (y1 << 3) | (u1 << 2) | (a2 << 1) | y2];
    };
    auto need = [](double den, const std::string& where) {
        if (den <= 0.0) throw PositivityError("oracle g-formula conditions on an empty cell", where);
        return den;
    };
    // Partial sums over trailing variables.
    auto S = [&](std::initializer_list<int> fixed_prefix) {
        std::vector<int> pre(fixed_prefix);
        double s = 0.0;
        for (std::size_t c = 0; c < 128; ++c) {
            bool ok = true;
            for (std::size_t i = 0; i < pre.size() && ok; ++i) ok = int((c >> (6 - i)) & 1) == pre[i];
            if (ok) s += m[c];
        }
        return s;
    };

    PotentialDensity out;
    for (int y0 = 0; y0 < 2; ++y0) {
        double py0 = need(S({y0}), "Y0=" + std::to_string(y0));
        for (int a1 = 0; a1 < 2; ++a1)
            for (int y1 = 0; y1 < 2; ++y1) {
                double g1 = 0.0;
                for (int u0 = 0; u0 < 2; ++u0) {
                    double pu0 = S({y0, u0}) / py0;
                    std::string w = "Y0=" + std::to_string(y0) + ",U0=" + std::to_string(u0) +
                                    ",A1=" + std::to_string(a1);
                    double py1 = S({y0, u0, a1, y1}) / need(S({y0, u0, a1}), w);
                    g1 += py1 * pu0;
                }
                out.g1[PotentialDensity::idx1(a1, y1, y0)] = g1;
                for (int a2 = 0; a2 < 2; ++a2)
                    for (int y2 = 0; y2 < 2; ++y2) {
                        double g = 0.0;
                        for (int u0 = 0; u0 < 2; ++u0) {
                            double pu0 = S({y0, u0}) / py0;
                            double py1 = S({y0, u0, a1, y1}) / S({y0, u0, a1});
                            double base = S({y0, u0, a1, y1});
                            for (int u1 = 0; u1 < 2; ++u1) {
                                std::string w = "Y0=" + std::to_string(y0) + ",U0=" + std::to_string(u0) +
                                                ",A1=" + std::to_string(a1) + ",Y1=" + std::to_string(y1);
                                double pu1 = S({y0, u0, a1, y1, u1}) / need(base, w);
                                double den = need(S({y0, u0, a1, y1, u1, a2}), w + ",U1=" + std::to_string(u1) +
                                                                                   ",A2=" + std::to_string(a2));
                                double py2 = P(y0, u0, a1, y1, u1, a2, y2) / den;
                                g += py2 * pu1 * py1 * pu0;
                            }
                        }
                        out.at(a1, a2, y2, y1, y0) = g;
                    }
            }
    }
    return out;
}

PotentialDensity oracle_potential_density(const DgpParams& params) {
    return oracle_density(true_joint(params));
}

std::array<double, 2> y0_marginal(const JointPmf& pmf) {
    JointPmf m = marginalize(pmf, {"Y0"});
    return {m[0], m[1]};
}

double regime_value(const PotentialDensity& g, const std::array<double, 2>& p_y0, const Regime& r) {
    double v = 0.0;
    for (int y0 = 0; y0 < 2; ++y0) {
        int a1 = r.act1(y0);
        double s = 0.0;
        for (int y1 = 0; y1 < 2; ++y1) s += g.at(a1, r.act2(y0, y1, a1), 1, y1, y0);
        v += p_y0[y0] * s;
    }
    return v;
}

double true_value(const DgpParams& params, const Regime& regime) {
    JointPmf full = true_joint(params);
    return regime_value(oracle_density(full), y0_marginal(full), regime);
}

std::pair<double, Regime> optimal_value(const DgpParams& params, ClassTag cls) {
    JointPmf full = true_joint(params);
    PotentialDensity g = oracle_density(full);
    auto py0 = y0_marginal(full);
    auto [r, v] = value_maximize([&](const Regime& d) { return regime_value(g, py0, d); },
                                 enumerate_class(cls));
    return {v, r};
}

}  // namespace proxidtr
