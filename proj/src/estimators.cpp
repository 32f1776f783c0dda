#include "proxidtr/estimators.hpp"

#include <array>
#include <cmath>
#include <numeric>

#include "proxidtr/rng.hpp"

namespace proxidtr {

std::string to_string(Scenario s) {
    switch (s) {
        case Scenario::AllCorrect: return "all-correct";
        case Scenario::M0Correct: return "M0-correct";
        case Scenario::M1Correct: return "M1-correct";
        case Scenario::M2Correct: return "M2-correct";
        case Scenario::AllWrong: return "all-wrong";
    }
    return "?";
}

Scenario scenario_from_string(const std::string& s) {
    for (Scenario x : {Scenario::AllCorrect, Scenario::M0Correct, Scenario::M1Correct, Scenario::M2Correct,
                       Scenario::AllWrong})
        if (to_string(x) == s) return x;
    throw std::invalid_argument("unknown scenario: " + s);
}

std::set<Component> pseudo_components(Scenario s) {
    using C = Component;
    switch (s) {
        case Scenario::AllCorrect: return {};
        case Scenario::M0Correct: return {C::H22, C::H21};
        case Scenario::M1Correct: return {C::H21, C::Q22};
        case Scenario::M2Correct: return {C::Q11, C::Q22};
        case Scenario::AllWrong: return {C::H22, C::H21, C::Q11, C::Q22};
    }
    return {};
}

nlohmann::json to_json(const ValueEstimate& v) {
    nlohmann::json j{{"method", to_string(v.method)}, {"estimate", v.estimate}};
    if (v.variance) j["variance"] = *v.variance;
    if (!v.folds.empty()) j["folds"] = v.folds;
    return j;
}

namespace {

std::size_t obs_cell(const ObservedRow& r) {
    std::size_t c = 0;
    for (int k = 0; k < 9; ++k) c = (c << 1) | r[k];
    return c;
}

ObservedRow cell_row(std::size_t c) {
    ObservedRow r;
    for (int k = 0; k < 9; ++k) r[k] = static_cast<std::uint8_t>((c >> (8 - k)) & 1);
    return r;
}

}  // namespace

JointPmf empirical_pmf(const ObservedData& data, double alpha, const std::vector<char>& mask) {
    if (alpha < 0.0) throw std::invalid_argument("smoothing alpha must be nonnegative");
    std::vector<double> counts(512, alpha);
    double total = 512 * alpha;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        counts[obs_cell(data.rows[i])] += 1.0;
        total += 1.0;
    }
    if (total <= 0.0) throw std::invalid_argument("empirical pmf of an empty selection");
    for (double& c : counts) c /= total;
    return JointPmf(observed_order(), std::move(counts));
}

JointPmf empirical_full_pmf(const Dataset& data, double alpha) {
    if (!data.hidden) throw std::invalid_argument("the oracle needs the hidden confounder columns");
    std::vector<double> counts(2048, alpha);
    double total = 2048 * alpha;
    // full order: Y0 U0 Z1 W1 A1 Y1 U1 Z2 W2 A2 Y2
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& o = data.observed.rows[i];
        const auto& h = data.hidden->rows[i];
        const int v[11] = {o[oY0], h[0], o[oZ1], o[oW1], o[oA1], o[oY1], h[1], o[oZ2], o[oW2], o[oA2], o[oY2]};
        std::size_t c = 0;
        for (int k = 0; k < 11; ++k) c = (c << 1) | static_cast<std::size_t>(v[k]);
        counts[c] += 1.0;
        total += 1.0;
    }
    for (double& c : counts) c /= total;
    return JointPmf(full_order(), std::move(counts));
}

std::vector<int> fold_assignment(const ObservedData& data, int folds) {
    if (folds < 1) throw std::invalid_argument("folds must be at least 1");
    std::vector<std::size_t> perm(data.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(data.seed, 0x464f4c44ull + static_cast<std::uint64_t>(folds)));
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<int> fold(data.size());
    for (std::size_t k = 0; k < perm.size(); ++k) fold[perm[k]] = static_cast<int>(k % folds);
    return fold;
}

FittedBridges fit_bridges(const ObservedData& data, const FitOptions& opts, std::optional<int> exclude_fold) {
    std::vector<char> mask;
    if (exclude_fold) {
        auto fold = fold_assignment(data, opts.folds);
        mask.resize(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) mask[i] = fold[i] != *exclude_fold;
    }
    JointPmf pmf = empirical_pmf(data, opts.laplace_alpha, mask);
    BridgeSet b;
    try {
        b = solve_bridges(pmf, Provenance::SolvedFromSample);
    } catch (const RankError& e) {
        std::string msg = e.what();
        msg.resize(msg.size() - e.role.size() - 3);  // drop the " [role]" suffix
        throw RankError(msg + "; use a larger sample or Laplace smoothing" +
                            (exclude_fold ? " (fold " + std::to_string(*exclude_fold) + ")" : ""),
                        e.role);
    }
    if (!opts.pseudo.empty()) b.overlay(pseudo_bridges(opts.pseudo_seed, opts.pseudo));
    return {std::move(pmf), std::move(b)};
}

namespace {

// J2 = sum_y2 y2 h22(y2, Ybar1, Wbar2, a1, a2)
double J2(const ObservedRow& r, const OutcomeBridge& h, int a1, int a2) {
    return h.h22(r[oY0], r[oY1], 1, r[oW1], r[oW2], a1, a2);
}

// J1 = sum_{y1,y2} y2 h21(Y0, y1, y2, W1, a1, a2) I(d2(Y0, y1, a1) = a2)
double J1(const ObservedRow& r, const OutcomeBridge& h, const Regime& d, int a1, int a2) {
    double s = 0.0;
    for (int y1 = 0; y1 < 2; ++y1)
        if (d.act2(r[oY0], y1, a1) == a2) s += h.h21(r[oY0], y1, 1, r[oW1], a1, a2);
    return s;
}

struct Indicators {
    int d1;   // I(d1(Y0) = a1)
    int i1;   // I(d1(Y0) = A1 = a1)
    int i2;   // I1 and I(d2(Ybar1, A1) = A2 = a2)
    int d2o;  // I(d2(Ybar1, a1) = a2), observed history
};

Indicators indicators(const ObservedRow& r, const Regime& d, int a1, int a2) {
    Indicators x;
    x.d1 = d.act1(r[oY0]) == a1;
    x.i1 = x.d1 && r[oA1] == a1;
    x.d2o = d.act2(r[oY0], r[oY1], a1) == a2;
    x.i2 = x.i1 && x.d2o && r[oA2] == a2;
    return x;
}

}  // namespace

double summand(Method m, const ObservedRow& r, const BridgeSet& b, const Regime& d) {
    const auto& h = b.outcome;
    const auto& q = b.treatment;
    double s = 0.0;
    switch (m) {
        case Method::POR:
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2)
                    if (d.act1(r[oY0]) == a1) s += J1(r, h, d, a1, a2);
            return s;
        case Method::PHA:
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2) {
                    Indicators x = indicators(r, d, a1, a2);
                    if (x.i1 && x.d2o) s += q.q11(r[oY0], a1, r[oZ1]) * J2(r, h, a1, a2);
                }
            return s;
        case Method::PIPW:
            if (d.act1(r[oY0]) == r[oA1] && d.act2(r[oY0], r[oY1], r[oA1]) == r[oA2])
                s = r[oY2] * q.q22(r[oY0], r[oY1], r[oA1], r[oA2], r[oZ1], r[oZ2]);
            return s;
        case Method::PMR:
            for (int a1 = 0; a1 < 2; ++a1)
                for (int a2 = 0; a2 < 2; ++a2) {
                    Indicators x = indicators(r, d, a1, a2);
                    double j1 = J1(r, h, d, a1, a2);
                    double j2 = J2(r, h, a1, a2);
                    if (x.i2) s += q.q22(r[oY0], r[oY1], a1, a2, r[oZ1], r[oZ2]) * (r[oY2] - j2);
                    if (x.i1) s += q.q11(r[oY0], a1, r[oZ1]) * (j2 * x.d2o - j1);
                    if (x.d1) s += j1;
                }
            return s;
        default:
            throw std::invalid_argument(to_string(m) + " has no bridge-based summand");
    }
}

// Telescoped arrangement: I2 q22 Y2 + [I(d1 = a1) - I1 q11] J1 + [I1 q11 I(d2 = a2) - I2 q22] J2.
double pmr_summand_alt(const ObservedRow& r, const BridgeSet& b, const Regime& d) {
    const auto& h = b.outcome;
    const auto& q = b.treatment;
    double s = 0.0;
    for (int a1 = 0; a1 < 2; ++a1)
        for (int a2 = 0; a2 < 2; ++a2) {
            Indicators x = indicators(r, d, a1, a2);
            double Q11 = x.i1 * q.q11(r[oY0], a1, r[oZ1]);
            double Q22 = x.i2 * q.q22(r[oY0], r[oY1], a1, a2, r[oZ1], r[oZ2]);
            s += Q22 * r[oY2] + (x.d1 - Q11) * J1(r, h, d, a1, a2) + (Q11 * x.d2o - Q22) * J2(r, h, a1, a2);
        }
    return s;
}

namespace {

void require_for(Method m, const BridgeSet& b) {
    using C = Component;
    switch (m) {
        case Method::POR: b.require(C::H21); break;
        case Method::PHA: b.require(C::H22); b.require(C::Q11); break;
        case Method::PIPW: b.require(C::Q22); break;
        case Method::PMR:
            for (C c : {C::H22, C::H21, C::Q11, C::Q22}) b.require(c);
            break;
        default: throw std::invalid_argument(to_string(m) + " is not a bridge-based method");
    }
}

template <typename F>
double mean_over(const ObservedData& data, F&& f) {
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    // grouped by cell so the result does not depend on row order
    std::array<std::size_t, 512> count{};
    for (const auto& r : data.rows) ++count[obs_cell(r)];
    double s = 0.0;
    for (std::size_t c = 0; c < 512; ++c)
        if (count[c]) s += static_cast<double>(count[c]) * f(cell_row(c));
    return s / static_cast<double>(data.size());
}

}  // namespace

ValueEstimate v_hat(Method m, const ObservedData& data, const BridgeSet& b, const Regime& d) {
    require_for(m, b);
    ValueEstimate v{m, mean_over(data, [&](const ObservedRow& r) { return summand(m, r, b, d); }), {}, {}};
    if (m == Method::PMR) v.variance = if_variance(data, b, d);
    return v;
}

ValueEstimate v_hat_pmr_alt(const ObservedData& data, const BridgeSet& b, const Regime& d) {
    require_for(Method::PMR, b);
    return {Method::PMR, mean_over(data, [&](const ObservedRow& r) { return pmr_summand_alt(r, b, d); }), {}, {}};
}

double if_variance(const ObservedData& data, const BridgeSet& b, const Regime& d) {
    require_for(Method::PMR, b);
    double v = mean_over(data, [&](const ObservedRow& r) { return summand(Method::PMR, r, b, d); });
    return mean_over(data, [&](const ObservedRow& r) {
        double e = summand(Method::PMR, r, b, d) - v;
        return e * e;
    });
}

double if_population_mean(const JointPmf& pmf_in, const BridgeSet& b, const Regime& d, double value) {
    require_for(Method::PMR, b);
    const JointPmf pmf =
        pmf_in.order() == observed_order() ? pmf_in : marginalize(pmf_in, observed_order().names());
    double s = 0.0;
    for (std::size_t c = 0; c < pmf.cells(); ++c)
        if (pmf[c] > 0.0) s += pmf[c] * (summand(Method::PMR, cell_row(c), b, d) - value);
    return s;
}

ValueEstimate cross_fit(Method m, const ObservedData& data, const FitOptions& opts, const Regime& d) {
    if (opts.folds == 1) {
        auto fit = fit_bridges(data, opts);
        return v_hat(m, data, fit.bridges, d);
    }
    auto fold = fold_assignment(data, opts.folds);
    ValueEstimate out{m, 0.0, {}, {}};
    for (int l = 0; l < opts.folds; ++l) {
        auto fit = fit_bridges(data, opts, l);
        require_for(m, fit.bridges);
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (fold[i] == l) {
                s += summand(m, data.rows[i], fit.bridges, d);
                ++n;
            }
        if (n == 0) throw std::invalid_argument("fold " + std::to_string(l) + " is empty");
        out.folds.push_back(s / static_cast<double>(n));
    }
    out.estimate = std::accumulate(out.folds.begin(), out.folds.end(), 0.0) / static_cast<double>(out.folds.size());
    return out;
}

IdentifiedDensity sra_density(const JointPmf& pmf_in) {
    const JointPmf m = marginalize(pmf_in, {"Y0", "A1", "Y1", "A2", "Y2"});
    auto S = [&](int depth, int bits) {
        double s = 0.0;
        for (std::size_t c = 0; c < 32; ++c)
            if (int(c >> (5 - depth)) == bits) s += m[c];
        return s;
    };
    auto need = [](double den, const std::string& where) {
        if (den <= 0.0) throw PositivityError("SRA g-formula conditions on an empty cell", where);
        return den;
    };
    IdentifiedDensity d{Method::SRA, {}, {}};
    for (int y0 = 0; y0 < 2; ++y0)
        for (int a1 = 0; a1 < 2; ++a1) {
            int h1 = (y0 << 1) | a1;
            double den1 = need(S(2, h1), "Y0=" + std::to_string(y0) + ",A1=" + std::to_string(a1));
            for (int y1 = 0; y1 < 2; ++y1) {
                double py1 = S(3, (h1 << 1) | y1) / den1;
                d.density.g1[PotentialDensity::idx1(a1, y1, y0)] = py1;
                for (int a2 = 0; a2 < 2; ++a2) {
                    int h2 = (((h1 << 1) | y1) << 1) | a2;
                    double den2 = need(S(4, h2), "Y0=" + std::to_string(y0) + ",A1=" + std::to_string(a1) +
                                                     ",Y1=" + std::to_string(y1) + ",A2=" + std::to_string(a2));
                    for (int y2 = 0; y2 < 2; ++y2)
                        d.density.at(a1, a2, y2, y1, y0) = S(5, (h2 << 1) | y2) / den2 * py1;
                }
            }
        }
    return d;
}

ValueEstimate sra_value(const ObservedData& data, const Regime& d) {
    JointPmf pmf = empirical_pmf(data);
    return {Method::SRA, value_from_density(sra_density(pmf), pmf, d), {}, {}};
}

ValueEstimate oracle_value(const Dataset& data, const Regime& d) {
    JointPmf full = empirical_full_pmf(data);
    return {Method::Oracle, regime_value(oracle_density(full), y0_marginal(full), d), {}, {}};
}

ValueEstimate oracle_value(const DgpParams& params, const Regime& d) {
    return {Method::Oracle, true_value(params, d), {}, {}};
}

FittedValue::FittedValue(Method m, const ObservedData& data, const FitOptions& opts) : method_(m) {
    if (opts.folds == 1) {
        auto fit = fit_bridges(data, opts);
        require_for(m, fit.bridges);
        JointPmf eval = opts.laplace_alpha > 0.0 ? empirical_pmf(data) : fit.pmf;
        IdentifiedDensity g = identified_density(m, eval, fit.bridges);
        folds_.push_back({std::move(eval), std::move(g)});
        return;
    }
    auto fold = fold_assignment(data, opts.folds);
    for (int l = 0; l < opts.folds; ++l) {
        auto fit = fit_bridges(data, opts, l);
        require_for(m, fit.bridges);
        std::vector<char> mask(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) mask[i] = fold[i] == l;
        JointPmf eval = empirical_pmf(data, 0.0, mask);
        IdentifiedDensity g = identified_density(m, eval, fit.bridges);
        folds_.push_back({std::move(eval), std::move(g)});
    }
}

FittedValue FittedValue::from_density(IdentifiedDensity g, JointPmf pmf) {
    FittedValue f;
    f.method_ = g.method;
    f.folds_.push_back({std::move(pmf), std::move(g)});
    return f;
}

double FittedValue::value(const Regime& d) const {
    double s = 0.0;
    for (const auto& f : folds_) s += regime_value(f.density.density, f.p_y0, d);
    return s / static_cast<double>(folds_.size());
}

QTables FittedValue::q_tables() const {
    IdentifiedDensity avg = folds_.front().density;
    for (std::size_t l = 1; l < folds_.size(); ++l) {
        for (std::size_t i = 0; i < avg.density.g.size(); ++i) avg.density.g[i] += folds_[l].density.density.g[i];
        for (std::size_t i = 0; i < avg.density.g1.size(); ++i) avg.density.g1[i] += folds_[l].density.density.g1[i];
    }
    const double L = static_cast<double>(folds_.size());
    for (auto& x : avg.density.g) x /= L;
    for (auto& x : avg.density.g1) x /= L;
    return q_functions(avg);
}

FoldFits::FoldFits(const ObservedData& data, int folds, double alpha) {
    FitOptions opts;
    opts.folds = folds;
    opts.laplace_alpha = alpha;
    if (folds == 1) {
        auto fit = fit_bridges(data, opts);
        eval_.push_back(alpha > 0.0 ? empirical_pmf(data) : fit.pmf);
        solved_.push_back(std::move(fit.bridges));
        return;
    }
    auto fold = fold_assignment(data, folds);
    for (int l = 0; l < folds; ++l) {
        auto fit = fit_bridges(data, opts, l);
        std::vector<char> mask(data.size());
        for (std::size_t i = 0; i < data.size(); ++i) mask[i] = fold[i] == l;
        eval_.push_back(empirical_pmf(data, 0.0, mask));
        solved_.push_back(std::move(fit.bridges));
    }
}

FittedValue FoldFits::model(Method m, const std::set<Component>& pseudo, std::uint64_t pseudo_seed) const {
    FittedValue f;
    f.method_ = m;
    BridgeSet fake = pseudo.empty() ? BridgeSet{} : pseudo_bridges(pseudo_seed, pseudo);
    for (std::size_t l = 0; l < eval_.size(); ++l) {
        BridgeSet b = solved_[l];
        b.overlay(fake);
        f.folds_.push_back({eval_[l], identified_density(m, eval_[l], b)});
    }
    return f;
}

}  // namespace proxidtr
