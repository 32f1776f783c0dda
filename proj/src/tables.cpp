#include "proxidtr/tables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace proxidtr {

VarOrder::VarOrder(std::vector<std::string> names) : names_(std::move(names)) {
    std::unordered_set<std::string> seen;
    for (const auto& n : names_)
        if (!seen.insert(n).second) throw std::invalid_argument("duplicate variable: " + n);
}

bool VarOrder::contains(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t VarOrder::index(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) throw UnknownVariable(name);
    return static_cast<std::size_t>(it - names_.begin());
}

const VarOrder& full_order() {
    static const VarOrder o{"Y0", "U0", "Z1", "W1", "A1", "Y1", "U1", "Z2", "W2", "A2", "Y2"};
    return o;
}

const VarOrder& observed_order() {
    static const VarOrder o{"Y0", "Z1", "W1", "A1", "Y1", "Z2", "W2", "A2", "Y2"};
    return o;
}

std::string describe(const Assignment& a) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : a) {
        os << (first ? "" : ",") << k << "=" << v;
        first = false;
    }
    return os.str();
}

JointPmf::JointPmf(VarOrder order, std::vector<double> mass)
    : order_(std::move(order)), mass_(std::move(mass)) {
    if (order_.size() > 20) throw std::invalid_argument("too many variables for a dense table");
    if (mass_.size() != (std::size_t{1} << order_.size()))
        throw std::invalid_argument("mass length must be 2^m");
    double total = 0.0;
    for (double m : mass_) {
        if (!(m >= 0.0)) throw std::invalid_argument("negative or NaN probability mass");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("probability mass does not sum to 1");
}

namespace {

// (position, value) pairs to test cells against.
std::vector<std::pair<std::size_t, int>> resolve(const VarOrder& order, const Assignment& a) {
    std::vector<std::pair<std::size_t, int>> out;
    for (const auto& [name, v] : a) {
        if (v != 0 && v != 1) throw std::invalid_argument("non-binary value for " + name);
        out.emplace_back(order.index(name), v);
    }
    return out;
}

std::vector<std::size_t> positions(const VarOrder& order, const std::vector<std::string>& vars) {
    std::vector<std::size_t> out;
    for (const auto& v : vars) out.push_back(order.index(v));
    return out;
}

std::size_t group_index(const JointPmf& pmf, std::size_t cell, const std::vector<std::size_t>& pos) {
    std::size_t g = 0;
    for (std::size_t p : pos) g = (g << 1) | static_cast<std::size_t>(pmf.bit(cell, p));
    return g;
}

bool matches(const JointPmf& pmf, std::size_t cell,
             const std::vector<std::pair<std::size_t, int>>& fixed) {
    for (const auto& [p, v] : fixed)
        if (pmf.bit(cell, p) != v) return false;
    return true;
}

}  // namespace

double JointPmf::at(const Assignment& full) const {
    if (full.size() != order_.size()) throw std::invalid_argument("at() needs a full assignment");
    std::size_t cell = 0;
    for (std::size_t i = 0; i < order_.size(); ++i) {
        auto it = full.find(order_[i]);
        if (it == full.end()) throw std::invalid_argument("missing variable " + order_[i]);
        cell = (cell << 1) | static_cast<std::size_t>(it->second);
    }
    return mass_[cell];
}

double JointPmf::prob(const Assignment& event) const {
    auto fx = resolve(order_, event);
    double s = 0.0;
    for (std::size_t c = 0; c < mass_.size(); ++c)
        if (matches(*this, c, fx)) s += mass_[c];
    return s;
}

JointPmf marginalize(const JointPmf& pmf, const std::vector<std::string>& keep) {
    auto pos = positions(pmf.order(), keep);
    std::vector<double> out(std::size_t{1} << keep.size(), 0.0);
    for (std::size_t c = 0; c < pmf.cells(); ++c) out[group_index(pmf, c, pos)] += pmf[c];
    return JointPmf(VarOrder(keep), std::move(out));
}

JointPmf condition(const JointPmf& pmf, const Assignment& evidence) {
    if (evidence.empty()) return pmf;
    auto fx = resolve(pmf.order(), evidence);
    std::vector<std::string> rest;
    for (const auto& n : pmf.order().names())
        if (!evidence.count(n)) rest.push_back(n);
    auto pos = positions(pmf.order(), rest);
    std::vector<double> out(std::size_t{1} << rest.size(), 0.0);
    double total = 0.0;
    for (std::size_t c = 0; c < pmf.cells(); ++c) {
        if (!matches(pmf, c, fx)) continue;
        out[group_index(pmf, c, pos)] += pmf[c];
        total += pmf[c];
    }
    if (total <= 0.0) throw PositivityError("conditioning on a zero-probability event", describe(evidence));
    for (double& m : out) m /= total;
    return JointPmf(VarOrder(rest), std::move(out));
}

Eigen::MatrixXd joint_block(const JointPmf& pmf, const std::vector<std::string>& target,
                            const std::vector<std::string>& given, const Assignment& fixed) {
    auto tp = positions(pmf.order(), target);
    auto gp = positions(pmf.order(), given);
    auto fx = resolve(pmf.order(), fixed);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(1 << target.size(), 1 << given.size());
    for (std::size_t c = 0; c < pmf.cells(); ++c) {
        if (!matches(pmf, c, fx)) continue;
        J(group_index(pmf, c, tp), group_index(pmf, c, gp)) += pmf[c];
    }
    return J;
}

CondMatrix cond_matrix(const JointPmf& pmf, const std::vector<std::string>& target,
                       const std::vector<std::string>& given, const Assignment& fixed) {
    for (const auto& t : target)
        if (fixed.count(t)) throw std::invalid_argument("target variable also fixed: " + t);
    // Self-conditioning (target == given) is legitimate and gives the identity.
    Eigen::MatrixXd J;
    if (target == given) {
        Eigen::MatrixXd g = joint_block(pmf, given, {}, fixed);
        J = g.col(0).asDiagonal();
    } else {
        J = joint_block(pmf, target, given, fixed);
    }
    for (Eigen::Index c = 0; c < J.cols(); ++c) {
        double s = J.col(c).sum();
        if (s <= 0.0) {
            Assignment where = fixed;
            for (std::size_t i = 0; i < given.size(); ++i)
                where[given[i]] = static_cast<int>((c >> (given.size() - 1 - i)) & 1);
            throw PositivityError("zero-probability conditioning column", describe(where));
        }
        J.col(c) /= s;
    }
    return CondMatrix{target, given, fixed, std::move(J)};
}

Eigen::MatrixXd broadcast_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    auto is_vec_for = [](const Eigen::MatrixXd& v, const Eigen::MatrixXd& M) {
        return (v.rows() == 1 || v.cols() == 1) && v.size() == M.cols();
    };
    const Eigen::MatrixXd* v = nullptr;
    const Eigen::MatrixXd* M = nullptr;
    if (is_vec_for(a, b)) {
        v = &a;
        M = &b;
    } else if (is_vec_for(b, a)) {
        v = &b;
        M = &a;
    } else {
        throw std::invalid_argument("broadcast_product: vector length does not match column count");
    }
    Eigen::MatrixXd T = *M;
    for (Eigen::Index j = 0; j < T.cols(); ++j) T.col(j) *= (*v)(j);
    return T;
}

Eigen::RowVectorXd reciprocal(const Eigen::RowVectorXd& v, const std::string& role) {
    Eigen::RowVectorXd r(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) == 0.0) throw PositivityError("reciprocal of a zero probability", role);
        r(i) = 1.0 / v(i);
    }
    return r;
}

Eigen::MatrixXd invert2or4(const Eigen::MatrixXd& M, const std::string& role) {
    if (M.rows() != M.cols() || (M.rows() != 2 && M.rows() != 4))
        throw std::invalid_argument("invert2or4 expects a 2x2 or 4x4 matrix (" + role + ")");
    double det = M.determinant();
    if (!(std::abs(det) >= kSingularDet)) {
        std::ostringstream msg;
        msg << "singular proxy matrix, |det| = " << std::abs(det);
        throw RankError(msg.str(), role);
    }
    return M.fullPivLu().inverse();
}

nlohmann::json to_json(const JointPmf& pmf) {
    return {{"order", pmf.order().names()}, {"mass", pmf.mass()}};
}

JointPmf pmf_from_json(const nlohmann::json& j) {
    return JointPmf(VarOrder(j.at("order").get<std::vector<std::string>>()),
                    j.at("mass").get<std::vector<double>>());
}

}  // namespace proxidtr
