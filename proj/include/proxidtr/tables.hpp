#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "proxidtr/errors.hpp"

namespace proxidtr {

using Assignment = std::map<std::string, int>;

// Ordered list of binary variable names.
class VarOrder {
public:
    VarOrder() = default;
    VarOrder(std::vector<std::string> names);
    VarOrder(std::initializer_list<std::string> names)
        : VarOrder(std::vector<std::string>(names)) {}

    std::size_t size() const { return names_.size(); }
    const std::string& operator[](std::size_t i) const { return names_[i]; }
    const std::vector<std::string>& names() const { return names_; }
    bool contains(const std::string& name) const;
    std::size_t index(const std::string& name) const;  // throws UnknownVariable

    bool operator==(const VarOrder&) const = default;

private:
    std::vector<std::string> names_;
};

// Canonical order of the full two-stage law, hidden confounders included.
const VarOrder& full_order();
// Observed block only.
const VarOrder& observed_order();

std::string describe(const Assignment& a);

// Dense table over 2^m binary cells. Cell index is row-major with the last
// variable varying fastest.
class JointPmf {
public:
    JointPmf() = default;
    JointPmf(VarOrder order, std::vector<double> mass);

    const VarOrder& order() const { return order_; }
    const std::vector<double>& mass() const { return mass_; }
    std::size_t cells() const { return mass_.size(); }

    int bit(std::size_t cell, std::size_t var) const {
        return static_cast<int>((cell >> (order_.size() - 1 - var)) & 1u);
    }
    double operator[](std::size_t cell) const { return mass_[cell]; }
    double at(const Assignment& full) const;
    double prob(const Assignment& event) const;

private:
    VarOrder order_;
    std::vector<double> mass_;
};

JointPmf marginalize(const JointPmf& pmf, const std::vector<std::string>& keep);
JointPmf condition(const JointPmf& pmf, const Assignment& evidence);

// entries(r, c) = P(target = r | given = c, fixed). Groups are indexed with the
// last listed variable fastest.
struct CondMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> cols;
    Assignment fixed;
    Eigen::MatrixXd entries;
};

CondMatrix cond_matrix(const JointPmf& pmf, const std::vector<std::string>& target,
                       const std::vector<std::string>& given, const Assignment& fixed = {});

// Joint (not conditional) mass P(target = r, given = c, fixed) laid out like
// cond_matrix; used for the f(w, y | z) style blocks.
Eigen::MatrixXd joint_block(const JointPmf& pmf, const std::vector<std::string>& target,
                            const std::vector<std::string>& given, const Assignment& fixed = {});

// T(i, j) = M(i, j) * v(j). Either argument may be the row vector; the
// one with a single row whose length matches the other's column count wins.
Eigen::MatrixXd broadcast_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

Eigen::RowVectorXd reciprocal(const Eigen::RowVectorXd& v, const std::string& role);

inline constexpr double kSingularDet = 1e-12;
Eigen::MatrixXd invert2or4(const Eigen::MatrixXd& M, const std::string& role = "matrix");

nlohmann::json to_json(const JointPmf& pmf);
JointPmf pmf_from_json(const nlohmann::json& j);

}  // namespace proxidtr
