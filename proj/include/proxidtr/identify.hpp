#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "proxidtr/bridges.hpp"
#include "proxidtr/dgp.hpp"
#include "proxidtr/policy.hpp"

namespace proxidtr {

enum class Method { POR, PHA, PIPW, PMR, SRA, Oracle };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Potential-outcome density recovered from observed data. Under misspecified
// bridges cells can leave [0, 1]; they are kept as computed.
struct IdentifiedDensity {
    Method method;
    PotentialDensity density;
    std::map<Component, Provenance> provenance;

    double at(int a1, int a2, int y2, int y1, int y0) const { return density.at(a1, a2, y2, y1, y0); }
};

IdentifiedDensity density_por(const JointPmf& pmf, const BridgeSet& b);
IdentifiedDensity density_pipw(const JointPmf& pmf, const BridgeSet& b);
// Hybrid split after stage k; k = 0 is POR and k = 2 is PIPW.
IdentifiedDensity density_pha(const JointPmf& pmf, const BridgeSet& b, int k = 1);
IdentifiedDensity density_pmr(const JointPmf& pmf, const BridgeSet& b);
IdentifiedDensity identified_density(Method m, const JointPmf& pmf, const BridgeSet& b);

double value_from_density(const IdentifiedDensity& g, const JointPmf& pmf, const Regime& regime);

QTables q_functions(const IdentifiedDensity& g);

// max |g - h| over all 32 joint cells
double max_deviation(const PotentialDensity& g, const PotentialDensity& h);

nlohmann::json to_json(const IdentifiedDensity& g);

}  // namespace proxidtr
