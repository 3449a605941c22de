#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cranbf/metrics.hpp"
#include "cranbf/netmodel.hpp"

namespace cranbf::bound {

using metrics::BeamformerSet;
using netmodel::ChannelKnowledge;

/// Closed-form total-power lower bound and its per-user ingredients.
struct BoundReport {
    std::vector<double> per_user_bound;  ///< W; NaN for users with delta <= 0
    std::optional<double> total_bound;   ///< present only when every delta > 0
    std::vector<double> delta;           ///< feasibility margins
    std::vector<double> h_tilde;
    double g_tilde = 0.0;
    bool feasible = false;
};

BoundReport lower_bound(const ChannelKnowledge& kn, const std::vector<double>& thresholds);

/// Delta_k at threshold gamma (linear). Positive is necessary for feasibility.
double feasibility_margin(const ChannelKnowledge& kn, int k, double gamma);

/// Threshold at which Delta_k vanishes; +inf when the margin never closes.
double max_threshold(const ChannelKnowledge& kn, int k);

/// One inequality of the chain: holds when lhs >= rhs (up to tolerance).
struct ChainStep {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    /// (lhs - rhs) / max(|lhs|, |rhs|, tiny)
    double relative_margin() const;
};

struct ChainReport {
    int user = 0;
    std::vector<ChainStep> steps;
    double y = 0.0;  ///< per-user power share P_k
    /// First step whose relative margin is below -tol, if any.
    std::optional<std::string> first_failure(double tol = 1e-9) const;
    double worst_margin() const;
};

/// Re-evaluates the bound's inequality chain for user k on an actual design.
/// Requires the design to satisfy SINR_k >= gamma_k (std::invalid_argument otherwise,
/// with a 1e-6 relative slack).
ChainReport audit_chain(const ChannelKnowledge& kn, const BeamformerSet& beams, const std::vector<double>& thresholds,
                        int k);

/// Sum over users of the per-user shares P_k; never exceeds total_power.
double per_user_share_sum(const ChannelKnowledge& kn, const BeamformerSet& beams);

}  // namespace cranbf::bound
