#pragma once

#include <string>
#include <vector>

#include "cranbf/metrics.hpp"

namespace cranbf {

enum class DesignStatus {
    Feasible,
    Infeasible,          ///< the method found no design meeting every threshold
    NumericalFailure,    ///< solver gave up (iteration cap, lost definiteness, ...)
    Rank1Failure,        ///< no randomized candidate could be scaled to feasibility
    PreconditionFailure  ///< dimensions rule the method out (e.g. K^2 > NL^2)
};

const char* to_string(DesignStatus s);

/// Relative slack allowed when re-checking SINR thresholds on a finished design.
constexpr double kSinrVerifyTol = 1e-6;

struct DesignOutcome {
    DesignStatus status = DesignStatus::Infeasible;
    metrics::BeamformerSet beams;       ///< meaningful only when feasible
    double total_power = 0.0;           ///< W
    std::vector<double> per_user_sinr;
    metrics::PerUserPowers breakdown;
    int iterations = 0;
    double wall_clock_s = 0.0;
    std::vector<double> rank1_ratios;   ///< lambda_2/lambda_1 per SDR solve (worst block)
    std::vector<double> power_trace;    ///< algorithm-specific power per outer iteration
    std::string detail;

    bool feasible() const { return status == DesignStatus::Feasible; }
};

/// Evaluates power, SINRs and the breakdown of `beams` and marks the outcome feasible
/// only if every SINR reaches gamma_k (1 - kSinrVerifyTol).
void finalize_outcome(const netmodel::ChannelKnowledge& kn, const metrics::BeamformerSet& beams,
                      const std::vector<double>& thresholds, DesignOutcome& out);

}  // namespace cranbf
