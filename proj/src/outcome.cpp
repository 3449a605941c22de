#include "cranbf/outcome.hpp"

namespace cranbf {

const char* to_string(DesignStatus s)
{
    switch (s) {
    case DesignStatus::Feasible: return "feasible";
    case DesignStatus::Infeasible: return "infeasible";
    case DesignStatus::NumericalFailure: return "numerical_failure";
    case DesignStatus::Rank1Failure: return "rank1_failure";
    case DesignStatus::PreconditionFailure: return "precondition_failure";
    }
    return "unknown";
}

void finalize_outcome(const netmodel::ChannelKnowledge& kn, const metrics::BeamformerSet& beams,
                      const std::vector<double>& thresholds, DesignOutcome& out)
{
    out.beams = beams;
    out.per_user_sinr = metrics::all_sinrs(kn, beams);
    out.total_power = metrics::total_power(kn, beams);
    out.breakdown = metrics::power_breakdown(kn, beams);
    for (int k = 0; k < kn.K(); ++k)
        if (!(out.per_user_sinr[k] >= thresholds[k] * (1.0 - kSinrVerifyTol))) {
            out.status = DesignStatus::NumericalFailure;
            out.detail = "SINR verification failed for user " + std::to_string(k);
            return;
        }
    out.status = DesignStatus::Feasible;
}

}  // namespace cranbf
