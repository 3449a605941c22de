#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cranbf/metrics.hpp"
#include "cranbf/netmodel.hpp"
#include "cranbf/outcome.hpp"

namespace cranbf::classic {

using metrics::BeamformerSet;
using netmodel::ChannelKnowledge;

/// Unit-power design (W0, v0) with h_k^H W0 G^H v_l0 = delta[k - l].
struct CoreSolution {
    CMat W0;  ///< dense NL x NL, block-diagonal
    CMat v0;  ///< M x K
    double residual = 0.0;  ///< max |h_k^H W0 G^H v_l0 - delta|
    int restarts = 0;
};

struct CoreResult {
    DesignStatus status = DesignStatus::Infeasible;
    std::optional<CoreSolution> core;
    std::string detail;
};

struct MrcZfOptions {
    int max_restarts = 20;
    int max_iterations = 200;  ///< per restart
    double tol = 1e-8;         ///< max absolute residual
};

/// The fronthaul beams are the matched filters v_k0 = G W0^H h_k, so the ZF conditions
/// become the quadratic system V0^H V0 = I, solved by damped Gauss-Newton with restarts.
CoreResult solve_mrczf_core(const ChannelKnowledge& kn, Rng& rng, const MrcZfOptions& opt = {});

/// Fronthaul beams are the K dominant eigenvectors of G G^H; W0 is the minimum-norm
/// solution of the (linear) ZF conditions.
CoreResult solve_svdzf_core(const ChannelKnowledge& kn, double tol = 1e-8);

/// The K^2 x NL^2 matrix of the SVD-ZF linear system (rows ordered l * K + k).
CMat svdzf_system(const ChannelKnowledge& kn, const CMat& v0);

/// Coefficients of SINR_k and P in the two scalings v = sqrt(a) v0, W = sqrt(b) W0.
struct PowerSplitCoeffs {
    RMat c;    ///< K x 4
    double d5 = 0.0, d6 = 0.0, d7 = 0.0;
    RMat d;    ///< K x 2: a >= d(k,0) + d(k,1) / b
    bool feasible = false;
};

PowerSplitCoeffs power_split_coeffs(const ChannelKnowledge& kn, const CMat& W0, const CMat& v0,
                                    const std::vector<double>& thresholds);

struct PowerSplit {
    bool feasible = false;
    double a = 0.0;
    double b = 0.0;
    double power = 0.0;
    PowerSplitCoeffs coeffs;
};

/// Minimizes a d5 + a b d6 + b d7 subject to a >= max_k (d_k1 + d_k2 / b), b > 0.
PowerSplit power_split(const ChannelKnowledge& kn, const CMat& W0, const CMat& v0,
                       const std::vector<double>& thresholds);

/// The minimization alone, for callers that already have the coefficients.
PowerSplit minimize_split(const PowerSplitCoeffs& coeffs);

DesignOutcome mrc_zf(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                     const MrcZfOptions& opt = {});

DesignOutcome svd_zf(const ChannelKnowledge& kn, const std::vector<double>& thresholds);

}  // namespace cranbf::classic
