#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cranbf/linalg.hpp"

namespace cranbf::conic {

enum class Sense { GreaterEqual, LessEqual, Equal };

/// sum_j Re tr(blocks[j] X_j)  (sense)  rhs
struct Constraint {
    std::vector<CMat> blocks;
    Sense sense = Sense::GreaterEqual;
    double rhs = 0.0;
};

/// minimize sum_j Re tr(C_j X_j) + offset over Hermitian PSD blocks X_j.
/// A single-block problem is the common case; the fronthaul subproblem uses K blocks.
struct ComplexSdp {
    std::vector<CMat> objective;
    double objective_offset = 0.0;
    std::vector<Constraint> constraints;

    std::vector<int> block_sizes() const;
    /// Throws std::invalid_argument on inconsistent shapes or an empty constraint list.
    void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(SdpStatus s);

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalFailure;
    std::vector<CMat> X;          ///< one Hermitian PSD block per objective block (when optimal)
    double objective = 0.0;       ///< includes objective_offset
    int iterations = 0;
    double max_violation = 0.0;   ///< worst relative constraint violation of X
    std::string detail;
};

struct SolverOptions {
    double tol = 1e-7;                ///< relative gap / residual tolerance
    int max_iterations = 200;
    double infeasibility_tol = 1e-8;  ///< certificate residual tolerance
};

/// [[Re H, -Im H], [Im H, Re H]]. Rejects H whose Hermitian defect exceeds 1e-12 (relative).
RMat hermitian_embed(const CMat& h);

/// Inverse of hermitian_embed; averages the two copies so any real symmetric input
/// maps to the nearest structured matrix.
CMat hermitian_unembed(const RMat& t);

// ---------------------------------------------------------------------------
// Real standard-form problem handled by the interior-point core:
//   min  sum_j <C_j, X_j> + c_lp' x
//   s.t. sum_j <A_ij, X_j> + a_i' x = b_i,  X_j PSD, x >= 0

struct RealSdp {
    std::vector<RMat> C;
    RVec c_lp;
    std::vector<std::vector<RMat>> A;  ///< A[i][j]; an empty matrix means zero
    RMat A_lp;                         ///< m x n_lp
    RVec b;
};

struct RealSdpResult {
    SdpStatus status = SdpStatus::NumericalFailure;
    std::vector<RMat> X;
    RVec x_lp;
    RVec y;
    std::vector<RMat> Z;
    RVec z_lp;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    int iterations = 0;
    std::string detail;
};

/// Infeasible-start primal-dual path following (HKM direction, Mehrotra corrector).
RealSdpResult solve_real_sdp(const RealSdp& problem, const SolverOptions& options = {});

/// Pluggable back-end behind solve_sdp.
class SdpBackend {
public:
    virtual ~SdpBackend() = default;
    virtual SdpSolution solve(const ComplexSdp& problem, const SolverOptions& options) const = 0;
};

/// Reference back-end: real embedding, row equilibration, then solve_real_sdp.
class EmbeddedIpmBackend final : public SdpBackend {
public:
    SdpSolution solve(const ComplexSdp& problem, const SolverOptions& options) const override;
};

SdpSolution solve_sdp(const ComplexSdp& problem, const SolverOptions& options = {});
SdpSolution solve_sdp(const ComplexSdp& problem, const SolverOptions& options, const SdpBackend& backend);

// ---------------------------------------------------------------------------
// Rank-1 recovery

/// lambda_2 / lambda_1 of a PSD matrix (0 for 1x1 or rank-0 input).
double eig_ratio(const CMat& x);

constexpr double kRank1Threshold = 1e-6;

/// Smallest factor c >= 0 with every constraint satisfied at c * x, or nullopt
/// when no scaling works. Candidates are vectors per PSD block.
using ScaleFn = std::function<std::optional<double>(const std::vector<CVec>&)>;
using ObjectiveFn = std::function<double(const std::vector<CVec>&)>;

struct Rank1Extraction {
    std::optional<std::vector<CVec>> x;  ///< one vector per block; empty on failure
    std::vector<double> eig_ratios;      ///< per block
    bool randomized = false;
    double objective = 0.0;
    int feasible_candidates = 0;
};

/// Principal eigenvector when every block is numerically rank-1, otherwise Gaussian
/// randomization x = E Lambda^{1/2} y (y real standard normal) with each candidate
/// scaled onto the feasible set; the lowest-objective candidate wins.
Rank1Extraction rank1_extract(const std::vector<CMat>& x, const ScaleFn& scale_to_feasible,
                              const ObjectiveFn& objective, Rng& rng, int n_candidates = 100);

}  // namespace cranbf::conic
