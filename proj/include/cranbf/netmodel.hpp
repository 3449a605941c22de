#pragma once

#include <array>
#include <optional>
#include <vector>

#include "cranbf/linalg.hpp"

namespace cranbf::netmodel {

/// Cluster dimensions and campaign knobs.
struct NetworkConfig {
    int K = 4;  ///< users (single-antenna MSs)
    int N = 4;  ///< RRHs
    int L = 4;  ///< antennas per RRH
    int M = 8;  ///< CP antennas
    std::vector<double> gamma_db = std::vector<double>(4, 5.0);
    double gamma_ch = 0.01;
    std::uint64_t seed = 1;
    int trials = 100;

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;
    std::vector<double> thresholds_linear() const;
};

/// Propagation and radio parameters (defaults follow a 3GPP-style urban macro set).
struct ChannelParams {
    double cell_radius_m = 1000.0;
    double min_distance_m = 50.0;
    double bandwidth_hz = 10e6;
    double nsd_dbm_hz = -174.0;
    double nf_rrh_db = 2.0;
    double nf_ms_db = 10.0;
    std::array<double, 3> antenna_gains_dbi{9.0, 0.0, 0.0};  ///< CP, RRH, MS
    std::array<double, 2> shadowing_std_db{6.0, 4.0};       ///< fronthaul, access
};

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Geometry {
    Point cp_position{};
    std::vector<Point> rrh_positions;
    std::vector<Point> ms_positions;
};

/// True channels in augmented form.
struct ChannelRealization {
    CMat G;  ///< M x NL, blocks G_n of M x L
    CMat h;  ///< NL x K, column k is h_k (blocks h_kn of length L)
    Geometry geometry;
};

/// What the CP knows: estimates plus per-entry error variances.
struct ChannelKnowledge {
    int N = 0;
    int L = 0;
    CMat G_hat;          ///< M x NL
    CMat h_hat;          ///< NL x K
    RVec sigma1_sq;      ///< N
    RMat sigma2_sq;      ///< K x N
    double sigma_rrh_sq = 0.0;
    double sigma_ms_sq = 0.0;

    int M() const { return static_cast<int>(G_hat.rows()); }
    int K() const { return static_cast<int>(h_hat.cols()); }
    int NL() const { return N * L; }

    /// Diagonal of Sigma_1 (length NL).
    RVec sigma1_diag() const;
    /// Diagonal of Sigma_{2,k} (length NL).
    RVec sigma2_diag(int k) const;
    void validate() const;
};

struct NoisePowers {
    double sigma_rrh_sq = 0.0;
    double sigma_ms_sq = 0.0;
};

constexpr long kMaxGeometryDraws = 1'000'000;

/// Uniform placement in the disk with rejection on the minimum-distance guards.
/// Throws std::runtime_error when kMaxGeometryDraws configurations are rejected.
Geometry sample_geometry(const NetworkConfig& config, const ChannelParams& params, Rng& rng);

/// Optional pinned placements; an empty list means "sample uniformly".
struct FixedPositions {
    std::vector<Point> rrh;
    std::vector<Point> ms;
};

/// As above, but pinned points are kept and only the free ones are redrawn.
/// Throws std::invalid_argument when a pinned list has the wrong length or leaves the cell.
Geometry sample_geometry(const NetworkConfig& config, const ChannelParams& params, const FixedPositions& fixed,
                         Rng& rng);

/// Every CP-RRH, CP-MS and RRH-MS distance is at least the minimum distance.
bool geometry_guards_hold(const Geometry& g, const ChannelParams& params);

double pathloss_fronthaul_db(double d_m);
double pathloss_access_db(double d_m);

NoisePowers noise_powers(double bandwidth_hz, double nsd_dbm_hz, double nf_rrh_db, double nf_ms_db);
NoisePowers noise_powers(const ChannelParams& params);

/// Per-entry power gain of one link, given the distance-based path loss, the link's
/// antenna gains and one shadowing draw.
double link_gain(double pathloss_db, double tx_gain_dbi, double rx_gain_dbi, double shadowing_db);

ChannelRealization sample_channels(const NetworkConfig& config, const Geometry& geometry,
                                   const ChannelParams& params, Rng& rng);

/// Draws estimation errors at relative power gamma_ch and returns the designer's view.
ChannelKnowledge apply_estimation_error(const ChannelRealization& truth, int N, int L, double gamma_ch,
                                        const NoisePowers& noise, Rng& rng);

}  // namespace cranbf::netmodel
