#include "cranbf/netmodel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cranbf::netmodel {

void NetworkConfig::validate() const
{
    if (K < 1 || N < 1 || L < 1)
        throw std::invalid_argument("K, N and L must be >= 1");
    if (M < K)
        throw std::invalid_argument("M must be >= K (got M=" + std::to_string(M) + ", K=" + std::to_string(K) + ")");
    if (!(gamma_ch >= 0.0) || !std::isfinite(gamma_ch))
        throw std::invalid_argument("gamma_ch must be finite and >= 0");
    if (static_cast<int>(gamma_db.size()) != K)
        throw std::invalid_argument("gamma_db must hold K thresholds");
    for (double g : gamma_db)
        if (!std::isfinite(g))
            throw std::invalid_argument("SINR thresholds must be finite");
    if (trials < 1)
        throw std::invalid_argument("trials must be >= 1");
}

std::vector<double> NetworkConfig::thresholds_linear() const
{
    std::vector<double> out;
    out.reserve(gamma_db.size());
    for (double g : gamma_db)
        out.push_back(from_db(g));
    return out;
}

RVec ChannelKnowledge::sigma1_diag() const
{
    RVec d(NL());
    for (int n = 0; n < N; ++n)
        d.segment(n * L, L).setConstant(sigma1_sq(n));
    return d;
}

RVec ChannelKnowledge::sigma2_diag(int k) const
{
    RVec d(NL());
    for (int n = 0; n < N; ++n)
        d.segment(n * L, L).setConstant(sigma2_sq(k, n));
    return d;
}

void ChannelKnowledge::validate() const
{
    if (N < 1 || L < 1)
        throw std::invalid_argument("knowledge: N and L must be >= 1");
    if (G_hat.cols() != NL() || h_hat.rows() != NL())
        throw std::invalid_argument("knowledge: channel dimensions do not match N*L");
    if (sigma1_sq.size() != N || sigma2_sq.rows() != K() || sigma2_sq.cols() != N)
        throw std::invalid_argument("knowledge: variance dimensions do not match");
    if ((sigma1_sq.array() < 0).any() || (sigma2_sq.array() < 0).any() || sigma_rrh_sq < 0 || sigma_ms_sq < 0)
        throw std::invalid_argument("knowledge: variances must be non-negative");
}

namespace {

Point uniform_in_disk(double radius, Rng& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    const double theta = 2.0 * std::numbers::pi * u(rng);
    return {r * std::cos(theta), r * std::sin(theta)};
}

bool distances_ok(const Geometry& g, double dmin)
{
    for (const auto& r : g.rrh_positions)
        if (distance(g.cp_position, r) < dmin)
            return false;
    for (const auto& m : g.ms_positions) {
        if (distance(g.cp_position, m) < dmin)
            return false;
        for (const auto& r : g.rrh_positions)
            if (distance(r, m) < dmin)
                return false;
    }
    return true;
}

}  // namespace

Geometry sample_geometry(const NetworkConfig& config, const ChannelParams& params, Rng& rng)
{
    return sample_geometry(config, params, FixedPositions{}, rng);
}

bool geometry_guards_hold(const Geometry& g, const ChannelParams& params)
{
    return distances_ok(g, params.min_distance_m);
}

Geometry sample_geometry(const NetworkConfig& config, const ChannelParams& params, const FixedPositions& fixed,
                         Rng& rng)
{
    auto check_pinned = [&](const std::vector<Point>& pts, int expected, const char* what) {
        if (pts.empty())
            return;
        if (static_cast<int>(pts.size()) != expected)
            throw std::invalid_argument(std::string("sample_geometry: wrong number of fixed ") + what + " positions");
        for (const auto& p : pts)
            if (std::hypot(p.x, p.y) > params.cell_radius_m)
                throw std::invalid_argument(std::string("sample_geometry: fixed ") + what + " position outside the cell");
    };
    check_pinned(fixed.rrh, config.N, "RRH");
    check_pinned(fixed.ms, config.K, "MS");

    Geometry g;
    g.rrh_positions = fixed.rrh.empty() ? std::vector<Point>(config.N) : fixed.rrh;
    g.ms_positions = fixed.ms.empty() ? std::vector<Point>(config.K) : fixed.ms;
    for (long draw = 0; draw < kMaxGeometryDraws; ++draw) {
        if (fixed.rrh.empty())
            for (auto& p : g.rrh_positions)
                p = uniform_in_disk(params.cell_radius_m, rng);
        if (fixed.ms.empty())
            for (auto& p : g.ms_positions)
                p = uniform_in_disk(params.cell_radius_m, rng);
        if (distances_ok(g, params.min_distance_m))
            return g;
        if (!fixed.rrh.empty() && !fixed.ms.empty())
            break;
    }
    throw std::runtime_error("sample_geometry: no admissible placement after 1e6 draws; "
                             "check cell_radius_m / min_distance_m");
}

double pathloss_fronthaul_db(double d_m)
{
    if (!(d_m > 0.0))
        throw std::invalid_argument("pathloss_fronthaul_db: distance must be positive");
    return 24.6 + 39.1 * std::log10(d_m);
}

double pathloss_access_db(double d_m)
{
    if (!(d_m > 0.0))
        throw std::invalid_argument("pathloss_access_db: distance must be positive");
    return 36.8 + 36.7 * std::log10(d_m);
}

NoisePowers noise_powers(double bandwidth_hz, double nsd_dbm_hz, double nf_rrh_db, double nf_ms_db)
{
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("noise_powers: bandwidth must be positive");
    const double floor_dbm = nsd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
    auto dbm_to_w = [](double dbm) { return from_db(dbm - 30.0); };
    return {dbm_to_w(floor_dbm + nf_rrh_db), dbm_to_w(floor_dbm + nf_ms_db)};
}

NoisePowers noise_powers(const ChannelParams& p)
{
    return noise_powers(p.bandwidth_hz, p.nsd_dbm_hz, p.nf_rrh_db, p.nf_ms_db);
}

double link_gain(double pathloss_db, double tx_gain_dbi, double rx_gain_dbi, double shadowing_db)
{
    return from_db(-pathloss_db + tx_gain_dbi + rx_gain_dbi + shadowing_db);
}

ChannelRealization sample_channels(const NetworkConfig& config, const Geometry& geometry,
                                   const ChannelParams& params, Rng& rng)
{
    const int K = config.K, N = config.N, L = config.L, M = config.M;
    if (static_cast<int>(geometry.rrh_positions.size()) != N || static_cast<int>(geometry.ms_positions.size()) != K)
        throw std::invalid_argument("sample_channels: geometry does not match config");

    std::normal_distribution<double> unit(0.0, 1.0);
    auto shadow_fh = [&](Rng& r) { return params.shadowing_std_db[0] * unit(r); };
    auto shadow_ac = [&](Rng& r) { return params.shadowing_std_db[1] * unit(r); };
    const auto [g_cp, g_rrh, g_ms] = params.antenna_gains_dbi;

    ChannelRealization out;
    out.geometry = geometry;
    out.G.resize(M, N * L);
    out.h.resize(N * L, K);

    // One shadowing draw per link, shared by all antenna pairs of that link.
    for (int n = 0; n < N; ++n) {
        const double d = distance(geometry.cp_position, geometry.rrh_positions[n]);
        const double gain = link_gain(pathloss_fronthaul_db(d), g_cp, g_rrh, shadow_fh(rng));
        out.G.middleCols(n * L, L) = complex_normal_matrix(rng, M, L, gain);
    }
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < N; ++n) {
            const double d = distance(geometry.rrh_positions[n], geometry.ms_positions[k]);
            const double gain = link_gain(pathloss_access_db(d), g_rrh, g_ms, shadow_ac(rng));
            out.h.col(k).segment(n * L, L) = complex_normal_matrix(rng, L, 1, gain);
        }
    }
    return out;
}

ChannelKnowledge apply_estimation_error(const ChannelRealization& truth, int N, int L, double gamma_ch,
                                        const NoisePowers& noise, Rng& rng)
{
    if (!(gamma_ch >= 0.0))
        throw std::invalid_argument("apply_estimation_error: gamma_ch must be >= 0");
    const int M = static_cast<int>(truth.G.rows());
    const int K = static_cast<int>(truth.h.cols());
    if (truth.G.cols() != N * L || truth.h.rows() != N * L)
        throw std::invalid_argument("apply_estimation_error: channel dimensions do not match N*L");

    ChannelKnowledge kn;
    kn.N = N;
    kn.L = L;
    kn.G_hat = truth.G;
    kn.h_hat = truth.h;
    kn.sigma1_sq = RVec::Zero(N);
    kn.sigma2_sq = RMat::Zero(K, N);
    kn.sigma_rrh_sq = noise.sigma_rrh_sq;
    kn.sigma_ms_sq = noise.sigma_ms_sq;

    for (int n = 0; n < N; ++n) {
        auto block = kn.G_hat.middleCols(n * L, L);
        const double var = gamma_ch * truth.G.middleCols(n * L, L).squaredNorm() / (M * L);
        if (var > 0.0)
            block -= complex_normal_matrix(rng, M, L, var);
        kn.sigma1_sq(n) = gamma_ch * block.squaredNorm() / (M * L);
    }
    for (int k = 0; k < K; ++k) {
        for (int n = 0; n < N; ++n) {
            auto seg = kn.h_hat.col(k).segment(n * L, L);
            const double var = gamma_ch * truth.h.col(k).segment(n * L, L).squaredNorm() / L;
            if (var > 0.0)
                seg -= complex_normal_matrix(rng, L, 1, var);
            kn.sigma2_sq(k, n) = gamma_ch * seg.squaredNorm() / L;
        }
    }
    return kn;
}

}  // namespace cranbf::netmodel
