#include "cranbf/sdr_design.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cranbf/bound.hpp"

namespace cranbf::sdr {

SelectionMatrix::SelectionMatrix(int N, int L) : N_(N), L_(L)
{
    if (N < 1 || L < 1)
        throw std::invalid_argument("SelectionMatrix: N and L must be >= 1");
    row_.reserve(cols());
    col_.reserve(cols());
    for (int n = 0; n < N; ++n)
        for (int j = 0; j < L; ++j)
            for (int i = 0; i < L; ++i) {
                row_.push_back(n * L + i);
                col_.push_back(n * L + j);
            }
}

RMat SelectionMatrix::dense() const
{
    RMat u = RMat::Zero(rows(), cols());
    for (int c = 0; c < cols(); ++c)
        u(vec_index(c), c) = 1.0;
    return u;
}

CMat SelectionMatrix::project_kron(const CMat& a, const CMat& b) const
{
    const int nl = N_ * L_;
    if (a.rows() != nl || a.cols() != nl || b.rows() != nl || b.cols() != nl)
        throw std::invalid_argument("project_kron: operands must be NL x NL");
    // (A^T ⊗ B)(p, q) = A(col_q, col_p) B(row_p, row_q) for vec positions p, q.
    const int d = cols();
    CMat out(d, d);
    for (int q = 0; q < d; ++q)
        for (int p = 0; p < d; ++p)
            out(p, q) = a(col_[q], col_[p]) * b(row_[p], row_[q]);
    return out;
}

CVec SelectionMatrix::to_w0(const CMat& dense_w) const
{
    CVec w0(cols());
    for (int c = 0; c < cols(); ++c)
        w0(c) = dense_w(row_[c], col_[c]);
    return w0;
}

CMat SelectionMatrix::to_dense(const CVec& w0) const
{
    if (w0.size() != cols())
        throw std::invalid_argument("SelectionMatrix: w0 has the wrong length");
    CMat w = CMat::Zero(N_ * L_, N_ * L_);
    for (int c = 0; c < cols(); ++c)
        w(row_[c], col_[c]) = w0(c);
    return w;
}

BeamformerSet SelectionMatrix::to_beams(const CMat& v, const CVec& w0) const
{
    return metrics::make_beams(v, to_dense(w0), N_, L_);
}

CMat kron_t(const CMat& a, const CMat& b) { return kron(CMat(a.transpose()), b); }

namespace {

void check_inputs(const ChannelKnowledge& kn, const std::vector<double>& thresholds)
{
    kn.validate();
    if (static_cast<int>(thresholds.size()) != kn.K())
        throw std::invalid_argument("sdr: need one threshold per user");
    for (double g : thresholds)
        if (!(g > 0.0) || !std::isfinite(g))
            throw std::invalid_argument("sdr: thresholds must be positive and finite");
}

void check_v(const ChannelKnowledge& kn, const CMat& v)
{
    if (v.rows() != kn.M() || v.cols() != kn.K())
        throw std::invalid_argument("sdr: v must be M x K");
}

double quad(const CMat& a, const CVec& x) { return x.dot(a * x).real(); }

/// Smallest c with every ">= rhs" constraint met at c x; rhs must be positive.
std::optional<double> ray_scale(const conic::ComplexSdp& p, const std::vector<CVec>& x)
{
    double c2 = 0.0;
    for (const auto& con : p.constraints) {
        double q = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (con.blocks[j].size())
                q += quad(con.blocks[j], x[j]);
        if (!(q > 0.0))
            return std::nullopt;
        c2 = std::max(c2, con.rhs / q);
    }
    return std::sqrt(c2);
}

double lifted_objective(const conic::ComplexSdp& p, const std::vector<CVec>& x)
{
    double acc = p.objective_offset;
    for (std::size_t j = 0; j < x.size(); ++j)
        acc += quad(p.objective[j], x[j]);
    return acc;
}

/// Solve, extract a rank-1 point and move it onto the boundary of the feasible ray.
struct Lifted {
    DesignStatus status = DesignStatus::Infeasible;
    std::vector<CVec> x;
    double relaxed = 0.0;
    double ratio = 0.0;
    bool randomized = false;
    int iterations = 0;
    std::string detail;
};

Lifted solve_lifted(const conic::ComplexSdp& p, Rng& rng, const SdrOptions& opt)
{
    Lifted out;
    const conic::SdpSolution sol = conic::solve_sdp(p, opt.solver);
    out.iterations = sol.iterations;
    out.detail = sol.detail;
    if (sol.status == conic::SdpStatus::Infeasible) {
        out.status = DesignStatus::Infeasible;
        return out;
    }
    if (sol.status != conic::SdpStatus::Optimal) {
        out.status = DesignStatus::NumericalFailure;
        return out;
    }
    out.relaxed = sol.objective;
    const auto scale = [&p](const std::vector<CVec>& x) { return ray_scale(p, x); };
    const auto obj = [&p](const std::vector<CVec>& x) { return lifted_objective(p, x); };
    const conic::Rank1Extraction ex = conic::rank1_extract(sol.X, scale, obj, rng, opt.n_candidates);
    for (double r : ex.eig_ratios)
        out.ratio = std::max(out.ratio, r);
    out.randomized = ex.randomized;
    if (!ex.x) {
        out.status = DesignStatus::Rank1Failure;
        out.detail = "no candidate could be scaled to feasibility";
        return out;
    }
    out.x = *ex.x;
    // The principal eigenvector inherits the solver's tolerance; snap it onto the ray.
    if (!ex.randomized) {
        const auto c = ray_scale(p, out.x);
        if (!c) {
            out.status = DesignStatus::Rank1Failure;
            out.detail = "principal eigenvector violates a constraint sign";
            return out;
        }
        for (auto& v : out.x)
            v *= *c;
    }
    out.status = DesignStatus::Feasible;
    return out;
}

bool margins_positive(const ChannelKnowledge& kn, const std::vector<double>& thresholds)
{
    return bound::lower_bound(kn, thresholds).feasible;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

P1Terms p1_terms(const ChannelKnowledge& kn, const CMat& v, int k)
{
    check_v(kn, v);
    const auto t = metrics::second_order_terms(kn, &v, nullptr);
    const int nl = kn.NL();
    const CVec g = kn.G_hat.adjoint() * v.col(k);
    const CVec& h = kn.h_hat.col(k);
    P1Terms out;
    out.T = kron_t(g * g.adjoint(), h * h.adjoint());
    for (int l = 0; l < kn.K(); ++l)
        out.F.push_back(kron_t(t.C[l], t.D[k]));
    out.E = kron_t(CMat::Identity(nl, nl), t.D[k]);
    out.J = kron_t(t.C[k], CMat::Identity(nl, nl));
    return out;
}

conic::ComplexSdp assemble_p1(const ChannelKnowledge& kn, const CMat& v, const std::vector<double>& thresholds)
{
    check_inputs(kn, thresholds);
    check_v(kn, v);
    const SelectionMatrix U(kn.N, kn.L);
    const auto t = metrics::second_order_terms(kn, &v, nullptr);
    const int nl = kn.NL();
    const CMat eye = CMat::Identity(nl, nl);

    // Sum_l C_l + sigma_rrh^2 I appears in both the objective and every constraint.
    CMat c_sum = kn.sigma_rrh_sq * eye;
    for (const auto& c : t.C)
        c_sum += c;

    conic::ComplexSdp p;
    p.objective.push_back(hermitian_part(U.project_kron(c_sum, eye)));
    p.objective_offset = v.squaredNorm();
    for (int k = 0; k < kn.K(); ++k) {
        const double gk = thresholds[k];
        const CVec g = kn.G_hat.adjoint() * v.col(k);
        const CVec& h = kn.h_hat.col(k);
        CMat q = (1.0 + gk) * U.project_kron(g * g.adjoint(), h * h.adjoint()) - gk * U.project_kron(c_sum, t.D[k]);
        p.constraints.push_back({{hermitian_part(q)}, conic::Sense::GreaterEqual, gk * kn.sigma_ms_sq});
    }
    return p;
}

P2Terms p2_terms(const ChannelKnowledge& kn, const CMat& dense_w)
{
    const int nl = kn.NL();
    if (dense_w.rows() != nl || dense_w.cols() != nl)
        throw std::invalid_argument("p2_terms: W must be NL x NL");
    const auto t = metrics::second_order_terms(kn, nullptr, &dense_w);
    const RVec s1 = kn.sigma1_diag();
    P2Terms out;
    out.tau0 = t.tau0;
    out.a = kn.sigma_rrh_sq * dense_w.squaredNorm();
    out.b.resize(kn.K());
    const CMat WG = dense_w * kn.G_hat.adjoint();  // NL x M
    const CMat WWh = dense_w * dense_w.adjoint();
    for (int k = 0; k < kn.K(); ++k) {
        const CVec u = WG.adjoint() * kn.h_hat.col(k);
        out.A.push_back(hermitian_part(u * u.adjoint()));
        const CMat dw = t.D[k] * dense_w;
        const double tr_sig = ((dense_w.adjoint() * dw).diagonal().real().array() * s1.array()).sum();
        CMat b = WG.adjoint() * t.D[k] * WG;
        b.diagonal().array() += tr_sig;
        out.B.push_back(hermitian_part(b));
        out.b(k) = kn.sigma_rrh_sq * (t.D[k] * WWh).trace().real() + kn.sigma_ms_sq;
    }
    return out;
}

conic::ComplexSdp assemble_p2(const ChannelKnowledge& kn, const CMat& dense_w, const std::vector<double>& thresholds)
{
    check_inputs(kn, thresholds);
    const P2Terms t = p2_terms(kn, dense_w);
    const int K = kn.K();
    conic::ComplexSdp p;
    p.objective.assign(K, t.tau0);
    p.objective_offset = t.a;
    for (int k = 0; k < K; ++k) {
        const double gk = thresholds[k];
        conic::Constraint con;
        con.sense = conic::Sense::GreaterEqual;
        con.rhs = gk * t.b(k);
        for (int l = 0; l < K; ++l) {
            CMat blk = -gk * t.B[k];
            if (l == k)
                blk += (1.0 + gk) * t.A[k];
            con.blocks.push_back(std::move(blk));
        }
        p.constraints.push_back(std::move(con));
    }
    return p;
}

StepResult solve_access(const ChannelKnowledge& kn, const CMat& v, const std::vector<double>& thresholds, Rng& rng,
                        const SdrOptions& opt)
{
    const conic::ComplexSdp p = assemble_p1(kn, v, thresholds);
    const Lifted lifted = solve_lifted(p, rng, opt);
    StepResult r;
    r.status = lifted.status;
    r.relaxed_power = lifted.relaxed;
    r.eig_ratio = lifted.ratio;
    r.randomized = lifted.randomized;
    r.solver_iterations = lifted.iterations;
    r.detail = lifted.detail;
    if (!r.ok())
        return r;
    r.beams = SelectionMatrix(kn.N, kn.L).to_beams(v, lifted.x[0]);
    r.power = metrics::total_power(kn, r.beams);
    return r;
}

StepResult solve_fronthaul(const ChannelKnowledge& kn, const BeamformerSet& current,
                           const std::vector<double>& thresholds, Rng& rng, const SdrOptions& opt)
{
    const CMat W = current.dense_w();
    const conic::ComplexSdp p = assemble_p2(kn, W, thresholds);
    const Lifted lifted = solve_lifted(p, rng, opt);
    StepResult r;
    r.status = lifted.status;
    r.relaxed_power = lifted.relaxed;
    r.eig_ratio = lifted.ratio;
    r.randomized = lifted.randomized;
    r.solver_iterations = lifted.iterations;
    r.detail = lifted.detail;
    if (!r.ok())
        return r;
    r.beams = current;
    for (int k = 0; k < kn.K(); ++k)
        r.beams.v.col(k) = lifted.x[k];
    r.power = metrics::total_power(kn, r.beams);
    return r;
}

CMat snr_eigen_init(const ChannelKnowledge& kn, double p_cp)
{
    const int K = kn.K(), M = kn.M();
    if (M < K)
        throw std::invalid_argument("snr_eigen_init: need M >= K");
    if (!(p_cp > 0.0))
        throw std::invalid_argument("snr_eigen_init: CP power must be positive");
    const CMat g0 = hermitian_part(kn.G_hat * kn.G_hat.adjoint() / kn.sigma_rrh_sq);
    Eigen::SelfAdjointEigenSolver<CMat> es(g0);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("snr_eigen_init: eigen-decomposition failed");
    CMat v(M, K);
    const double amp = std::sqrt(p_cp / K);
    for (int k = 0; k < K; ++k)
        v.col(k) = amp * es.eigenvectors().col(M - 1 - k);
    return v;
}

InitResult algorithm0(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                      const SdrOptions& opt)
{
    check_inputs(kn, thresholds);
    InitResult out;
    if (opt.margin_precheck && !margins_positive(kn, thresholds)) {
        out.status = DesignStatus::Infeasible;
        out.step.detail = "non-positive feasibility margin";
        return out;
    }
    double p_cp = opt.p_cp0;
    DesignStatus last = DesignStatus::Infeasible;
    for (int t = 0; t < opt.t_max_init; ++t, p_cp *= opt.mu) {
        ++out.attempts;
        out.p_cp = p_cp;
        StepResult s = solve_access(kn, snr_eigen_init(kn, p_cp), thresholds, rng, opt);
        if (s.status != DesignStatus::Infeasible && s.status != DesignStatus::NumericalFailure)
            out.rank1_ratios.push_back(s.eig_ratio);
        if (s.ok()) {
            out.status = DesignStatus::Feasible;
            out.step = std::move(s);
            return out;
        }
        last = s.status;
        out.step = std::move(s);
    }
    // Exhausting the schedule means infeasible unless the solver itself kept failing.
    out.status = last == DesignStatus::Infeasible ? DesignStatus::Infeasible : last;
    return out;
}

DesignOutcome alternating_optimization(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                                       const SdrOptions& opt)
{
    const auto t0 = std::chrono::steady_clock::now();
    DesignOutcome out;
    InitResult init = algorithm0(kn, thresholds, rng, opt);
    out.rank1_ratios = init.rank1_ratios;
    if (init.status != DesignStatus::Feasible) {
        out.status = init.status;
        out.detail = "initialization: " + init.step.detail;
        out.wall_clock_s = seconds_since(t0);
        return out;
    }

    BeamformerSet best = init.step.beams;
    double p_prev = init.step.power;
    out.power_trace.push_back(p_prev);
    int t = 0;
    for (; t < opt.t_max_ao; ++t) {
        bool guard = false;
        StepResult f = solve_fronthaul(kn, best, thresholds, rng, opt);
        if (f.status == DesignStatus::Feasible || f.status == DesignStatus::Rank1Failure)
            out.rank1_ratios.push_back(f.eig_ratio);
        BeamformerSet cur = best;
        if (f.ok() && f.power <= p_prev)
            cur = f.beams;
        else if (!f.ok())
            guard = true;

        StepResult a = solve_access(kn, cur.v, thresholds, rng, opt);
        if (a.status == DesignStatus::Feasible || a.status == DesignStatus::Rank1Failure)
            out.rank1_ratios.push_back(a.eig_ratio);
        if (a.ok() && a.power <= metrics::total_power(kn, cur))
            cur = a.beams;
        else if (!a.ok())
            guard = true;

        const double p = metrics::total_power(kn, cur);
        best = cur;
        out.power_trace.push_back(p);
        if (guard) {
            // A subproblem that was feasible at the current point reported otherwise:
            // keep the best iterate found so far.
            out.detail = "subproblem failure after a feasible start; returning best iterate";
            ++t;
            break;
        }
        const bool converged = std::abs(p - p_prev) < opt.eta * p;
        p_prev = p;
        if (converged) {
            ++t;
            break;
        }
    }
    out.iterations = t;
    finalize_outcome(kn, best, thresholds, out);
    out.wall_clock_s = seconds_since(t0);
    return out;
}

DesignOutcome total_snr_max(const ChannelKnowledge& kn, const std::vector<double>& thresholds, Rng& rng,
                            const SdrOptions& opt)
{
    check_inputs(kn, thresholds);
    const auto t0 = std::chrono::steady_clock::now();
    DesignOutcome out;
    if (opt.margin_precheck && !margins_positive(kn, thresholds)) {
        out.status = DesignStatus::Infeasible;
        out.detail = "non-positive feasibility margin";
        out.wall_clock_s = seconds_since(t0);
        return out;
    }

    std::optional<StepResult> prev, best;
    double p_cp = opt.p_cp0;
    bool any_failure = false;
    int t = 0;
    for (; t < opt.t_max_tsm; ++t, p_cp *= opt.mu) {
        StepResult s = solve_access(kn, snr_eigen_init(kn, p_cp), thresholds, rng, opt);
        if (s.status == DesignStatus::Feasible || s.status == DesignStatus::Rank1Failure)
            out.rank1_ratios.push_back(s.eig_ratio);
        if (s.status == DesignStatus::NumericalFailure)
            any_failure = true;
        const double p = s.ok() ? s.power : 0.0;
        out.power_trace.push_back(p);
        if (s.ok() && (!best || s.power < best->power))
            best = s;
        if (s.ok() && prev && prev->ok() && p > prev->power) {
            best = prev;
            ++t;
            break;
        }
        prev = std::move(s);
    }
    out.iterations = t;
    if (!best) {
        out.status = any_failure ? DesignStatus::NumericalFailure : DesignStatus::Infeasible;
        out.detail = "no CP power in the schedule gave a feasible access design";
        out.wall_clock_s = seconds_since(t0);
        return out;
    }
    finalize_outcome(kn, best->beams, thresholds, out);
    out.wall_clock_s = seconds_since(t0);
    return out;
}

}  // namespace cranbf::sdr
