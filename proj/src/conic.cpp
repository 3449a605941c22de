#include "cranbf/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cranbf::conic {

std::vector<int> ComplexSdp::block_sizes() const
{
    std::vector<int> s;
    for (const auto& c : objective)
        s.push_back(static_cast<int>(c.rows()));
    return s;
}

namespace {

// Assembly round-off is symmetrized away later; anything beyond this is a caller bug.
bool nearly_hermitian(const CMat& a)
{
    if (a.size() == 0)
        return true;
    return hermitian_defect(a) <= 1e-8 * std::max(a.cwiseAbs().maxCoeff(), 1e-300);
}

}  // namespace

void ComplexSdp::validate() const
{
    if (objective.empty())
        throw std::invalid_argument("ComplexSdp: at least one PSD block is required");
    for (const auto& c : objective)
        if (c.rows() == 0 || c.rows() != c.cols())
            throw std::invalid_argument("ComplexSdp: objective blocks must be square and non-empty");
        else if (!nearly_hermitian(c))
            throw std::invalid_argument("ComplexSdp: objective block is not Hermitian");
    if (constraints.empty())
        throw std::invalid_argument("ComplexSdp: at least one constraint is required");
    for (const auto& con : constraints) {
        if (con.blocks.size() != objective.size())
            throw std::invalid_argument("ComplexSdp: constraint has the wrong number of blocks");
        for (std::size_t j = 0; j < objective.size(); ++j) {
            const auto& a = con.blocks[j];
            if (a.size() != 0 && (a.rows() != objective[j].rows() || a.cols() != objective[j].cols()))
                throw std::invalid_argument("ComplexSdp: constraint block size mismatch");
            if (!nearly_hermitian(a))
                throw std::invalid_argument("ComplexSdp: constraint block is not Hermitian");
        }
        if (!std::isfinite(con.rhs))
            throw std::invalid_argument("ComplexSdp: non-finite right-hand side");
    }
}

const char* to_string(SdpStatus s)
{
    switch (s) {
    case SdpStatus::Optimal: return "optimal";
    case SdpStatus::Infeasible: return "infeasible";
    case SdpStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

RMat hermitian_embed(const CMat& h)
{
    if (h.rows() != h.cols())
        throw std::invalid_argument("hermitian_embed: matrix must be square");
    const double scale = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
    if (h.size() && hermitian_defect(h) > 1e-12 * std::max(scale, 1e-300))
        throw std::invalid_argument("hermitian_embed: matrix is not Hermitian");
    const Eigen::Index n = h.rows();
    RMat t(2 * n, 2 * n);
    t.topLeftCorner(n, n) = h.real();
    t.topRightCorner(n, n) = -h.imag();
    t.bottomLeftCorner(n, n) = h.imag();
    t.bottomRightCorner(n, n) = h.real();
    return t;
}

CMat hermitian_unembed(const RMat& t)
{
    if (t.rows() != t.cols() || t.rows() % 2 != 0)
        throw std::invalid_argument("hermitian_unembed: need an even square matrix");
    const Eigen::Index n = t.rows() / 2;
    const RMat re = 0.5 * (t.topLeftCorner(n, n) + t.bottomRightCorner(n, n));
    const RMat im = 0.5 * (t.bottomLeftCorner(n, n) - t.topRightCorner(n, n));
    CMat out(n, n);
    out.real() = re;
    out.imag() = im;
    return hermitian_part(out);
}

// ---------------------------------------------------------------------------
// Interior-point core

namespace {

struct ConeVec {
    std::vector<RMat> s;
    RVec l;
};

double frob_inner(const RMat& a, const RMat& b) { return (a.array() * b.array()).sum(); }

double inner(const ConeVec& a, const ConeVec& b)
{
    double acc = a.l.dot(b.l);
    for (std::size_t j = 0; j < a.s.size(); ++j)
        acc += frob_inner(a.s[j], b.s[j]);
    return acc;
}

double norm(const ConeVec& a) { return std::sqrt(inner(a, a)); }

class Operator {
public:
    explicit Operator(const RealSdp& p) : p_(p), m_(static_cast<int>(p.b.size())) {}

    RVec apply(const ConeVec& x) const
    {
        RVec out = RVec::Zero(m_);
        for (int i = 0; i < m_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < x.s.size(); ++j)
                if (p_.A[i][j].size())
                    acc += frob_inner(p_.A[i][j], x.s[j]);
            out(i) = acc;
        }
        if (x.l.size())
            out += p_.A_lp * x.l;
        return out;
    }

    /// Only the block parts of x are read; a non-square S is treated as X A Z^{-1} products.
    RVec apply_blocks(const std::vector<RMat>& s) const
    {
        RVec out = RVec::Zero(m_);
        for (int i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < s.size(); ++j)
                if (p_.A[i][j].size())
                    out(i) += frob_inner(p_.A[i][j], s[j]);
        return out;
    }

    ConeVec adjoint(const RVec& y) const
    {
        ConeVec out;
        for (const auto& c : p_.C)
            out.s.push_back(RMat::Zero(c.rows(), c.cols()));
        for (int i = 0; i < m_; ++i)
            for (std::size_t j = 0; j < out.s.size(); ++j)
                if (p_.A[i][j].size() && y(i) != 0.0)
                    out.s[j] += y(i) * p_.A[i][j];
        out.l = p_.A_lp.cols() ? RVec(p_.A_lp.transpose() * y) : RVec(0);
        return out;
    }

private:
    const RealSdp& p_;
    int m_;
};

/// Largest alpha with x + alpha dx still in the cone (capped at 1e30).
double max_step(const std::vector<Eigen::LLT<RMat>>& chol, const ConeVec& x, const ConeVec& dx)
{
    double alpha = 1e30;
    for (std::size_t j = 0; j < dx.s.size(); ++j) {
        const auto L = chol[j].matrixL();
        RMat t = L.solve(dx.s[j]);
        t = L.solve(RMat(t.transpose()));
        t = 0.5 * (t + t.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<RMat> es(t, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues()(0);
        if (lmin < 0.0)
            alpha = std::min(alpha, -1.0 / lmin);
    }
    for (Eigen::Index i = 0; i < dx.l.size(); ++i)
        if (dx.l(i) < 0.0)
            alpha = std::min(alpha, -x.l(i) / dx.l(i));
    return alpha;
}

void axpy(ConeVec& y, double a, const ConeVec& x)
{
    for (std::size_t j = 0; j < y.s.size(); ++j)
        y.s[j] += a * x.s[j];
    y.l += a * x.l;
}

}  // namespace

RealSdpResult solve_real_sdp(const RealSdp& p, const SolverOptions& opt)
{
    const int m = static_cast<int>(p.b.size());
    const int nb = static_cast<int>(p.C.size());
    const int nl = static_cast<int>(p.A_lp.cols());
    if (static_cast<int>(p.A.size()) != m || p.A_lp.rows() != (nl ? m : p.A_lp.rows()) || p.c_lp.size() != nl)
        throw std::invalid_argument("solve_real_sdp: inconsistent problem dimensions");

    const Operator op(p);
    ConeVec C{p.C, p.c_lp};

    double nu = nl;
    for (const auto& c : p.C)
        nu += static_cast<double>(c.rows());

    // Starting point in the spirit of SDPT3: large enough multiples of the identity.
    double norm_c = norm(C);
    double max_a = 0.0, xi = 10.0;
    for (int i = 0; i < m; ++i) {
        double a2 = nl ? p.A_lp.row(i).squaredNorm() : 0.0;
        for (int j = 0; j < nb; ++j)
            if (p.A[i][j].size())
                a2 += p.A[i][j].squaredNorm();
        const double ai = std::sqrt(a2);
        max_a = std::max(max_a, ai);
        xi = std::max(xi, std::sqrt(nu) * (1.0 + std::abs(p.b(i))) / (1.0 + ai));
    }
    const double eta = std::max({10.0, std::sqrt(nu), norm_c, max_a});

    ConeVec X, Z;
    for (const auto& c : p.C) {
        X.s.push_back(xi * RMat::Identity(c.rows(), c.cols()));
        Z.s.push_back(eta * RMat::Identity(c.rows(), c.cols()));
    }
    X.l = RVec::Constant(nl, xi);
    Z.l = RVec::Constant(nl, eta);
    RVec y = RVec::Zero(m);

    const double norm_b = p.b.norm();
    RealSdpResult res;
    int stalls = 0;
    double best_measure = std::numeric_limits<double>::infinity();

    auto finish = [&](SdpStatus st, std::string detail) {
        res.status = st;
        res.detail = std::move(detail);
        res.X = X.s;
        res.x_lp = X.l;
        res.y = y;
        res.Z = Z.s;
        res.z_lp = Z.l;
        return res;
    };

    std::vector<Eigen::LLT<RMat>> cx(nb), cz(nb);
    std::vector<RMat> zinv(nb);
    std::vector<std::vector<RMat>> G(m, std::vector<RMat>(nb));

    for (int iter = 0; iter <= opt.max_iterations; ++iter) {
        res.iterations = iter;
        const RVec rp = p.b - op.apply(X);
        ConeVec rd = C;
        {
            const ConeVec aty = op.adjoint(y);
            axpy(rd, -1.0, aty);
            axpy(rd, -1.0, Z);
        }
        const double pobj = inner(C, X);
        const double dobj = p.b.dot(y);
        const double gap = inner(X, Z);
        const double mu = gap / nu;
        res.primal_objective = pobj;
        res.dual_objective = dobj;

        const double relgap = gap / (1.0 + std::abs(pobj) + std::abs(dobj));
        const double pinf = rp.norm() / (1.0 + norm_b);
        const double dinf = norm(rd) / (1.0 + norm_c);
        const double measure = std::max({relgap, pinf, dinf});
        best_measure = std::min(best_measure, measure);
        if (measure < opt.tol)
            return finish(SdpStatus::Optimal, "converged");

        // Farkas certificates: b'y > 0 with A'y + Z ~ 0 proves primal infeasibility.
        if (dobj > 0.0) {
            ConeVec aty_z = op.adjoint(y);
            axpy(aty_z, 1.0, Z);
            if (norm(aty_z) / dobj < opt.infeasibility_tol)
                return finish(SdpStatus::Infeasible, "primal infeasibility certificate");
        }
        if (pobj < 0.0 && op.apply(X).norm() / (-pobj) < opt.infeasibility_tol)
            return finish(SdpStatus::NumericalFailure, "dual infeasible (unbounded objective)");

        if (iter == opt.max_iterations)
            break;

        // Factorizations and the Schur complement.
        bool ok = true;
        for (int j = 0; j < nb && ok; ++j) {
            cx[j].compute(X.s[j]);
            cz[j].compute(Z.s[j]);
            ok = cx[j].info() == Eigen::Success && cz[j].info() == Eigen::Success;
            if (ok)
                zinv[j] = cz[j].solve(RMat::Identity(Z.s[j].rows(), Z.s[j].cols()));
        }
        if (!ok)
            return finish(best_measure < 1e-5 ? SdpStatus::Optimal : SdpStatus::NumericalFailure,
                          "iterate lost definiteness");

        RMat M = RMat::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < nb; ++j)
                G[i][j] = p.A[i][j].size() ? RMat(X.s[j] * p.A[i][j] * zinv[j]) : RMat();
        for (int i = 0; i < m; ++i)
            for (int k = i; k < m; ++k) {
                double acc = 0.0;
                for (int j = 0; j < nb; ++j)
                    if (p.A[i][j].size() && p.A[k][j].size())
                        acc += frob_inner(p.A[i][j], G[k][j]);
                M(i, k) += acc;
            }
        const RVec xz = nl ? RVec(X.l.cwiseQuotient(Z.l)) : RVec(0);
        if (nl)
            M.triangularView<Eigen::Upper>() += (p.A_lp * xz.asDiagonal() * p.A_lp.transpose()).eval();
        M = M.selfadjointView<Eigen::Upper>();

        Eigen::LLT<RMat> cm(M);
        Eigen::LDLT<RMat> cm_fallback;
        const bool use_llt = cm.info() == Eigen::Success;
        if (!use_llt) {
            cm_fallback.compute(M);
            if (cm_fallback.info() != Eigen::Success)
                return finish(best_measure < 1e-5 ? SdpStatus::Optimal : SdpStatus::NumericalFailure,
                              "Schur complement factorization failed");
        }
        auto schur_solve = [&](const RVec& h) -> RVec { return use_llt ? RVec(cm.solve(h)) : RVec(cm_fallback.solve(h)); };

        // X Rd Z^{-1} is shared by predictor and corrector.
        std::vector<RMat> xrdz(nb);
        for (int j = 0; j < nb; ++j)
            xrdz[j] = X.s[j] * rd.s[j] * zinv[j];

        // Solves for the direction given the complementarity target Rc (blocks, lp).
        auto direction = [&](const std::vector<RMat>& rc_zinv, const RVec& rc_l, ConeVec& dX, RVec& dy, ConeVec& dZ) {
            std::vector<RMat> K(nb);
            for (int j = 0; j < nb; ++j)
                K[j] = rc_zinv[j] - X.s[j] - xrdz[j];
            RVec Kl(nl);
            for (int i = 0; i < nl; ++i)
                Kl(i) = (rc_l(i) - X.l(i) * rd.l(i)) / Z.l(i) - X.l(i);
            RVec h = rp - op.apply_blocks(K);
            if (nl)
                h -= p.A_lp * Kl;
            dy = schur_solve(h);
            dZ = rd;
            axpy(dZ, -1.0, op.adjoint(dy));
            dX.s.resize(nb);
            for (int j = 0; j < nb; ++j) {
                RMat d = K[j];
                for (int i = 0; i < m; ++i)
                    if (G[i][j].size() && dy(i) != 0.0)
                        d += dy(i) * G[i][j];
                dX.s[j] = 0.5 * (d + d.transpose());
            }
            dX.l = nl ? RVec(Kl + xz.cwiseProduct(p.A_lp.transpose() * dy)) : RVec(0);
        };

        // Predictor.
        ConeVec dXa, dZa;
        RVec dya;
        {
            std::vector<RMat> zero(nb);
            for (int j = 0; j < nb; ++j)
                zero[j] = RMat::Zero(X.s[j].rows(), X.s[j].cols());
            direction(zero, RVec::Zero(nl), dXa, dya, dZa);
        }
        const double ap_a = std::min(1.0, max_step(cx, X, dXa));
        const double ad_a = std::min(1.0, max_step(cz, Z, dZa));
        ConeVec Xa = X, Za = Z;
        axpy(Xa, ap_a, dXa);
        axpy(Za, ad_a, dZa);
        const double mu_aff = std::max(0.0, inner(Xa, Za) / nu);
        const double expo = std::max(1.0, 3.0 * std::pow(std::min(ap_a, ad_a), 2));
        const double sigma = std::clamp(std::pow(mu_aff / mu, expo), 0.0, 1.0);

        // Corrector.
        std::vector<RMat> rc_zinv(nb);
        for (int j = 0; j < nb; ++j)
            rc_zinv[j] = sigma * mu * zinv[j] - dXa.s[j] * dZa.s[j] * zinv[j];
        RVec rc_l(nl);
        for (int i = 0; i < nl; ++i)
            rc_l(i) = sigma * mu - dXa.l(i) * dZa.l(i);
        ConeVec dX, dZ;
        RVec dy;
        direction(rc_zinv, rc_l, dX, dy, dZ);

        const double tau = std::clamp(0.9 + 0.09 * std::min(ap_a, ad_a), 0.9, 0.99);
        const double ap = std::min(1.0, tau * max_step(cx, X, dX));
        const double ad = std::min(1.0, tau * max_step(cz, Z, dZ));
        if (!std::isfinite(ap) || !std::isfinite(ad) || !dy.allFinite())
            return finish(best_measure < 1e-5 ? SdpStatus::Optimal : SdpStatus::NumericalFailure,
                          "non-finite search direction");
        axpy(X, ap, dX);
        axpy(Z, ad, dZ);
        y += ad * dy;

        if (std::max(ap, ad) < 1e-8) {
            if (++stalls >= 3)
                return finish(best_measure < 1e-5 ? SdpStatus::Optimal : SdpStatus::NumericalFailure,
                              "step length stalled");
        } else {
            stalls = 0;
        }
    }
    return finish(best_measure < 1e-5 ? SdpStatus::Optimal : SdpStatus::NumericalFailure, "iteration limit reached");
}

// ---------------------------------------------------------------------------
// Complex front-end

SdpSolution EmbeddedIpmBackend::solve(const ComplexSdp& problem, const SolverOptions& options) const
{
    problem.validate();
    const int nb = static_cast<int>(problem.objective.size());
    SdpSolution sol;

    // Constraints whose matrices vanish are decided on the spot.
    std::vector<int> active;
    std::vector<double> row_norm;
    for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
        const auto& con = problem.constraints[i];
        double n2 = 0.0;
        for (const auto& a : con.blocks)
            if (a.size())
                n2 += 2.0 * a.squaredNorm();
        if (n2 == 0.0) {
            const bool ok = (con.sense == Sense::GreaterEqual && con.rhs <= 0.0) ||
                            (con.sense == Sense::LessEqual && con.rhs >= 0.0) || (con.sense == Sense::Equal && con.rhs == 0.0);
            if (!ok) {
                sol.status = SdpStatus::Infeasible;
                sol.detail = "constraint with zero matrices cannot be met";
                return sol;
            }
            continue;
        }
        active.push_back(static_cast<int>(i));
        row_norm.push_back(0.5 * std::sqrt(n2));
    }

    RealSdp rp;
    double c_norm = 0.0;
    for (const auto& c : problem.objective)
        c_norm += 2.0 * c.squaredNorm();
    c_norm = 0.5 * std::sqrt(c_norm);
    const double c_scale = c_norm > 0.0 ? c_norm : 1.0;
    for (const auto& c : problem.objective)
        rp.C.push_back(hermitian_embed(hermitian_part(c)) * (0.5 / c_scale));

    const int m = static_cast<int>(active.size());
    int n_ineq = 0;
    for (int i : active)
        n_ineq += problem.constraints[i].sense != Sense::Equal;
    rp.A.assign(m, std::vector<RMat>(nb));
    rp.A_lp = RMat::Zero(m, n_ineq);
    rp.c_lp = RVec::Zero(n_ineq);
    rp.b.resize(m);
    int slack = 0;
    for (int r = 0; r < m; ++r) {
        const auto& con = problem.constraints[active[r]];
        const double s = 1.0 / row_norm[r];
        for (int j = 0; j < nb; ++j)
            if (con.blocks[j].size())
                rp.A[r][j] = hermitian_embed(hermitian_part(con.blocks[j])) * (0.5 * s);
        if (con.sense == Sense::GreaterEqual)
            rp.A_lp(r, slack++) = -1.0;
        else if (con.sense == Sense::LessEqual)
            rp.A_lp(r, slack++) = 1.0;
        rp.b(r) = con.rhs * s;
    }
    const double x_scale = m && rp.b.cwiseAbs().maxCoeff() > 0.0 ? rp.b.cwiseAbs().maxCoeff() : 1.0;
    rp.b /= x_scale;

    if (m == 0) {
        // Only trivially satisfied constraints: X = 0 is optimal when every C_j is PSD.
        for (const auto& c : problem.objective) {
            Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(c), Eigen::EigenvaluesOnly);
            if (es.eigenvalues()(0) < 0.0) {
                sol.detail = "unbounded objective";
                return sol;
            }
            sol.X.push_back(CMat::Zero(c.rows(), c.cols()));
        }
        sol.status = SdpStatus::Optimal;
        sol.objective = problem.objective_offset;
        return sol;
    }

    const RealSdpResult r = solve_real_sdp(rp, options);
    sol.status = r.status;
    sol.iterations = r.iterations;
    sol.detail = r.detail;
    if (r.status != SdpStatus::Optimal)
        return sol;

    sol.objective = problem.objective_offset;
    for (int j = 0; j < nb; ++j) {
        sol.X.push_back(hermitian_unembed(r.X[j]) * x_scale);
        sol.objective += (problem.objective[j] * sol.X.back()).trace().real();
    }
    for (int i : active) {
        const auto& con = problem.constraints[i];
        double lhs = 0.0, mag = 0.0;
        for (int j = 0; j < nb; ++j)
            if (con.blocks[j].size()) {
                lhs += (con.blocks[j] * sol.X[j]).trace().real();
                mag += con.blocks[j].norm() * sol.X[j].norm();
            }
        double v = 0.0;
        if (con.sense != Sense::LessEqual)
            v = std::max(v, con.rhs - lhs);
        if (con.sense != Sense::GreaterEqual)
            v = std::max(v, lhs - con.rhs);
        sol.max_violation = std::max(sol.max_violation, v / std::max({std::abs(con.rhs), mag, 1e-300}));
    }
    return sol;
}

SdpSolution solve_sdp(const ComplexSdp& problem, const SolverOptions& options)
{
    static const EmbeddedIpmBackend backend;
    return backend.solve(problem, options);
}

SdpSolution solve_sdp(const ComplexSdp& problem, const SolverOptions& options, const SdpBackend& backend)
{
    return backend.solve(problem, options);
}

// ---------------------------------------------------------------------------
// Rank-1 recovery

double eig_ratio(const CMat& x)
{
    if (x.rows() <= 1)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(x), Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double l1 = ev(ev.size() - 1);
    if (!(l1 > 0.0))
        return 0.0;
    return std::max(0.0, ev(ev.size() - 2)) / l1;
}

Rank1Extraction rank1_extract(const std::vector<CMat>& x, const ScaleFn& scale_to_feasible, const ObjectiveFn& objective,
                              Rng& rng, int n_candidates)
{
    if (x.empty())
        throw std::invalid_argument("rank1_extract: no blocks");
    if (n_candidates < 1)
        throw std::invalid_argument("rank1_extract: need at least one candidate");

    Rank1Extraction out;
    std::vector<Eigen::SelfAdjointEigenSolver<CMat>> eig;
    bool all_rank1 = true;
    for (const auto& b : x) {
        if (b.rows() != b.cols() || b.rows() == 0)
            throw std::invalid_argument("rank1_extract: blocks must be square and non-empty");
        eig.emplace_back(hermitian_part(b));
        const auto& ev = eig.back().eigenvalues();
        const double l1 = ev(ev.size() - 1);
        if (!(l1 > 0.0))
            return out;  // a zero block carries no direction
        const double ratio = ev.size() > 1 ? std::max(0.0, ev(ev.size() - 2)) / l1 : 0.0;
        out.eig_ratios.push_back(ratio);
        all_rank1 = all_rank1 && ratio <= kRank1Threshold;
    }

    if (all_rank1) {
        std::vector<CVec> v;
        for (const auto& es : eig) {
            const Eigen::Index n = es.eigenvalues().size();
            v.push_back(std::sqrt(es.eigenvalues()(n - 1)) * es.eigenvectors().col(n - 1));
        }
        out.objective = objective(v);
        out.feasible_candidates = 1;
        out.x = std::move(v);
        return out;
    }

    out.randomized = true;
    std::vector<CMat> factor;
    for (const auto& es : eig)
        factor.push_back(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<cplx>().asDiagonal());

    std::normal_distribution<double> nd(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_candidates; ++c) {
        std::vector<CVec> cand;
        for (const auto& f : factor) {
            RVec yv(f.cols());
            for (Eigen::Index i = 0; i < yv.size(); ++i)
                yv(i) = nd(rng);
            cand.push_back(f * yv.cast<cplx>());
        }
        const auto scale = scale_to_feasible(cand);
        if (!scale || !std::isfinite(*scale))
            continue;
        for (auto& v : cand)
            v *= *scale;
        ++out.feasible_candidates;
        const double obj = objective(cand);
        if (obj < best) {
            best = obj;
            out.x = std::move(cand);
            out.objective = obj;
        }
    }
    return out;
}

}  // namespace cranbf::conic
