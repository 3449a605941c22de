#pragma once

#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace cranbf {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Random stream used everywhere a draw is needed. Pass by reference.
using Rng = std::mt19937_64;

/// (X + X^H) / 2
inline CMat hermitian_part(const CMat& x) { return (x + x.adjoint()) * 0.5; }

inline double hermitian_defect(const CMat& x) { return (x - x.adjoint()).cwiseAbs().maxCoeff(); }

/// Dense Kronecker product A ⊗ B.
template <typename DerivedA, typename DerivedB>
auto kron(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Column-major vectorization.
inline CVec vec(const CMat& x) { return Eigen::Map<const CVec>(x.data(), x.size()); }

/// Circularly-symmetric complex Gaussian sample with E|z|^2 = variance.
inline cplx complex_normal(Rng& rng, double variance)
{
    std::normal_distribution<double> nd(0.0, std::sqrt(variance * 0.5));
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

inline CMat complex_normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double variance)
{
    CMat out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            out(i, j) = complex_normal(rng, variance);
    return out;
}

/// SplitMix64 finalizer; used to derive independent sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Squared spectral norm via the Hermitian eigensolve of X^H X (or X X^H, whichever is smaller).
inline double spectral_norm_sq(const CMat& x)
{
    if (x.size() == 0)
        return 0.0;
    const CMat gram = x.rows() <= x.cols() ? CMat(x * x.adjoint()) : CMat(x.adjoint() * x);
    Eigen::SelfAdjointEigenSolver<CMat> es(hermitian_part(gram), Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace cranbf
