#pragma once

#include "akns/core.hpp"
#include "akns/fourier.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace akns {

// Full 2x2-matrix kernel on the (m+1) x (m+1) nodes x_i = i/m.
struct FullKernel {
    int m = 0;
    std::vector<Mat2> data;

    static FullKernel zero(int m) { return {m, std::vector<Mat2>((m + 1) * (m + 1), Mat2::Zero())}; }
    Mat2& operator()(int i, int j) { return data[i * (m + 1) + j]; }
    const Mat2& operator()(int i, int j) const { return data[i * (m + 1) + j]; }
};

// Samples R(x_i, t_j) for 0 <= j <= i <= m; zero above the diagonal.
struct TriangularKernel {
    int m = 0;
    std::vector<Mat2> data;  // packed rows, row i holds j = 0..i

    static TriangularKernel zero(int m) {
        return {m, std::vector<Mat2>(std::size_t(m + 1) * (m + 2) / 2, Mat2::Zero())};
    }
    static std::size_t index(int i, int j) { return std::size_t(i) * (i + 1) / 2 + j; }
    Mat2& operator()(int i, int j) { return data[index(i, j)]; }
    const Mat2& operator()(int i, int j) const { return data[index(i, j)]; }
    Mat2 at(int i, int j) const { return j > i ? Mat2::Zero() : data[index(i, j)]; }

    FullKernel to_full() const {
        FullKernel F = FullKernel::zero(m);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= i; ++j) F(i, j) = (*this)(i, j);
        return F;
    }
};

inline TriangularKernel project_plus(const FullKernel& T) {
    TriangularKernel P = TriangularKernel::zero(T.m);
    for (int i = 0; i <= T.m; ++i)
        for (int j = 0; j <= i; ++j) P(i, j) = T(i, j);
    return P;
}

// Discrete Hilbert-Schmidt inner product <X,Y> = sum_ij w_i w_j tr(X_ij Y_ij^T), trapezoid weights.
inline double hs_inner(const FullKernel& X, const FullKernel& Y) {
    if (X.m != Y.m) throw std::invalid_argument("kernels on different grids");
    const int m = X.m;
    double s = 0;
    for (int i = 0; i <= m; ++i) {
        double wi = (i == 0 || i == m) ? 0.5 / m : 1.0 / m;
        for (int j = 0; j <= m; ++j) {
            double wj = (j == 0 || j == m) ? 0.5 / m : 1.0 / m;
            s += wi * wj * (X(i, j).array() * Y(i, j).array()).sum();
        }
    }
    return s;
}

struct PositivityCertificate {
    double eps = 0.0;
    int m = 0;
    bool passed = false;
};

inline constexpr double positivity_floor = 1e-10;

// Smallest eigenvalue of I + B with B the 2m x 2m block matrix B_jk = H(x_j - x_k)/m on the
// m periodic nodes x_j = j/m, j = 0..m-1.
inline Eigen::MatrixXd convolution_matrix(const MatrixKernel& H) {
    const int m = H.m;
    Eigen::MatrixXd B(2 * m, 2 * m);
    for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) B.block<2, 2>(2 * j, 2 * k) = H(j - k) / double(m);
    return B;
}

inline PositivityCertificate certify_positivity(const MatrixKernel& H) {
    for (const auto& s : H.samples)
        if (!s.allFinite()) throw Error(ErrorCode::positivity, "kernel H has non-finite samples");
    Eigen::MatrixXd A = convolution_matrix(H);
    A.diagonal().array() += 1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    PositivityCertificate c;
    c.m = H.m;
    c.eps = es.eigenvalues().minCoeff();
    c.passed = c.eps > positivity_floor;
    return c;
}

// <(I + P+_H) Y, Y> and <Y, Y> in the discretisation of certify_positivity
// (uniform weights on the nodes 0..m-1; node m is ignored).
inline std::pair<double, double> krein_quadratic_form(const TriangularKernel& Y, const MatrixKernel& H) {
    if (Y.m != H.m) throw std::invalid_argument("kernels on different grids");
    const int m = H.m;
    const double w = 1.0 / m;
    double yy = 0, yhy = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            Mat2 yj = Y.at(i, j);
            if (j <= i) yy += w * w * yj.squaredNorm();
            Mat2 acc = Mat2::Zero();
            for (int k = 0; k <= i; ++k) acc += w * Y(i, k) * H(k - j);
            yhy += w * w * (acc.array() * yj.array()).sum();
        }
    }
    return {yy + yhy, yy};
}

struct KreinOptions {
    double rcond_floor = 1e-14;
};

namespace detail {
inline double trap_weight(int k, int i, int m) { return (k == 0 || k == i) ? 0.5 / m : 1.0 / m; }
}  // namespace detail

// Nystrom/trapezoid solution of R(x,t) + H(x-t) + int_0^x R(x,s) H(s-t) ds = 0, one x_i at a time.
// For fixed x_i each matrix row of R solves (I + C W) y = b with C_(j,k) = H(x_j - x_k) symmetric;
// with z = W^{1/2} y the system becomes I + W^{1/2} C W^{1/2}, positive definite under the certificate.
//
// H jumps at 0. At interior nodes the principal value (the average) is the right trapezoid value, but at
// the two ends of [0, x] only one side is integrated: s -> 0+ at t = 0 needs H(0+), s -> x- at t = x
// needs H(0-). These two diagonal blocks are applied as a rank-4 correction to the symmetric factorization.
inline TriangularKernel solve_krein(const MatrixKernel& H, const KreinOptions& opt = {}) {
    const int m = H.m;
    TriangularKernel R = TriangularKernel::zero(m);
    R(0, 0) = -H.at_zero_plus();
    const Mat2 jump = H.at_zero_plus() - H(0);  // = Im h(0+) J
    for (int i = 1; i <= m; ++i) {
        const int n = 2 * (i + 1);
        Eigen::VectorXd sw(n);
        for (int k = 0; k <= i; ++k) sw.segment<2>(2 * k).setConstant(std::sqrt(detail::trap_weight(k, i, m)));
        Eigen::MatrixXd A(n, n);
        for (int j = 0; j <= i; ++j)
            for (int k = 0; k <= j; ++k) {
                A.block<2, 2>(2 * j, 2 * k) = H(j - k);
                if (k != j) A.block<2, 2>(2 * k, 2 * j) = H(j - k).transpose();
            }
        A = sw.asDiagonal() * A * sw.asDiagonal();
        A.diagonal().array() += 1.0;

        // right-hand side: rows of -H(x_i - t_j), with H(0+) at t_j = x_i
        Eigen::MatrixXd b(n, 2);
        for (int j = 0; j <= i; ++j) {
            Mat2 Hij = (j == i) ? H.at_zero_plus() : H(i - j);
            b.block<2, 2>(2 * j, 0) = -Hij.transpose();
        }
        b = sw.asDiagonal() * b;

        // one-sided end blocks: (I + S + U E U^T) z = b
        Eigen::MatrixXd U = Eigen::MatrixXd::Zero(n, 4);
        U.block<2, 2>(0, 0).setIdentity();
        U.block<2, 2>(2 * i, 2).setIdentity();
        Eigen::Matrix4d E = Eigen::Matrix4d::Zero();
        E.block<2, 2>(0, 0) = -detail::trap_weight(0, i, m) * jump;
        E.block<2, 2>(2, 2) = detail::trap_weight(i, i, m) * jump;

        Eigen::MatrixXd y, Z;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            y = llt.solve(b);
            Z = llt.solve(U);
        } else {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
            double rc = lu.rcond();
            if (!(rc > opt.rcond_floor))
                throw Error(ErrorCode::solver, "singular Krein system at x = " + std::to_string(double(i) / m) +
                                                   " (reciprocal condition " + std::to_string(rc) + ")",
                            i);
            y = lu.solve(b);
            Z = lu.solve(U);
        }
        // push-through: (A + U E U^T)^{-1} b = y - Z (I + E U^T Z)^{-1} E U^T y
        Eigen::Matrix4d core = Eigen::Matrix4d::Identity() + E * (U.transpose() * Z);
        Eigen::FullPivLU<Eigen::Matrix4d> small(core);
        if (!small.isInvertible())
            throw Error(ErrorCode::solver, "singular end-point correction at x = " + std::to_string(double(i) / m), i);
        Eigen::MatrixXd z = y - Z * small.solve(E * (U.transpose() * y));

        // column r of z holds matrix row r of R(x_i, .)
        for (int j = 0; j <= i; ++j) R(i, j) = (z.block<2, 2>(2 * j, 0) / sw(2 * j)).transpose();
    }
    return R;
}

namespace detail {
// H(s_k - t_j) as seen by the trapezoid rule on [0, x_i]
inline Mat2 krein_block(const MatrixKernel& H, int k, int j, int i) {
    if (k == j && j == 0) return H.at_zero_plus();
    if (k == j && j == i) return H.at_zero_plus().transpose();
    return H(k - j);
}
}  // namespace detail

// Max entry of R(x_i,t_j) + H(x_i - t_j) + sum_k w_k R(x_i,s_k) H(s_k - t_j) over the triangle.
inline double krein_residual(const TriangularKernel& R, const MatrixKernel& H) {
    const int m = H.m;
    double mx = (R(0, 0) + H.at_zero_plus()).cwiseAbs().maxCoeff();
    for (int i = 1; i <= m; ++i)
        for (int j = 0; j <= i; ++j) {
            Mat2 r = R(i, j) + (j == i ? H.at_zero_plus() : H(i - j));
            for (int k = 0; k <= i; ++k) r += detail::trap_weight(k, i, m) * R(i, k) * detail::krein_block(H, k, j, i);
            mx = std::max(mx, r.cwiseAbs().maxCoeff());
        }
    return mx;
}

struct Reconstruction {
    PotentialAKNS Q;
    double off_form = 0.0;  // L2 norm of the part of R(x,0) sigma1 outside span{sigma1, sigma3}
};

// Q(x) = R(x,0) sigma1 (see README: the sign that reproduces the forward spectra).
inline Reconstruction reconstruct_Q(const TriangularKernel& R) {
    const int m = R.m;
    std::vector<double> q1(m + 1), q3(m + 1);
    double off = 0;
    for (int i = 0; i <= m; ++i) {
        Mat2 M = R(i, 0) * pauli::sigma1();
        q1[i] = 0.5 * (M(0, 1) + M(1, 0));
        q3[i] = 0.5 * (M(0, 0) - M(1, 1));
        Mat2 rest = M - q1[i] * pauli::sigma1() - q3[i] * pauli::sigma3();
        double w = (i == 0 || i == m) ? 0.5 : 1.0;
        off += w * rest.squaredNorm() / m;
    }
    return {PotentialAKNS(std::move(q1), std::move(q3)), std::sqrt(off)};
}

// K(x,t) = 1/2 [R(x,(x+t)/2) - R(x,(x-t)/2) sigma3]; half-grid arguments by linear interpolation in t.
inline TriangularKernel K_from_R(const TriangularKernel& R) {
    const int m = R.m;
    const Mat2 s3 = pauli::sigma3();
    auto half = [&](int i, int twice) -> Mat2 {
        if (twice % 2 == 0) return R(i, twice / 2);
        return 0.5 * (R(i, twice / 2) + R(i, twice / 2 + 1));
    };
    TriangularKernel K = TriangularKernel::zero(m);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= i; ++j) K(i, j) = 0.5 * (half(i, i + j) - half(i, i - j) * s3);
    return K;
}

// Same map, but R at the half points t = (l + 1/2)/m is taken from the Nystrom formula of the Krein
// equation instead of the chord; H2 is the kernel sampled on the doubled grid (2m).
inline TriangularKernel K_from_R(const TriangularKernel& R, const MatrixKernel& H2) {
    const int m = R.m;
    if (H2.m != 2 * m) throw std::invalid_argument("K_from_R needs H on the doubled grid");
    const Mat2 s3 = pauli::sigma3();
    std::vector<std::vector<Mat2>> mid(m + 1);
    for (int i = 1; i <= m; ++i) {
        mid[i].resize(i);
        for (int l = 0; l < i; ++l) {
            const int t2 = 2 * l + 1;
            Mat2 r = -H2(2 * i - t2);
            for (int k = 0; k <= i; ++k) r -= detail::trap_weight(k, i, m) * R(i, k) * H2(2 * k - t2);
            mid[i][l] = r;
        }
    }
    auto half = [&](int i, int twice) -> Mat2 { return twice % 2 == 0 ? R(i, twice / 2) : mid[i][twice / 2]; };
    TriangularKernel K = TriangularKernel::zero(m);
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= i; ++j) K(i, j) = 0.5 * (half(i, i + j) - half(i, i - j) * s3);
    return K;
}

struct GLMResidual {
    double max = 0.0;
    int i = 0;
    int j = 0;
};

// max over x_i >= t_j of |K + F + int_0^x K(x,s) F(s,t) ds|, trapezoid in s.
inline GLMResidual glm_residual(const TriangularKernel& K, const GLMKernel& F) {
    if (K.m != F.m) throw std::invalid_argument("K and F on different grids");
    const int m = K.m;
    GLMResidual out;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= i; ++j) {
            Mat2 r = K(i, j) + (j == i ? F.diag_lower[i] : F(i, j));
            if (i > 0)
                for (int k = 0; k <= i; ++k) {
                    // one-sided values at the two ends of [0, x]
                    const Mat2& Fkj = (k == i && j == i) ? F.diag_upper[i] : F(k, j);
                    r += detail::trap_weight(k, i, m) * K(i, k) * Fkj;
                }
            double v = r.cwiseAbs().maxCoeff();
            if (v > out.max) out = {v, i, j};
        }
    return out;
}

// Right-hand side of s(x,l) = s0(x,l) + int_0^x R(x, x-t) s0(x-2t, l) dt on the grid (trapezoid in t).
inline std::pair<std::vector<double>, std::vector<double>> transform_free_solution(const TriangularKernel& R,
                                                                                   double lambda) {
    const int m = R.m;
    std::vector<double> u1(m + 1), u2(m + 1);
    for (int i = 0; i <= m; ++i) {
        const double x = double(i) / m;
        Eigen::Vector2d s(std::sin(lambda * x), std::cos(lambda * x));
        for (int j = 0; j <= i && i > 0; ++j) {
            const double t = double(j) / m;
            Eigen::Vector2d s0(std::sin(lambda * (x - 2 * t)), std::cos(lambda * (x - 2 * t)));
            s += detail::trap_weight(j, i, m) * R(i, i - j) * s0;
        }
        u1[i] = s(0);
        u2[i] = s(1);
    }
    return {u1, u2};
}

}  // namespace akns
