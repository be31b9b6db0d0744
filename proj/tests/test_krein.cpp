#include "akns/charfn.hpp"
#include "akns/forward.hpp"
#include "akns/krein.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace akns;
using Catch::Matchers::WithinAbs;

namespace {

FullKernel random_full(int m, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    FullKernel T = FullKernel::zero(m);
    for (auto& b : T.data) b << g(rng), g(rng), g(rng), g(rng);
    return T;
}

// H from norming data of a smooth potential
MatrixKernel kernel_for(const std::function<QValue(double)>& q, int N, int m) {
    ForwardOptions fo{m, 4};
    SpectralData d(eigenvalues(q, Problem::D1, N, fo), eigenvalues(q, Problem::D2, N, fo), TailPolicy::asymptotic);
    return build_H(build_h(norming_from_two_spectra(d), m));
}

}  // namespace

TEST_CASE("triangular projection is idempotent and self-adjoint in the HS inner product") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        FullKernel X = random_full(12, rng), Y = random_full(12, rng);
        FullKernel PX = project_plus(X).to_full();
        FullKernel PPX = project_plus(PX).to_full();
        double d = 0;
        for (std::size_t k = 0; k < PX.data.size(); ++k) d = std::max(d, (PPX.data[k] - PX.data[k]).norm());
        CHECK(d <= 1e-12);
        double lhs = hs_inner(PX, Y), rhs = hs_inner(X, project_plus(Y).to_full());
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
    }
}

TEST_CASE("zero data: certificate 1, R = 0") {
    auto H = build_H(build_h(NormingData::unperturbed(4), 32));
    auto cert = certify_positivity(H);
    CHECK_THAT(cert.eps, WithinAbs(1.0, 1e-12));
    auto R = solve_krein(H);
    for (const auto& b : R.data) CHECK(b.norm() < 1e-14);
}

TEST_CASE("solver matches a dense solve of the same Nystrom system") {
    auto q = [](double x) { return QValue{0.6 * std::sin(2 * pi * x) + 0.3, 0.4 * std::cos(2 * pi * x)}; };
    const int m = 32;
    MatrixKernel H = kernel_for(q, 8, m);
    auto R = solve_krein(H);
    CHECK(krein_residual(R, H) < 1e-12);
    // independent: unknown rows of R(x_i, .) from the unsymmetrised block system solved by full-pivot LU
    for (int i : {1, 7, 32}) {
        const int n = 2 * (i + 1);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n), b(n, 2);
        for (int j = 0; j <= i; ++j) {
            for (int k = 0; k <= i; ++k) {
                Mat2 Hkj = H(k - j);
                if (k == j && j == 0) Hkj = H.at_zero_plus();
                if (k == j && j == i) Hkj = H.at_zero_plus().transpose();
                double w = (k == 0 || k == i) ? 0.5 / m : 1.0 / m;
                // row-vector equation R_j + H_ij + sum_k w_k R_k H_kj = 0, transposed
                A.block<2, 2>(2 * j, 2 * k) += w * Hkj.transpose();
            }
            b.block<2, 2>(2 * j, 0) = -(j == i ? H.at_zero_plus() : H(i - j)).transpose();
        }
        Eigen::MatrixXd z = A.fullPivLu().solve(b);
        for (int j = 0; j <= i; ++j) CHECK((z.block<2, 2>(2 * j, 0).transpose() - R(i, j)).norm() < 1e-12);
    }
}

TEST_CASE("positivity margin and the quadratic-form bound") {
    auto q = [](double x) { return QValue{0.8 * std::sin(2 * pi * x), 0.5 * std::cos(4 * pi * x)}; };
    const int m = 64;
    MatrixKernel H = kernel_for(q, 10, m);
    auto cert = certify_positivity(H);
    REQUIRE(cert.passed);
    CHECK(cert.eps > 0);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        TriangularKernel Y = TriangularKernel::zero(m);
        for (auto& b : Y.data) b << g(rng), g(rng), g(rng), g(rng);
        auto [form, yy] = krein_quadratic_form(Y, H);
        CHECK(form >= (cert.eps - 1e-6) * yy);
    }
}

TEST_CASE("non-positive kernels are rejected") {
    // h = -2 (constant) gives I + H with negative spectrum
    ScalarKernel h{16, std::vector<cplx>(17, cplx(-2.0))};
    auto cert = certify_positivity(build_H(h));
    CHECK_FALSE(cert.passed);
}

TEST_CASE("reconstruction, GLM and transformation identity on forward data") {
    auto q = [](double x) { return QValue{0.5 * std::sin(2 * pi * x), 0.3 * std::cos(2 * pi * x)}; };
    const int m = 128, N = 16;
    ForwardOptions fo{m, 4};
    SpectralData d(eigenvalues(q, Problem::D1, N, fo), eigenvalues(q, Problem::D2, N, fo), TailPolicy::asymptotic);
    auto nd = norming_from_two_spectra(d);
    MatrixKernel H2 = build_H(build_h(nd, 2 * m));
    MatrixKernel H = coarsen(H2);
    auto R = solve_krein(H);
    auto rec = reconstruct_Q(R);
    auto truth = PotentialAKNS::sample(m, q);
    CHECK(l2_distance(rec.Q, truth) / truth.l2_norm() < 0.01);
    CHECK(rec.off_form < 1e-12);
    CHECK(glm_residual(K_from_R(R, H2), build_F(H2)).max < 1e-4);
    for (double l : {0.7, -3.1, 8.4}) {
        auto s = integrate(q, l, fo);
        auto [u1, u2] = transform_free_solution(R, l);
        for (int i = 0; i <= m; ++i) CHECK(std::hypot(s.u1[i] - u1[i], s.u2[i] - u2[i]) < 1e-3);
    }
}

TEST_CASE("K from R: node values and the chord variant") {
    TriangularKernel R = TriangularKernel::zero(4);
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= i; ++j) R(i, j) << i + j, i - j, 2 * j, 1;
    auto K = K_from_R(R);
    // K(x,0) = (R(x,x/2)(I - sigma3))/2 at x = 2/4: R(2,1)
    Mat2 expect = 0.5 * (R(2, 1) - R(2, 1) * pauli::sigma3());
    CHECK((K(2, 0) - expect).norm() < 1e-15);
    // odd half-index: average of neighbours
    Mat2 half = 0.5 * (R(1, 0) + R(1, 1));
    CHECK((K(1, 0) - 0.5 * (half - half * pauli::sigma3())).norm() < 1e-15);
}
