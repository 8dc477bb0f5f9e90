#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "phasorsec/errors.hpp"
#include "phasorsec/lowrank.hpp"

using namespace phasorsec;

namespace {

// Cyclic Jacobi eigenvalues of a symmetric matrix; kept independent of Eigen's solvers.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

std::vector<double> oracle_singular_values(const Matrix& M) {
    std::vector<std::vector<double>> g(static_cast<std::size_t>(M.cols()),
                                       std::vector<double>(static_cast<std::size_t>(M.cols()), 0.0));
    for (Eigen::Index i = 0; i < M.cols(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            double s = 0.0;
            for (Eigen::Index k = 0; k < M.rows(); ++k) s += M(k, i) * M(k, j);
            g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
        }
    auto ev = jacobi_eigenvalues(g);
    for (auto& e : ev) e = std::sqrt(std::max(e, 0.0));
    return ev;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) M(i, j) = n(rng);
    return M;
}

Matrix diag4() {
    Matrix D = Matrix::Zero(4, 4);
    D.diagonal() << 10, 5, 2, 1;
    return D;
}

}  // namespace

TEST_CASE("build_hankel single channel example") {
    Matrix Y(1, 6);
    Y << 1, 2, 3, 4, 5, 6;
    const auto H = build_hankel(Y, 5);
    REQUIRE(H.rows() == 5);
    REQUIRE(H.cols() == 2);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(H.values(i, 0) == static_cast<double>(i + 1));
        CHECK(H.values(i, 1) == static_cast<double>(i + 2));
    }
    CHECK(H.kind == HankelKind::Raw);
}

TEST_CASE("build_hankel shape for m=6, n=100") {
    const auto H = build_hankel(Matrix::Zero(6, 100));
    CHECK(H.L == 52);
    CHECK(H.rows() == 312);
    CHECK(H.cols() == 49);
}

TEST_CASE("build_hankel rejects bad L") {
    const Matrix Y = Matrix::Ones(2, 10);
    CHECK_THROWS_AS(build_hankel(Y, 1), SpecError);
    CHECK_THROWS_AS(build_hankel(Y, 10), SpecError);
    CHECK_THROWS_AS(build_hankel(Y, 11), SpecError);
    CHECK_NOTHROW(build_hankel(Y, 9));
}

TEST_CASE("Hankel structure and lossless recovery") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> mm(1, 6), nn(4, 60);
    for (int t = 0; t < 100; ++t) {
        const Matrix Y = random_matrix(rng, mm(rng), nn(rng));
        const auto H = build_hankel(Y);
        const auto L = static_cast<Eigen::Index>(H.L);
        REQUIRE(H.rows() == H.m * H.L);
        REQUIRE(H.cols() == H.n - H.L + 1);
        for (Eigen::Index c = 0; c < Y.rows(); ++c)
            for (Eigen::Index i = 0; i + 1 < L; ++i)
                for (Eigen::Index j = 1; j < H.values.cols(); ++j)
                    REQUIRE(H.values(c * L + i + 1, j - 1) == H.values(c * L + i, j));
        REQUIRE((average_antidiagonals(H) - Y).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(H.values == serial::build_hankel(Y).values);
    }
}

TEST_CASE("constant matrix gives a rank-1 Hankel") {
    const auto H = build_hankel(Matrix::Constant(3, 20, 7.5));
    const auto s = singular_values(H.values);
    CHECK(s(0) > 0.0);
    CHECK(s(1) < 1e-9 * s(0));
    CHECK(error_profile(H.values, 1).at(1) < 1e-6);
}

TEST_CASE("svd examples") {
    const auto f = svd(diag4());
    REQUIRE(f.singular_values.size() == 4);
    CHECK(f.singular_values(0) == doctest::Approx(10));
    CHECK(f.singular_values(1) == doctest::Approx(5));
    CHECK(f.singular_values(2) == doctest::Approx(2));
    CHECK(f.singular_values(3) == doctest::Approx(1));

    Eigen::VectorXd u(5), v(3);
    u << 1, -2, 0.5, 3, 1;
    v << 2, 0, -1;
    const Matrix R1 = u * v.transpose();
    const auto g = svd(R1);
    CHECK(g.singular_values(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
    CHECK(g.singular_values(1) < 1e-12);
    CHECK(g.singular_values(2) < 1e-12);
}

TEST_CASE("svd rejects non-finite entries") {
    Matrix M = Matrix::Ones(3, 3);
    M(1, 1) = std::nan("");
    CHECK_THROWS_AS(svd(M), DomainError);
    CHECK_THROWS_AS(error_profile(M), DomainError);
}

TEST_CASE("singular values match an independent Jacobi eigensolve of M^T M") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const Matrix M = random_matrix(rng, 8, 8);
        const auto s = svd(M).singular_values;
        const auto o = oracle_singular_values(M);
        for (std::size_t i = 0; i < 8; ++i)
            REQUIRE(s(static_cast<Eigen::Index>(i)) == doctest::Approx(o[i]).epsilon(1e-8));
    }
}

TEST_CASE("full-rank reconstruction") {
    std::mt19937_64 rng(9);
    const Matrix M = random_matrix(rng, 12, 7);
    const auto f = svd(M);
    const Matrix R = f.U * f.singular_values.asDiagonal() * f.V.transpose();
    CHECK((R - M).norm() / M.norm() <= 1e-9);
}

TEST_CASE("rank_error closed form and reconstruction agree") {
    const Matrix D = diag4();
    const auto f = svd(D);
    CHECK(std::abs(rank_error(f, D, 2) - 100.0 * std::sqrt(5.0) / std::sqrt(130.0)) <= 1e-9);
    CHECK(std::abs(rank_error_from_spectrum(f.singular_values, 2) - 19.611613513818403) <= 1e-9);
    CHECK(rank_error(f, D, 4) <= 1e-6);
    CHECK_THROWS_AS(rank_error(f, D, 0), RangeError);
    CHECK_THROWS_AS(rank_error(f, D, 5), RangeError);

    Eigen::VectorXd u(4), v(6);
    u << 1, 2, 3, 4;
    v << 1, -1, 1, -1, 2, 0;
    const Matrix R1 = u * v.transpose();
    CHECK(rank_error(svd(R1), R1, 1) <= 1e-6);
}

TEST_CASE("rank_error of a zero matrix is a domain error") {
    const Matrix Z = Matrix::Zero(3, 3);
    CHECK_THROWS_AS(rank_error(svd(Z), Z, 1), DomainError);
    CHECK_THROWS_AS(error_profile(Z), DomainError);
}

TEST_CASE("error_profile of diag(10,5,2,1)") {
    const auto p = error_profile(diag4());
    REQUIRE(p.r_max() == 4);
    // frozen oracle: 100*sqrt(sum_{i>r} s_i^2 / 130)
    CHECK(p.at(1) == doctest::Approx(48.038446141526140).epsilon(1e-12));
    CHECK(p.at(2) == doctest::Approx(19.611613513818403).epsilon(1e-12));
    CHECK(p.at(3) == doctest::Approx(8.7705801930702921).epsilon(1e-12));
    CHECK(p.at(4) == 0.0);
    CHECK_THROWS_AS(p.at(0), RangeError);
    CHECK(error_profile(diag4(), 2).r_max() == 2);
    CHECK(error_profile(diag4(), 99).r_max() == 4);
}

TEST_CASE("rank-1 profile is all zeros") {
    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(10, 1, 10), v = Eigen::VectorXd::LinSpaced(5, -2, 2);
    const auto p = error_profile(u * v.transpose());
    for (double e : p.errors_pct) CHECK(e < 1e-6);
}

TEST_CASE("error_profile is non-increasing, ends at zero and matches reconstruction") {
    std::mt19937_64 rng(10);
    std::uniform_int_distribution<int> d(2, 12);
    for (int t = 0; t < 100; ++t) {
        const Matrix M = random_matrix(rng, d(rng), d(rng));
        const auto p = error_profile(M);
        const auto f = svd(M);
        for (std::size_t r = 1; r <= p.r_max(); ++r) {
            if (r > 1) REQUIRE(p.at(r) <= p.at(r - 1));
            const double rec = rank_error(f, M, r);
            REQUIRE(std::abs(rec - p.at(r)) <= 1e-6 * std::max(p.at(r), 1e-3));
        }
        REQUIRE(p.at(p.r_max()) <= 1e-6);
    }
}

TEST_CASE("permute_columns") {
    SUBCASE("two columns are swapped") {
        Matrix Y(1, 3);
        Y << 1, 2, 3;
        const auto H = build_hankel(Y, 2);
        const auto P = permute_columns(H, 123);
        CHECK(P.kind == HankelKind::Permuted);
        CHECK(P.values.col(0) == H.values.col(1));
        CHECK(P.values.col(1) == H.values.col(0));
    }
    SUBCASE("multiset of columns, Frobenius norm and determinism") {
        std::mt19937_64 rng(12);
        const auto H = build_hankel(random_matrix(rng, 3, 40));
        const auto P = permute_columns(H, 77);
        CHECK(P.values.norm() == doctest::Approx(H.values.norm()).epsilon(1e-15));
        CHECK(P.values == permute_columns(H, 77).values);
        CHECK(P.values != H.values);
        std::multiset<std::vector<double>> a, b;
        for (Eigen::Index j = 0; j < H.values.cols(); ++j) {
            a.insert(std::vector<double>(H.values.col(j).data(), H.values.col(j).data() + H.values.rows()));
            b.insert(std::vector<double>(P.values.col(j).data(), P.values.col(j).data() + P.values.rows()));
        }
        CHECK(a == b);
    }
    SUBCASE("whole-column permutation leaves the spectrum of a ramp Hankel unchanged") {
        // an orthogonal right factor cannot move singular values
        Matrix Y(2, 40);
        for (Eigen::Index j = 0; j < 40; ++j) {
            Y(0, j) = 0.9 * static_cast<double>(j);
            Y(1, j) = 5.0 + 1.3 * static_cast<double>(j) + 0.01 * static_cast<double>(j * j);
        }
        const auto H = build_hankel(Y);
        const auto s = singular_values(H.values);
        const auto sp = singular_values(permute_columns(H, 3).values);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            REQUIRE(sp(i) == doctest::Approx(s(i)).epsilon(1e-9).scale(s(0)));
    }
}

TEST_CASE("permute_block_columns breaks cross-channel alignment") {
    // two channels carrying the same smooth signal: aligned Hankel is rank-2,
    // independently shuffled blocks are not
    Matrix Y(2, 60);
    for (Eigen::Index j = 0; j < 60; ++j) Y(0, j) = Y(1, j) = std::sin(0.15 * static_cast<double>(j)) + 0.02 * static_cast<double>(j);
    const auto H = build_hankel(Y);
    const auto P = permute_block_columns(H, 4);
    CHECK(P.kind == HankelKind::Permuted);
    CHECK(P.values.norm() == doctest::Approx(H.values.norm()).epsilon(1e-15));
    CHECK(error_profile(P.values, 3).at(3) > 10.0 * error_profile(H.values, 3).at(3) + 1.0);
    CHECK(P.values == permute_block_columns(H, 4).values);
    // every block is a column permutation of its source block
    const auto L = static_cast<Eigen::Index>(H.L);
    for (Eigen::Index c = 0; c < 2; ++c) {
        const Matrix hb = H.values.middleRows(c * L, L), pb = P.values.middleRows(c * L, L);
        CHECK(hb.sum() == doctest::Approx(pb.sum()));
        CHECK(hb != pb);
    }
}
