#include "phasorsec/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "phasorsec/errors.hpp"

namespace phasorsec {

namespace {

std::size_t resolve_rows(std::size_t n, std::optional<std::size_t> L) {
    const std::size_t rows = L.value_or(default_hankel_rows(n));
    if (rows < 2 || rows > n || n - rows + 1 < 2)
        throw SpecError("Hankel window L=" + std::to_string(rows) + " invalid for n=" +
                        std::to_string(n));
    return rows;
}

void fill_block(const Matrix& Y, Matrix& H, Eigen::Index c, Eigen::Index L, Eigen::Index C) {
    for (Eigen::Index j = 0; j < C; ++j)
        for (Eigen::Index i = 0; i < L; ++i) H(c * L + i, j) = Y(c, i + j);
}

void check_finite(const Matrix& M) {
    if (!M.allFinite()) throw DomainError("matrix has non-finite entries");
}

std::vector<Eigen::Index> draw_permutation(Eigen::Index C, std::mt19937_64& rng) {
    std::vector<Eigen::Index> p(static_cast<std::size_t>(C));
    std::iota(p.begin(), p.end(), Eigen::Index{0});
    if (C < 2) return p;
    bool identity = true;
    while (identity) {
        std::shuffle(p.begin(), p.end(), rng);
        identity = std::is_sorted(p.begin(), p.end());
    }
    return p;
}

}  // namespace

HankelMatrix build_hankel(const Matrix& Y, std::optional<std::size_t> L, HankelKind kind) {
    const auto n = static_cast<std::size_t>(Y.cols());
    const auto rows = static_cast<Eigen::Index>(resolve_rows(n, L));
    const Eigen::Index C = Y.cols() - rows + 1;
    HankelMatrix H;
    H.values.resize(Y.rows() * rows, C);
    H.m = static_cast<std::size_t>(Y.rows());
    H.L = static_cast<std::size_t>(rows);
    H.n = n;
    H.kind = kind;
#pragma omp parallel for schedule(static)
    for (Eigen::Index c = 0; c < Y.rows(); ++c) fill_block(Y, H.values, c, rows, C);
    return H;
}

HankelMatrix build_hankel(const MeasurementMatrix& Y, std::optional<std::size_t> L) {
    return build_hankel(Y.values(), L, HankelKind::Raw);
}

namespace serial {
HankelMatrix build_hankel(const Matrix& Y, std::optional<std::size_t> L, HankelKind kind) {
    const auto n = static_cast<std::size_t>(Y.cols());
    const auto rows = static_cast<Eigen::Index>(resolve_rows(n, L));
    const Eigen::Index C = Y.cols() - rows + 1;
    HankelMatrix H;
    H.values.resize(Y.rows() * rows, C);
    H.m = static_cast<std::size_t>(Y.rows());
    H.L = static_cast<std::size_t>(rows);
    H.n = n;
    H.kind = kind;
    for (Eigen::Index c = 0; c < Y.rows(); ++c) fill_block(Y, H.values, c, rows, C);
    return H;
}
}  // namespace serial

Matrix average_antidiagonals(const HankelMatrix& H) {
    if (H.kind == HankelKind::Permuted)
        throw SpecError("anti-diagonal averaging is undefined for a permuted Hankel matrix");
    const auto L = static_cast<Eigen::Index>(H.L);
    const Eigen::Index C = H.values.cols();
    const auto n = static_cast<Eigen::Index>(H.n);
    Matrix Y = Matrix::Zero(static_cast<Eigen::Index>(H.m), n);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < C; ++j) count(i + j) += 1.0;
    for (Eigen::Index c = 0; c < Y.rows(); ++c) {
        for (Eigen::Index i = 0; i < L; ++i)
            for (Eigen::Index j = 0; j < C; ++j) Y(c, i + j) += H.values(c * L + i, j);
        for (Eigen::Index k = 0; k < n; ++k) Y(c, k) /= count(k);
    }
    return Y;
}

SvdFactorization svd(const Matrix& M) {
    check_finite(M);
    Eigen::BDCSVD<Matrix> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {dec.singularValues(), dec.matrixU(), dec.matrixV()};
}

Eigen::VectorXd singular_values(const Matrix& M) {
    check_finite(M);
    Eigen::BDCSVD<Matrix> dec(M);
    return dec.singularValues();
}

double rank_error(const SvdFactorization& fac, const Matrix& M, std::size_t r) {
    const auto k = static_cast<Eigen::Index>(fac.singular_values.size());
    if (r < 1 || static_cast<Eigen::Index>(r) > k)
        throw RangeError("rank_error: r=" + std::to_string(r) + " outside [1, " +
                         std::to_string(k) + "]");
    const double norm = M.norm();
    if (norm == 0.0) throw DomainError("rank_error: zero matrix");
    const auto ri = static_cast<Eigen::Index>(r);
    const Matrix Mr = fac.U.leftCols(ri) * fac.singular_values.head(ri).asDiagonal() *
                      fac.V.leftCols(ri).transpose();
    return 100.0 * (Mr - M).norm() / norm;
}

double rank_error_from_spectrum(const Eigen::VectorXd& sigma, std::size_t r) {
    const auto k = static_cast<Eigen::Index>(sigma.size());
    if (r < 1 || static_cast<Eigen::Index>(r) > k)
        throw RangeError("rank_error: r=" + std::to_string(r) + " outside [1, " +
                         std::to_string(k) + "]");
    const double total = sigma.squaredNorm();
    if (total == 0.0) throw DomainError("rank_error: zero matrix");
    const double tail = sigma.tail(k - static_cast<Eigen::Index>(r)).squaredNorm();
    return 100.0 * std::sqrt(tail / total);
}

double RankErrorProfile::at(std::size_t r) const {
    if (r < 1 || r > errors_pct.size())
        throw RangeError("profile rank " + std::to_string(r) + " outside [1, " +
                         std::to_string(errors_pct.size()) + "]");
    return errors_pct[r - 1];
}

RankErrorProfile profile_from_spectrum(const Eigen::VectorXd& sigma, std::size_t r_max) {
    const auto k = static_cast<std::size_t>(sigma.size());
    r_max = std::min(r_max, k);
    const double total = sigma.squaredNorm();
    if (total == 0.0) throw DomainError("error profile of a zero matrix");
    RankErrorProfile p;
    p.errors_pct.resize(r_max);
    // tail sums from the small end keep the values monotone
    double tail = 0.0;
    std::vector<double> tails(k + 1, 0.0);
    for (std::size_t i = k; i-- > 0;) {
        tails[i] = tail;
        tail += sigma(static_cast<Eigen::Index>(i)) * sigma(static_cast<Eigen::Index>(i));
    }
    for (std::size_t r = 1; r <= r_max; ++r)
        p.errors_pct[r - 1] = 100.0 * std::sqrt(tails[r - 1] / total);
    return p;
}

RankErrorProfile error_profile(const Matrix& M, std::optional<std::size_t> r_max) {
    const Eigen::VectorXd s = singular_values(M);
    return profile_from_spectrum(s, r_max.value_or(static_cast<std::size_t>(s.size())));
}

HankelMatrix permute_columns(const HankelMatrix& H, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto p = draw_permutation(H.values.cols(), rng);
    HankelMatrix out = H;
    out.kind = HankelKind::Permuted;
    for (std::size_t j = 0; j < p.size(); ++j)
        out.values.col(static_cast<Eigen::Index>(j)) = H.values.col(p[j]);
    return out;
}

HankelMatrix permute_block_columns(const HankelMatrix& H, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    HankelMatrix out = H;
    out.kind = HankelKind::Permuted;
    const auto L = static_cast<Eigen::Index>(H.L);
    for (std::size_t c = 0; c < H.m; ++c) {
        const auto p = draw_permutation(H.values.cols(), rng);
        const auto r0 = static_cast<Eigen::Index>(c) * L;
        for (std::size_t j = 0; j < p.size(); ++j)
            out.values.block(r0, static_cast<Eigen::Index>(j), L, 1) =
                H.values.block(r0, p[j], L, 1);
    }
    return out;
}

}  // namespace phasorsec
