#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "phasorsec/types.hpp"

namespace phasorsec {

enum class HankelKind { Raw, Unwrapped, Permuted };

struct HankelMatrix {
    Matrix values;        // (m*L) x (n-L+1)
    std::size_t m = 0;
    std::size_t L = 0;
    std::size_t n = 0;
    HankelKind kind = HankelKind::Raw;

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

inline std::size_t default_hankel_rows(std::size_t n) { return n / 2 + 2; }

// Block (c) has entry (i, j) = Y(c, i + j). L defaults to floor(n/2)+2.
// SpecError when L < 2 or fewer than 2 columns would remain.
HankelMatrix build_hankel(const Matrix& Y, std::optional<std::size_t> L = std::nullopt,
                          HankelKind kind = HankelKind::Raw);
HankelMatrix build_hankel(const MeasurementMatrix& Y, std::optional<std::size_t> L = std::nullopt);

// Anti-diagonal averaging per block; inverse of build_hankel for non-permuted kinds.
Matrix average_antidiagonals(const HankelMatrix& H);

struct SvdFactorization {
    Eigen::VectorXd singular_values;  // descending
    Matrix U;                         // thin
    Matrix V;                         // thin
};

// DomainError on non-finite entries.
SvdFactorization svd(const Matrix& M);
Eigen::VectorXd singular_values(const Matrix& M);

// 100 * ||M_r - M||_F / ||M||_F via explicit rank-r reconstruction.
double rank_error(const SvdFactorization& fac, const Matrix& M, std::size_t r);
// Same quantity from the discarded singular values.
double rank_error_from_spectrum(const Eigen::VectorXd& sigma, std::size_t r);

struct RankErrorProfile {
    std::vector<double> errors_pct;  // errors_pct[r-1] = e^r

    std::size_t r_max() const { return errors_pct.size(); }
    double at(std::size_t r) const;  // 1-based
};

// One SVD, r = 1..r_max (default min(R, C), clamped to it).
RankErrorProfile error_profile(const Matrix& M, std::optional<std::size_t> r_max = std::nullopt);
RankErrorProfile profile_from_spectrum(const Eigen::VectorXd& sigma, std::size_t r_max);

// Same non-identity column permutation for every row.
HankelMatrix permute_columns(const HankelMatrix& H, std::uint64_t seed);
// Independent non-identity column permutation inside each channel block.
HankelMatrix permute_block_columns(const HankelMatrix& H, std::uint64_t seed);

namespace serial {
HankelMatrix build_hankel(const Matrix& Y, std::optional<std::size_t> L = std::nullopt,
                          HankelKind kind = HankelKind::Raw);
}

}  // namespace phasorsec
