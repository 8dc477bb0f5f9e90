#pragma once

#include <span>
#include <vector>

#include "phasorsec/types.hpp"

namespace phasorsec {

struct UnwrapResult {
    std::vector<double> unwrapped_deg;
    std::vector<int> roc;      // roll-over counter, roc[0] = 0
    std::vector<int> n_steps;  // roc[i+1] - roc[i]
};

// argmin_N |theta_next - theta_i + 360 N|, ties toward N = 0.
int step_n(double theta_i, double theta_next);

// Inputs must lie in (-180, 180], otherwise DomainError.
UnwrapResult unwrap_series(std::span<const double> wrapped);

// Row-wise unwrap. Rows run in parallel.
Matrix unwrap_matrix(const MeasurementMatrix& Y);
Matrix unwrap_matrix(const Matrix& Y);

namespace serial {
Matrix unwrap_matrix(const Matrix& Y);
}

}  // namespace phasorsec
