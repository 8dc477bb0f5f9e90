#include "phasorsec/unwrap.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "phasorsec/errors.hpp"

namespace phasorsec {

int step_n(double theta_i, double theta_next) {
    const double d = theta_next - theta_i;
    const double a = std::abs(d);
    if (a <= 180.0) return 0;
    // smallest k with |d| - 360k <= 180; an exact half-turn stays on the lower k
    const int k = static_cast<int>(std::ceil((a - 180.0) / 360.0));
    return d > 0 ? -k : k;
}

namespace {

void check_wrapped(double x, std::size_t i) {
    if (!std::isfinite(x) || x <= -180.0 || x > 180.0)
        throw DomainError("unwrap: sample " + std::to_string(i) + " outside (-180, 180]");
}

void unwrap_row(const Matrix& Y, Matrix& out, Eigen::Index row) {
    const Eigen::Index n = Y.cols();
    int roc = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = Y(row, j);
        check_wrapped(x, static_cast<std::size_t>(j));
        if (j > 0) roc += step_n(Y(row, j - 1), x);
        out(row, j) = x + 360.0 * roc;
    }
}

}  // namespace

UnwrapResult unwrap_series(std::span<const double> wrapped) {
    UnwrapResult r;
    const std::size_t n = wrapped.size();
    r.unwrapped_deg.resize(n);
    r.roc.resize(n);
    r.n_steps.resize(n > 0 ? n - 1 : 0);
    for (std::size_t i = 0; i < n; ++i) check_wrapped(wrapped[i], i);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            r.n_steps[i - 1] = step_n(wrapped[i - 1], wrapped[i]);
            r.roc[i] = r.roc[i - 1] + r.n_steps[i - 1];
        }
        r.unwrapped_deg[i] = wrapped[i] + 360.0 * r.roc[i];
    }
    return r;
}

Matrix unwrap_matrix(const MeasurementMatrix& Y) { return unwrap_matrix(Y.values()); }

Matrix unwrap_matrix(const Matrix& Y) {
    Matrix out(Y.rows(), Y.cols());
    const Eigen::Index m = Y.rows();
    // exceptions may not cross the parallel region
    // report the lowest failing row so the message matches the serial path
    std::string failure;
    Eigen::Index failed_row = m;
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < m; ++i) {
        try {
            unwrap_row(Y, out, i);
        } catch (const DomainError& e) {
#pragma omp critical(phasorsec_unwrap_err)
            if (i < failed_row) {
                failed_row = i;
                failure = e.what();
            }
        }
    }
    if (failed_row < m) throw DomainError(failure);
    return out;
}

namespace serial {
Matrix unwrap_matrix(const Matrix& Y) {
    Matrix out(Y.rows(), Y.cols());
    for (Eigen::Index i = 0; i < Y.rows(); ++i) unwrap_row(Y, out, i);
    return out;
}
}  // namespace serial

}  // namespace phasorsec
