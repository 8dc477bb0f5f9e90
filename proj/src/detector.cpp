#include "phasorsec/detector.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>

#include "phasorsec/errors.hpp"
#include "phasorsec/seed.hpp"
#include "phasorsec/unwrap.hpp"

namespace phasorsec {

namespace {

constexpr std::size_t kAggregateRanks = 5;

std::mutex g_sink_mutex;
WarningSink g_sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };

void warn(const std::string& msg) {
    std::lock_guard lock(g_sink_mutex);
    if (g_sink) g_sink(msg);
}

double median_of(std::vector<double> v) {
    if (v.empty()) throw DomainError("median of an empty set");
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// linear interpolation between order statistics
double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw DomainError("quantile of an empty set");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double iqr(const std::vector<double>& v) { return quantile(v, 0.75) - quantile(v, 0.25); }

std::size_t needed_rank(const DetectorConfig& cfg) {
    std::size_t r = std::max(cfg.r_star, cfg.r_perm);
    if (cfg.rule == EvidenceRule::Aggregate) r = std::max(r, kAggregateRanks);
    return r;
}

RankErrorProfile mean_profile(const std::vector<RankErrorProfile>& ps) {
    RankErrorProfile out;
    out.errors_pct.assign(ps.front().errors_pct.size(), 0.0);
    for (const auto& p : ps)
        for (std::size_t i = 0; i < out.errors_pct.size(); ++i) out.errors_pct[i] += p.errors_pct[i];
    for (auto& e : out.errors_pct) e /= static_cast<double>(ps.size());
    return out;
}

RankErrorProfile median_profile(const std::vector<RankErrorProfile>& ps) {
    RankErrorProfile out;
    const std::size_t r = ps.front().errors_pct.size();
    out.errors_pct.resize(r);
    std::vector<double> col(ps.size());
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t k = 0; k < ps.size(); ++k) col[k] = ps[k].errors_pct[i];
        out.errors_pct[i] = median_of(col);
    }
    return out;
}

// sum over r of (a - b) against tau * sum of b, ranks 1..k
bool aggregate_exceeds(const RankErrorProfile& a, const RankErrorProfile& b, double tau,
                       std::size_t k) {
    double gap = 0.0, ref = 0.0;
    for (std::size_t r = 1; r <= k; ++r) {
        gap += a.at(r) - b.at(r);
        ref += b.at(r);
    }
    return gap > tau * ref;
}

bool exceeds(const RankErrorProfile& a, const RankErrorProfile& b, double tau, std::size_t r,
             EvidenceRule rule) {
    if (rule == EvidenceRule::Aggregate) return aggregate_exceeds(a, b, tau, kAggregateRanks);
    return a.at(r) > (1.0 + tau) * b.at(r);
}

RankErrorProfile unwrapped_profile(const MeasurementMatrix& Y, const DetectorConfig& cfg) {
    const Matrix U = unwrap_matrix(Y);
    return error_profile(build_hankel(U, cfg.L, HankelKind::Unwrapped).values, cfg.profile_rank);
}

struct WindowPlan {
    std::size_t count = 0;
    std::size_t step = 0;
    std::size_t samples = 0;
};

WindowPlan plan_windows(std::span<const ChannelSeries> channels, const DetectorConfig& cfg) {
    if (channels.empty()) throw SpecError("no channels to classify");
    WindowPlan p;
    p.samples = channels[0].samples.size();
    for (const auto& ch : channels) p.samples = std::min(p.samples, ch.samples.size());
    p.step = cfg.stride == 0 ? cfg.window_n : cfg.stride;
    p.count = window_count(p.samples, cfg);
    const std::size_t used = p.count == 0 ? 0 : (p.count - 1) * p.step + cfg.window_n;
    if (p.count == 0)
        warn("series of " + std::to_string(p.samples) + " samples is shorter than one window of " +
             std::to_string(cfg.window_n));
    else if (used < p.samples && cfg.stride == 0)
        warn("trailing partial window of " + std::to_string(p.samples - used) +
             " samples skipped");
    return p;
}

const Baseline* pick_baseline(std::span<const Baseline> baselines, std::size_t w,
                              std::size_t windows) {
    if (baselines.empty()) return nullptr;
    if (baselines.size() == 1) return &baselines[0];
    if (baselines.size() < windows)
        throw SpecError("need one baseline per window: have " + std::to_string(baselines.size()) +
                        ", windows " + std::to_string(windows));
    return &baselines[w];
}

Classification classify_at(std::span<const ChannelSeries> channels, const DetectorConfig& cfg,
                           std::span<const Baseline> baselines, const WindowPlan& plan,
                           std::size_t w) {
    const Timestamp start = channels[0].samples[w * plan.step].t;
    const auto Y = assemble_matrix(channels, start, cfg.window_n);
    return classify_window(Y, cfg, pick_baseline(baselines, w, plan.count), w);
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
    std::lock_guard lock(g_sink_mutex);
    std::swap(g_sink, sink);
    return sink;
}

void validate(const DetectorConfig& cfg) {
    if (cfg.window_n < 8) throw ConfigError("detector.window_n must be >= 8");
    if (cfg.r_star < 1) throw ConfigError("detector.r_star must be >= 1");
    if (cfg.r_perm < 1) throw ConfigError("detector.r_perm must be >= 1");
    if (!(cfg.tau_perm >= 0.0) || !(cfg.tau_unwrap >= 0.0) || !(cfg.tau_gate >= 0.0))
        throw ConfigError("detector thresholds must be >= 0");
    if (cfg.K_perm < 1) throw ConfigError("detector.K_perm must be >= 1");
    if (cfg.profile_rank < needed_rank(cfg))
        throw ConfigError("detector.profile_rank is below the ranks the decision uses");
    if (cfg.L) {
        const std::size_t L = *cfg.L;
        if (L < 2 || L > cfg.window_n || cfg.window_n - L + 1 < 2)
            throw ConfigError("detector.L out of range for window_n");
    }
    const std::size_t L = cfg.L.value_or(default_hankel_rows(cfg.window_n));
    if (std::min(L, cfg.window_n - L + 1) < needed_rank(cfg))
        throw ConfigError("Hankel matrix too small for the configured ranks");
}

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Normal: return "Normal";
        case Verdict::Event: return "Event";
        case Verdict::FDIA: return "FDIA";
        case Verdict::TimingAttack: return "TimingAttack";
    }
    return "?";
}

Verdict verdict_from_string(std::string_view s) {
    for (auto v : {Verdict::Normal, Verdict::Event, Verdict::FDIA, Verdict::TimingAttack})
        if (to_string(v) == s) return v;
    throw FormatError("unknown verdict '" + std::string(s) + "'");
}

Matrix remove_common_mode(const Matrix& U) {
    Matrix out = U;
    std::vector<double> d(static_cast<std::size_t>(U.rows()));
    for (Eigen::Index t = 0; t < U.cols(); ++t) {
        for (Eigen::Index c = 0; c < U.rows(); ++c)
            d[static_cast<std::size_t>(c)] = U(c, t) - U(c, 0);
        const double g = median_of(d);
        out.col(t).array() -= g;
    }
    return out;
}

Evidence compute_evidence(const MeasurementMatrix& Y, const DetectorConfig& cfg,
                          std::size_t window_index) {
    if (Y.n() != cfg.window_n)
        throw SpecError("window has " + std::to_string(Y.n()) + " samples, config expects " +
                        std::to_string(cfg.window_n));
    Evidence ev;
    const HankelMatrix H = build_hankel(Y.values(), cfg.L, HankelKind::Raw);
    ev.e_r = error_profile(H.values, cfg.profile_rank);

    const Matrix U = unwrap_matrix(Y);
    ev.e_ru = error_profile(build_hankel(U, cfg.L, HankelKind::Unwrapped).values, cfg.profile_rank);

    HankelMatrix base;
    if (cfg.permutation_basis == PermutationBasis::Detrended) {
        base = build_hankel(remove_common_mode(U), cfg.L, HankelKind::Unwrapped);
        ev.e_rd = error_profile(base.values, cfg.profile_rank);
    } else {
        base = H;
        ev.e_rd = ev.e_r;
    }

    const std::uint64_t wseed = derive_seed(cfg.seed, "perm", window_index);
    std::vector<RankErrorProfile> draws;
    draws.reserve(cfg.K_perm);
    for (std::size_t k = 0; k < cfg.K_perm; ++k) {
        const auto P = permute_block_columns(base, derive_seed(wseed, "draw", k));
        draws.push_back(error_profile(P.values, cfg.profile_rank));
    }
    ev.e_rr = mean_profile(draws);
    return ev;
}

bool anomaly_gate(const Evidence& ev, const DetectorConfig& cfg, const Baseline* baseline) {
    if (!cfg.gate || baseline == nullptr) return true;
    return ev.e_ru.at(cfg.r_star) > baseline->gate_threshold(cfg.tau_gate);
}

bool anomaly_gate(const MeasurementMatrix& Y, const DetectorConfig& cfg, const Baseline& baseline) {
    if (!cfg.gate) return true;
    return unwrapped_profile(Y, cfg).at(cfg.r_star) > baseline.gate_threshold(cfg.tau_gate);
}

Verdict decide(const Evidence& ev, const DetectorConfig& cfg, const Baseline* baseline,
               bool* gate_fired) {
    const bool fired = anomaly_gate(ev, cfg, baseline);
    if (gate_fired) *gate_fired = fired;
    if (!fired) return Verdict::Normal;

    // temporal correlation across channels marks an event
    if (exceeds(ev.e_rr, ev.e_rd, cfg.tau_perm, cfg.r_perm, cfg.rule)) return Verdict::Event;

    // timing vs injection: does unwrapping leave a discontinuity
    const RankErrorProfile* ref = &ev.e_r;
    if (cfg.unwrap_baseline == UnwrapBaselineMode::CleanReference) {
        if (baseline == nullptr)
            throw SpecError("clean-reference unwrap baseline requested without a baseline");
        ref = &baseline->e_ru;
    }
    if (exceeds(ev.e_ru, *ref, cfg.tau_unwrap, cfg.r_star, cfg.rule)) return Verdict::TimingAttack;
    return Verdict::FDIA;
}

Classification classify_window(const MeasurementMatrix& Y, const DetectorConfig& cfg,
                               const Baseline* baseline, std::size_t window_index) {
    Classification c;
    c.evidence = compute_evidence(Y, cfg, window_index);
    c.verdict = decide(c.evidence, cfg, baseline, &c.gate_fired);
    c.window_start = Y.t0();
    c.window_index = window_index;
    return c;
}

namespace serial {
Baseline calibrate_baseline(std::span<const MeasurementMatrix> clean_windows,
                            const DetectorConfig& cfg) {
    if (clean_windows.empty()) throw SpecError("calibration needs at least one window");
    std::vector<RankErrorProfile> ps;
    for (const auto& Y : clean_windows) ps.push_back(unwrapped_profile(Y, cfg));
    Baseline b;
    b.e_ru = median_profile(ps);
    std::vector<double> g;
    for (const auto& p : ps) g.push_back(p.at(cfg.r_star));
    b.gate_center = median_of(g);
    b.gate_spread = iqr(g);
    b.windows = ps.size();
    return b;
}
}  // namespace serial

Baseline calibrate_baseline(std::span<const MeasurementMatrix> clean_windows,
                            const DetectorConfig& cfg) {
    if (clean_windows.empty()) throw SpecError("calibration needs at least one window");
    const auto N = static_cast<std::ptrdiff_t>(clean_windows.size());
    std::vector<RankErrorProfile> ps(clean_windows.size());
    std::exception_ptr err;
    std::ptrdiff_t err_at = N;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < N; ++i) {
        try {
            ps[static_cast<std::size_t>(i)] =
                unwrapped_profile(clean_windows[static_cast<std::size_t>(i)], cfg);
        } catch (...) {
#pragma omp critical(phasorsec_calib_err)
            if (i < err_at) {
                err_at = i;
                err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
    Baseline b;
    b.e_ru = median_profile(ps);
    std::vector<double> g;
    for (const auto& p : ps) g.push_back(p.at(cfg.r_star));
    b.gate_center = median_of(g);
    b.gate_spread = iqr(g);
    b.windows = ps.size();
    return b;
}

std::size_t window_count(std::size_t samples, const DetectorConfig& cfg) {
    if (samples < cfg.window_n) return 0;
    const std::size_t step = cfg.stride == 0 ? cfg.window_n : cfg.stride;
    return (samples - cfg.window_n) / step + 1;
}

Baseline calibrate_baseline(std::span<const ChannelSeries> clean, const DetectorConfig& cfg) {
    validate(cfg);
    const auto plan = plan_windows(clean, cfg);
    std::vector<MeasurementMatrix> ws;
    for (std::size_t w = 0; w < plan.count; ++w)
        ws.push_back(assemble_matrix(clean, clean[0].samples[w * plan.step].t, cfg.window_n));
    return calibrate_baseline(std::span<const MeasurementMatrix>(ws), cfg);
}

std::vector<Baseline> calibrate_per_window(std::span<const std::vector<ChannelSeries>> runs,
                                           const DetectorConfig& cfg) {
    validate(cfg);
    if (runs.empty()) throw SpecError("per-window calibration needs at least one run");
    std::size_t windows = SIZE_MAX;
    std::vector<WindowPlan> plans;
    for (const auto& r : runs) {
        plans.push_back(plan_windows(r, cfg));
        windows = std::min(windows, plans.back().count);
    }
    const std::size_t R = runs.size();
    // profiles[w * R + k]
    std::vector<RankErrorProfile> profiles(windows * R);
    std::exception_ptr err;
    std::ptrdiff_t err_at = static_cast<std::ptrdiff_t>(profiles.size());
    const auto total = static_cast<std::ptrdiff_t>(profiles.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
        const auto w = static_cast<std::size_t>(idx) / R;
        const auto k = static_cast<std::size_t>(idx) % R;
        try {
            const auto& ch = runs[k];
            const auto Y = assemble_matrix(ch, ch[0].samples[w * plans[k].step].t, cfg.window_n);
            profiles[static_cast<std::size_t>(idx)] = unwrapped_profile(Y, cfg);
        } catch (...) {
#pragma omp critical(phasorsec_calib_err)
            if (idx < err_at) {
                err_at = idx;
                err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);

    std::vector<Baseline> out(windows);
    std::vector<double> rel;
    for (std::size_t w = 0; w < windows; ++w) {
        std::vector<RankErrorProfile> ps(profiles.begin() + static_cast<std::ptrdiff_t>(w * R),
                                         profiles.begin() + static_cast<std::ptrdiff_t>((w + 1) * R));
        out[w].e_ru = median_profile(ps);
        out[w].gate_center = out[w].e_ru.at(cfg.r_star);
        out[w].windows = R;
        for (const auto& p : ps) rel.push_back(p.at(cfg.r_star) / out[w].gate_center);
    }
    // spread relative to each window's level, pooled over all windows
    const double rel_iqr = iqr(rel);
    for (auto& b : out) b.gate_spread = rel_iqr * b.gate_center;
    return out;
}

std::vector<Classification> classify_stream(std::span<const ChannelSeries> channels,
                                            const DetectorConfig& cfg,
                                            std::span<const Baseline> baselines) {
    validate(cfg);
    const auto plan = plan_windows(channels, cfg);
    std::vector<Classification> out(plan.count);
    std::exception_ptr err;
    auto err_at = static_cast<std::ptrdiff_t>(plan.count);
    const auto N = static_cast<std::ptrdiff_t>(plan.count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t w = 0; w < N; ++w) {
        try {
            out[static_cast<std::size_t>(w)] =
                classify_at(channels, cfg, baselines, plan, static_cast<std::size_t>(w));
        } catch (...) {
#pragma omp critical(phasorsec_stream_err)
            if (w < err_at) {
                err_at = w;
                err = std::current_exception();
            }
        }
    }
    if (err) std::rethrow_exception(err);
    return out;
}

namespace serial {
std::vector<Classification> classify_stream(std::span<const ChannelSeries> channels,
                                            const DetectorConfig& cfg,
                                            std::span<const Baseline> baselines) {
    validate(cfg);
    const auto plan = plan_windows(channels, cfg);
    std::vector<Classification> out;
    out.reserve(plan.count);
    for (std::size_t w = 0; w < plan.count; ++w)
        out.push_back(classify_at(channels, cfg, baselines, plan, w));
    return out;
}
}  // namespace serial

}  // namespace phasorsec
