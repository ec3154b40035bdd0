#pragma once

#include "matprod/engine.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace matprod {

/// Lyapunov exponent estimates from T trajectories that all reached the same
/// final step n: lambda_i_hat is the across-trajectory mean of
/// log sigma_i(n) / n. The stderr fields carry the across-trajectory sample
/// standard deviation of the per-trajectory estimates (0 when T == 1); they
/// quantify the spread a single trajectory exhibits at this n, which is what
/// the finite-n significance thresholds are built from.
struct LyapunovEstimate {
    double lambda1_hat = 0.0;
    double lambda2_hat = 0.0;  ///< -infinity once a singular member was applied
    double stderr1 = 0.0;
    double stderr2 = 0.0;
    std::int64_t n_steps = 0;
    std::int64_t n_trajectories = 0;
    double gap = 0.0;  ///< lambda1_hat - lambda2_hat
};

LyapunovEstimate estimate_lyapunov(const std::vector<std::vector<TrajectoryRecord>>& trajectories);

enum class RateQuantity { ColumnDistance, ColumnToLimit, PnVToLimit, RankOneGap };
enum class RateClass { Exponential, SubExponential, NotConvergent };

const char* to_string(RateQuantity q);
const char* to_string(RateClass c);

struct RatePoint {
    std::int64_t n = 0;
    double value = 0.0;
};

/// How a log-linear fit over the trailing half of a series is judged.
/// rate_floor and convergence_tol are the primary knobs; the residual and
/// power-law constants separate a genuine C*r^n trend from staircase decay.
struct AnalysisThresholds {
    double rate_floor = 1e-3;         ///< slope threshold, per step
    double convergence_tol = 1e-6;    ///< final-value threshold for "reached zero"
    double exp_residual_frac = 0.05;  ///< fit RMS residual allowed, as a fraction of the fitted drop
    double power_slope_max = -0.5;    ///< log-log slope certifying polynomial decay to zero
    double power_residual_max = 0.25; ///< RMS residual allowed for the log-log fit
    double divergence_threshold = 1e-3;
    double gap_tol_floor = 1e-3;
    std::optional<double> gap_tol_override;  ///< replaces the statistical gap threshold entirely
    double rank_one_gap_tol = 1e-3;
};

struct RateVerdict {
    RateQuantity quantity = RateQuantity::ColumnDistance;
    RateClass classification = RateClass::NotConvergent;
    double fitted_rate = 0.0;  ///< slope of log(value) per step over the fit window
    std::int64_t window_lo = 0;
    std::int64_t window_hi = 0;
    double residual = 0.0;  ///< RMS residual of the fit, in log units
    bool had_zeros = false; ///< some window values were exactly zero (limit reached)
};

/// Classify the decay of a nonnegative series sampled at increasing n.
/// Requires at least 20 points (std::domain_error otherwise). The fit runs
/// over the trailing half:
///   Exponential     -- fitted slope < -rate_floor and the fit residual is
///                      below exp_residual_frac of the fitted total drop;
///   SubExponential  -- the series reaches zero (final value below
///                      convergence_tol, or a clean power-law log-log fit)
///                      without qualifying as Exponential;
///   NotConvergent   -- otherwise.
/// A trailing window of exact zeros classifies Exponential with rate
/// -infinity: the quantity was reached exactly in finite time.
RateVerdict classify_rate(RateQuantity quantity, std::span<const RatePoint> series,
                          const AnalysisThresholds& thresholds = {});

/// lambda2(n) / lambda1(n) for one recorded step. For 2x2 matrices the
/// leading singular value is simple exactly when this ratio is below 1.
struct RankOneGapResult {
    double gap = 0.0;  ///< in [0, 1]
    bool multiplicity_one = false;
    bool degenerate = false;  ///< zero product: gap reported as 0
};

RankOneGapResult rank_one_gap(const TrajectoryRecord& record);

/// Exact closed form of an upper-triangular product along a symbol sequence,
/// carried in log space: P_n = [[alpha_n, delta_n * s_n], [0, delta_n]] with
/// log_alpha = sum log a(w_i), log_delta = sum log d(w_i), and
/// s_n = sum_i (alpha_{i-1} / delta_{i-1}) * (b(w_i) / d(w_i)).
struct TriangularExact {
    double log_alpha = 0.0;
    double log_beta = 0.0;  ///< log of the off-diagonal entry; -infinity if it is 0
    double log_delta = 0.0;
    Matrix2 unit;           ///< P_n / ||P_n||_1
    double s_n = 0.0;       ///< may overflow to +infinity when p > q
};

/// Throws std::domain_error unless the ensemble classifies TriangularUpper.
TriangularExact triangular_oracle(const MatrixEnsemble& ensemble,
                                  std::span<const std::uint32_t> symbols);

/// Where P_n V / ||P_n V|| is headed, when the triangular theory defines it:
///   p >= q           -> (1, 0) for every admissible V;
///   p < q, V = (v,0) -> (1, 0);
///   p < q, V_2 > 0   -> (s/(s+1), 1/(s+1)) with s the limit of s_n, summed
///                       until the measured geometric tail drops below 1e-12
///                       of the partial sum.
/// Ensembles outside the TriangularUpper regime report Undetermined.
struct PnvPrediction {
    bool defined = false;
    ColumnVector2 limit;
    double s_value = 0.0;
    double tail_bound = 0.0;
    std::int64_t steps_used = 0;
};

PnvPrediction limit_of_pnv(const MatrixEnsemble& ensemble, const SymbolSource& source,
                           const ColumnVector2& v, std::int64_t max_steps = 2'000'000);

/// Oscillation of the normalized product over the trailing half of one
/// trajectory: the largest entrywise range of the recorded unit matrices.
/// Values above divergence_threshold mean the normalized product is not
/// settling.
double divergence_statistic(std::span<const TrajectoryRecord> records);

struct ClaimResult {
    std::string name;
    bool decisive = false;  ///< false: the data cannot contradict the claim (margin case)
    bool agree = true;
    std::string note;
};

/// Predictions vs observations. gap_tol is
/// max(3 * (stderr1 + stderr2), gap_tol_floor) unless overridden.
struct Verdict {
    RegimeReport prediction;
    LyapunovEstimate estimate;
    std::vector<RateVerdict> rates;
    double gap_tol = 0.0;
    double divergence_stat_median = 0.0;
    double divergence_stat_min = 0.0;
    double divergence_stat_max = 0.0;
    double final_rank_one_gap_median = 0.0;
    std::vector<ClaimResult> claims;
    bool all_agree = true;
};

/// Compare the classifier's predictions with the measured run:
///  (a) a significant Lyapunov gap must come with exponential column
///      convergence, and an insignificant one with a non-exponential verdict
///      (insignificant gap + exponential decay is reported as a margin case,
///      not a contradiction);
///  (b) a significant gap must drive lambda2(n)/lambda1(n) to zero;
///  (c) without a common left eigenvector the normalized product must
///      oscillate; where the regime pins convergence of the normalized
///      product, the oscillation statistic must stay below threshold.
Verdict make_verdict(const RegimeReport& prediction, const LyapunovEstimate& estimate,
                     const std::vector<RateVerdict>& rates,
                     const std::vector<double>& divergence_stats,
                     double final_rank_one_gap_median, const AnalysisThresholds& thresholds);

}  // namespace matprod
