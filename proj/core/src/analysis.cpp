#include "matprod/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace matprod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kValueFloor = 1e-300;

double mean_of(const std::vector<double>& xs) {
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

double sample_sd(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    double acc = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
};

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        res += e * e;
    }
    fit.rms_residual = std::sqrt(res / static_cast<double>(n));
    return fit;
}

}  // namespace

const char* to_string(RateQuantity q) {
    switch (q) {
        case RateQuantity::ColumnDistance: return "ColumnDistance";
        case RateQuantity::ColumnToLimit: return "ColumnToLimit";
        case RateQuantity::PnVToLimit: return "PnVToLimit";
        case RateQuantity::RankOneGap: return "RankOneGap";
    }
    return "ColumnDistance";
}

const char* to_string(RateClass c) {
    switch (c) {
        case RateClass::Exponential: return "Exponential";
        case RateClass::SubExponential: return "SubExponential";
        case RateClass::NotConvergent: return "NotConvergent";
    }
    return "NotConvergent";
}

LyapunovEstimate estimate_lyapunov(
    const std::vector<std::vector<TrajectoryRecord>>& trajectories) {
    if (trajectories.empty()) {
        throw std::domain_error("estimate_lyapunov: no trajectories");
    }
    std::vector<double> l1s, l2s;
    l1s.reserve(trajectories.size());
    l2s.reserve(trajectories.size());
    std::int64_t final_n = 0;
    bool any_minus_inf = false;
    for (const auto& records : trajectories) {
        if (records.empty()) {
            throw std::domain_error("estimate_lyapunov: empty trajectory");
        }
        const TrajectoryRecord& last = records.back();
        if (final_n == 0) {
            final_n = last.step;
        } else if (last.step != final_n) {
            throw std::domain_error("estimate_lyapunov: trajectories end at different steps");
        }
        const double n = static_cast<double>(last.step);
        l1s.push_back(last.log_sigma1 / n);
        if (last.log_sigma2 == -kInf) {
            any_minus_inf = true;
        } else {
            l2s.push_back(last.log_sigma2 / n);
        }
    }

    LyapunovEstimate est;
    est.n_steps = final_n;
    est.n_trajectories = static_cast<std::int64_t>(trajectories.size());
    est.lambda1_hat = mean_of(l1s);
    est.stderr1 = sample_sd(l1s, est.lambda1_hat);
    if (any_minus_inf) {
        est.lambda2_hat = -kInf;
        est.stderr2 = 0.0;
        est.gap = kInf;
    } else {
        est.lambda2_hat = mean_of(l2s);
        est.stderr2 = sample_sd(l2s, est.lambda2_hat);
        est.gap = est.lambda1_hat - est.lambda2_hat;
    }
    return est;
}

RateVerdict classify_rate(RateQuantity quantity, std::span<const RatePoint> series,
                          const AnalysisThresholds& thresholds) {
    if (series.size() < 20) {
        throw std::domain_error("classify_rate: needs at least 20 recorded points");
    }
    RateVerdict verdict;
    verdict.quantity = quantity;

    const std::size_t begin = series.size() / 2;
    const std::size_t count = series.size() - begin;
    verdict.window_lo = series[begin].n;
    verdict.window_hi = series.back().n;

    // An exact zero sits below every representable floor (the value reached
    // its limit), so zeros count toward convergence but are kept out of the
    // fit, where a clipped log would only poison the residual.
    std::vector<double> xs, ys, lxs;
    xs.reserve(count);
    ys.reserve(count);
    lxs.reserve(count);
    for (std::size_t i = begin; i < series.size(); ++i) {
        const double v = series[i].value;
        if (v < 0.0 || !std::isfinite(v)) {
            throw std::domain_error("classify_rate: values must be finite and nonnegative");
        }
        if (v == 0.0 || v < kValueFloor) {
            verdict.had_zeros = true;
            continue;
        }
        xs.push_back(static_cast<double>(series[i].n));
        ys.push_back(std::log(v));
        lxs.push_back(std::log(static_cast<double>(series[i].n)));
    }

    if (xs.size() < 2) {
        // The window is (almost) entirely at zero: the limit was reached in
        // finite time when the series ends there, and no rate is resolvable
        // otherwise.
        const bool ended_at_zero = series.back().value < thresholds.convergence_tol;
        verdict.classification =
            ended_at_zero ? RateClass::Exponential : RateClass::NotConvergent;
        verdict.fitted_rate = ended_at_zero ? -kInf : 0.0;
        verdict.residual = 0.0;
        return verdict;
    }

    const LineFit lin = fit_line(xs, ys);
    verdict.fitted_rate = lin.slope;
    verdict.residual = lin.rms_residual;

    const double span = xs.back() - xs.front();
    const double fitted_drop = std::fabs(lin.slope) * span;
    const bool steep = lin.slope < -thresholds.rate_floor;
    const bool clean =
        lin.rms_residual <= std::max(thresholds.exp_residual_frac * fitted_drop, 1e-12);
    if (steep && clean) {
        verdict.classification = RateClass::Exponential;
        return verdict;
    }

    const double final_value = series.back().value;
    bool converges = final_value < thresholds.convergence_tol;
    if (!converges) {
        // Polynomial decay (the 1/n regime) never reaches convergence_tol at
        // practical n; certify it through a log-log fit instead.
        const LineFit power = fit_line(lxs, ys);
        converges = power.slope <= thresholds.power_slope_max &&
                    power.rms_residual <= thresholds.power_residual_max &&
                    series.back().value <= series[begin].value;
    }
    verdict.classification = converges ? RateClass::SubExponential : RateClass::NotConvergent;
    return verdict;
}

RankOneGapResult rank_one_gap(const TrajectoryRecord& record) {
    RankOneGapResult out;
    if (record.log_sigma1 == -kInf) {
        out.gap = 0.0;
        out.degenerate = true;
        out.multiplicity_one = false;
        return out;
    }
    out.gap = std::exp(record.log_sigma2 - record.log_sigma1);
    out.multiplicity_one = out.gap < 1.0;
    return out;
}

TriangularExact triangular_oracle(const MatrixEnsemble& ensemble,
                                  std::span<const std::uint32_t> symbols) {
    for (const Matrix2& m : ensemble.matrices()) {
        if (!m.is_upper_triangular() || m.a <= 0.0 || m.d <= 0.0) {
            throw std::domain_error("triangular_oracle: ensemble is not a rank-2 "
                                    "upper-triangular family");
        }
    }

    // Log-space recursion: alpha_n = alpha_{n-1} a, delta_n = delta_{n-1} d,
    // beta_n = alpha_{n-1} b + beta_{n-1} d (log-sum-exp keeps it stable for
    // any p/q ordering).
    double log_alpha = 0.0;
    double log_beta = -kInf;
    double log_delta = 0.0;
    double s_n = 0.0;
    for (std::uint32_t sym : symbols) {
        if (sym >= ensemble.size()) {
            throw std::domain_error("triangular_oracle: symbol out of range");
        }
        const Matrix2& m = ensemble.matrix(sym);
        if (m.b > 0.0) {
            s_n += std::exp(log_alpha - log_delta) * (m.b / m.d);
            const double grown = log_beta + std::log(m.d);
            const double fresh = log_alpha + std::log(m.b);
            const double hi = std::max(grown, fresh);
            log_beta = hi + std::log(std::exp(grown - hi) + std::exp(fresh - hi));
        } else {
            log_beta += std::log(m.d);
        }
        log_alpha += std::log(m.a);
        log_delta += std::log(m.d);
    }

    TriangularExact out;
    out.log_alpha = log_alpha;
    out.log_beta = log_beta;
    out.log_delta = log_delta;
    out.s_n = s_n;

    const double hi = std::max({log_alpha, log_beta, log_delta});
    const double norm = std::exp(log_alpha - hi) + std::exp(log_beta - hi) + std::exp(log_delta - hi);
    out.unit = Matrix2{std::exp(log_alpha - hi) / norm, std::exp(log_beta - hi) / norm, 0.0,
                       std::exp(log_delta - hi) / norm};
    return out;
}

PnvPrediction limit_of_pnv(const MatrixEnsemble& ensemble, const SymbolSource& source,
                           const ColumnVector2& v, std::int64_t max_steps) {
    PnvPrediction out;
    const RegimeReport report = classify(ensemble);
    if (report.regime != Regime::TriangularUpper) {
        return out;  // no theory-defined limit: Undetermined, not guessed
    }
    if (!(v.x >= 0.0 && v.y >= 0.0) || v.norm1() == 0.0) {
        throw std::domain_error("limit_of_pnv: V must be nonnegative and nonzero");
    }

    const double margin = report.pq_log_margin.value();
    if (report.pq_equal() || margin > 0.0 || v.y == 0.0) {
        // p >= q, or V has no second component: everything aligns with the
        // first column direction.
        out.defined = true;
        out.limit = ColumnVector2{1.0, 0.0};
        return out;
    }

    // p < q: s_n converges geometrically; sum terms until the measured ratio
    // alpha_i/delta_i certifies a tail below 1e-12 of the partial sum.
    double log_ratio = 0.0;  // log(alpha_i / delta_i)
    double s = 0.0;
    double max_bd = 0.0;
    for (const Matrix2& m : ensemble.matrices()) {
        max_bd = std::max(max_bd, m.b / m.d);
    }

    std::optional<SplitMix64> rng;
    std::vector<double> cdf;
    if (source.is_iid()) {
        rng.emplace(source.seed());
        cdf = ensemble.probs();
        double acc = 0.0;
        for (double& c : cdf) {
            acc += c;
            c = acc;
        }
        cdf.back() = 1.0;
    }
    const std::int64_t available =
        source.is_iid() ? max_steps
                        : std::min<std::int64_t>(max_steps,
                                                 static_cast<std::int64_t>(source.symbols().size()));

    constexpr std::int64_t kDecayWindow = 64;
    double window_start_log_ratio = 0.0;
    std::int64_t i = 0;
    for (; i < available; ++i) {
        std::uint32_t sym;
        if (source.is_iid()) {
            const double u = rng->next_double();
            std::uint32_t k = 0;
            while (k + 1 < cdf.size() && u >= cdf[k]) {
                ++k;
            }
            sym = k;
        } else {
            sym = source.symbols()[static_cast<std::size_t>(i)];
        }
        const Matrix2& m = ensemble.matrix(sym);
        s += std::exp(log_ratio) * (m.b / m.d);
        log_ratio += std::log(m.a) - std::log(m.d);

        if ((i + 1) % kDecayWindow == 0) {
            const double decay = (log_ratio - window_start_log_ratio) / kDecayWindow;
            window_start_log_ratio = log_ratio;
            if (decay < 0.0 && s > 0.0) {
                // Remaining terms are bounded by ratio * max_bd * geometric series.
                const double rho = std::exp(decay);
                const double tail = std::exp(log_ratio) * max_bd * rho / (1.0 - rho);
                if (tail < 1e-12 * s) {
                    out.tail_bound = tail;
                    ++i;
                    break;
                }
            }
        }
    }
    out.steps_used = i;
    out.s_value = s;
    out.defined = true;
    out.limit = ColumnVector2{s / (s + 1.0), 1.0 / (s + 1.0)};
    return out;
}

double divergence_statistic(std::span<const TrajectoryRecord> records) {
    if (records.empty()) {
        return 0.0;
    }
    const std::size_t begin = records.size() / 2;
    double amin = kInf, amax = -kInf;
    double bmin = kInf, bmax = -kInf;
    double cmin = kInf, cmax = -kInf;
    double dmin = kInf, dmax = -kInf;
    for (std::size_t i = begin; i < records.size(); ++i) {
        const Matrix2& u = records[i].unit;
        amin = std::min(amin, u.a); amax = std::max(amax, u.a);
        bmin = std::min(bmin, u.b); bmax = std::max(bmax, u.b);
        cmin = std::min(cmin, u.c); cmax = std::max(cmax, u.c);
        dmin = std::min(dmin, u.d); dmax = std::max(dmax, u.d);
    }
    return std::max({amax - amin, bmax - bmin, cmax - cmin, dmax - dmin});
}

namespace {

const RateVerdict* find_rate(const std::vector<RateVerdict>& rates, RateQuantity q) {
    for (const RateVerdict& r : rates) {
        if (r.quantity == q) {
            return &r;
        }
    }
    return nullptr;
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    double hi = xs[mid];
    if (xs.size() % 2 == 0) {
        const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid));
        return 0.5 * (lo + hi);
    }
    return hi;
}

}  // namespace

Verdict make_verdict(const RegimeReport& prediction, const LyapunovEstimate& estimate,
                     const std::vector<RateVerdict>& rates,
                     const std::vector<double>& divergence_stats,
                     double final_rank_one_gap_median, const AnalysisThresholds& thresholds) {
    Verdict verdict;
    verdict.prediction = prediction;
    verdict.estimate = estimate;
    verdict.rates = rates;
    verdict.final_rank_one_gap_median = final_rank_one_gap_median;

    verdict.gap_tol = thresholds.gap_tol_override.value_or(
        std::max(3.0 * (estimate.stderr1 + estimate.stderr2), thresholds.gap_tol_floor));

    if (!divergence_stats.empty()) {
        verdict.divergence_stat_median = median_of(divergence_stats);
        verdict.divergence_stat_min =
            *std::min_element(divergence_stats.begin(), divergence_stats.end());
        verdict.divergence_stat_max =
            *std::max_element(divergence_stats.begin(), divergence_stats.end());
    }

    const bool gap_significant = estimate.gap > verdict.gap_tol;
    // Column convergence is judged against the per-column limits when the
    // regime assigns distinct ones; the distance between the columns is the
    // right quantity only when they share a limit.
    const RateVerdict* column_rate = find_rate(rates, RateQuantity::ColumnToLimit);
    if (column_rate == nullptr) {
        column_rate = find_rate(rates, RateQuantity::ColumnDistance);
    }

    // (a) exponential column convergence <=> distinct Lyapunov exponents
    {
        ClaimResult claim;
        claim.name = "gap_iff_exponential_columns";
        if (column_rate == nullptr) {
            claim.decisive = false;
            claim.note = "no column-distance series available";
        } else if (gap_significant) {
            claim.decisive = true;
            claim.agree = column_rate->classification == RateClass::Exponential;
            claim.note = claim.agree ? "significant gap with exponential column convergence"
                                     : "significant gap but columns did not converge exponentially";
        } else if (column_rate->classification != RateClass::Exponential) {
            claim.decisive = true;
            claim.agree = true;
            claim.note = "gap within threshold and no exponential convergence observed";
        } else {
            claim.decisive = false;
            claim.agree = true;
            claim.note = "exponential decay observed while the gap estimate is within "
                         "its uncertainty; consistent, reported as a margin case";
        }
        verdict.claims.push_back(std::move(claim));
    }

    // (b) distinct exponents drive lambda2(n)/lambda1(n) to zero
    {
        ClaimResult claim;
        claim.name = "gap_drives_rank_one";
        if (gap_significant) {
            const RateVerdict* gap_rate = find_rate(rates, RateQuantity::RankOneGap);
            claim.decisive = true;
            claim.agree = final_rank_one_gap_median <= thresholds.rank_one_gap_tol ||
                          (gap_rate != nullptr &&
                           gap_rate->classification == RateClass::Exponential);
            claim.note = claim.agree ? "singular value ratio vanishes"
                                     : "singular value ratio did not vanish";
        } else {
            claim.decisive = false;
            claim.note = "no significant gap: nothing to check";
        }
        verdict.claims.push_back(std::move(claim));
    }

    // (c) normalized-product oscillation vs common left eigenvector
    {
        ClaimResult claim;
        claim.name = "divergence_iff_no_common_left_eigenvector";
        const bool has_clev = prediction.common_left_eigenvector.has_value();
        const bool pq_equal = prediction.pq_equal();
        bool expects_convergence = false;
        if (has_clev && prediction.pq_log_margin.has_value() && !pq_equal) {
            const double margin = prediction.pq_log_margin.value();
            expects_convergence =
                (prediction.regime == Regime::TriangularUpper && margin < 0.0) ||
                (prediction.regime == Regime::TriangularLower && margin > 0.0) ||
                prediction.regime == Regime::AllDiagonal;
        }
        if (divergence_stats.empty()) {
            claim.decisive = false;
            claim.note = "no unit-matrix series available";
        } else if (!has_clev) {
            claim.decisive = true;
            claim.agree = verdict.divergence_stat_median > thresholds.divergence_threshold;
            claim.note = claim.agree
                             ? "no common left eigenvector and the normalized product oscillates"
                             : "no common left eigenvector but the normalized product settled";
        } else if (expects_convergence) {
            claim.decisive = true;
            claim.agree = verdict.divergence_stat_median <= thresholds.divergence_threshold;
            claim.note = claim.agree ? "normalized product settled as predicted"
                                     : "normalized product oscillates although the regime "
                                       "predicts convergence";
        } else {
            claim.decisive = false;
            claim.note = "common left eigenvector present: the normalized product may or may "
                         "not settle; observed statistic reported";
        }
        verdict.claims.push_back(std::move(claim));
    }

    verdict.all_agree = true;
    for (const ClaimResult& c : verdict.claims) {
        if (c.decisive && !c.agree) {
            verdict.all_agree = false;
        }
    }
    return verdict;
}

}  // namespace matprod
