#include "matprod/commands.hpp"

#include "matprod/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

namespace matprod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string json_quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            default: out += ch; break;
        }
    }
    out += '"';
    return out;
}

/// The same textual token goes into both formats; JSON wraps non-finite
/// tokens in quotes because bare inf/nan are not valid JSON.
std::string json_number(double value) {
    if (!std::isfinite(value)) {
        return json_quote(format_double17(value));
    }
    return format_double17(value);
}

std::string opt_vec_json(const std::optional<ColumnVector2>& v) {
    if (!v.has_value()) {
        return "null";
    }
    return "[" + json_number(v->x) + "," + json_number(v->y) + "]";
}

std::string opt_num_json(const std::optional<double>& v) {
    return v.has_value() ? json_number(*v) : "null";
}

std::string csv_cell(double value) { return format_double17(value); }

std::string csv_opt(const std::optional<double>& v) {
    return v.has_value() ? csv_cell(*v) : "";
}

struct VerifyData {
    RegimeReport report;
    Verdict verdict;
    bool degenerate = false;
};

std::vector<RatePoint> median_series(
    const std::vector<std::vector<TrajectoryRecord>>& trajectories,
    const std::function<std::optional<double>(const TrajectoryRecord&)>& value_of) {
    std::vector<RatePoint> out;
    if (trajectories.empty()) {
        return out;
    }
    const std::size_t n_records = trajectories.front().size();
    std::vector<double> values;
    for (std::size_t i = 0; i < n_records; ++i) {
        values.clear();
        for (const auto& records : trajectories) {
            if (i < records.size()) {
                if (auto v = value_of(records[i]); v.has_value()) {
                    values.push_back(*v);
                }
            }
        }
        if (values.empty()) {
            continue;
        }
        std::sort(values.begin(), values.end());
        const std::size_t mid = values.size() / 2;
        const double median = values.size() % 2 == 1
                                  ? values[mid]
                                  : 0.5 * (values[mid - 1] + values[mid]);
        out.push_back({trajectories.front()[i].step, median});
    }
    return out;
}

double median_of(std::vector<double> xs) {
    if (xs.empty()) {
        return 0.0;
    }
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

}  // namespace

std::string format_double17(double value) {
    if (std::isnan(value)) {
        return "nan";
    }
    if (value == kInf) {
        return "inf";
    }
    if (value == -kInf) {
        return "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

int cmd_classify(const RunConfig& config, std::ostream& out) {
    const MatrixEnsemble ensemble = config.ensemble();
    const RegimeReport report = classify(ensemble);

    if (config.format == OutputFormat::Csv) {
        out << "regime,p,q,pq_log_margin,lyapunov_order,column_convergence,clev_x,clev_y,summary\n";
        out << to_string(report.regime) << ','
            << (report.p_const ? csv_cell(*report.p_const) : "") << ','
            << (report.q_const ? csv_cell(*report.q_const) : "") << ','
            << csv_opt(report.pq_log_margin) << ','
            << to_string(report.expected_lyapunov_order) << ','
            << to_string(report.expected_column_convergence) << ','
            << (report.common_left_eigenvector ? csv_cell(report.common_left_eigenvector->x) : "")
            << ','
            << (report.common_left_eigenvector ? csv_cell(report.common_left_eigenvector->y) : "")
            << ",\"" << report.summary << "\"\n";
    } else {
        out << "{\"regime\":" << json_quote(to_string(report.regime))
            << ",\"p\":" << opt_num_json(report.p_const)
            << ",\"q\":" << opt_num_json(report.q_const)
            << ",\"pq_log_margin\":" << opt_num_json(report.pq_log_margin)
            << ",\"lyapunov_order\":" << json_quote(to_string(report.expected_lyapunov_order))
            << ",\"column_convergence\":"
            << json_quote(to_string(report.expected_column_convergence))
            << ",\"common_left_eigenvector\":" << opt_vec_json(report.common_left_eigenvector)
            << ",\"summary\":" << json_quote(report.summary) << "}\n";
    }
    return kExitOk;
}

namespace {

void write_record_csv(std::ostream& out, int trajectory, const TrajectoryRecord& r) {
    out << trajectory << ',' << r.step << ',' << r.symbol << ',' << csv_cell(r.log_sigma1) << ','
        << csv_cell(r.log_sigma2) << ',' << csv_cell(r.d_h) << ',' << csv_opt(r.d_inf) << ','
        << (r.col1 ? csv_cell(r.col1->x) : "") << ',' << (r.col1 ? csv_cell(r.col1->y) : "") << ','
        << (r.col2 ? csv_cell(r.col2->x) : "") << ',' << (r.col2 ? csv_cell(r.col2->y) : "") << ','
        << csv_cell(r.unit.a) << ',' << csv_cell(r.unit.b) << ',' << csv_cell(r.unit.c) << ','
        << csv_cell(r.unit.d) << ',' << (r.pnv ? csv_cell(r.pnv->x) : "") << ','
        << (r.pnv ? csv_cell(r.pnv->y) : "") << '\n';
}

void write_record_json(std::ostream& out, int trajectory, const TrajectoryRecord& r) {
    out << "{\"trajectory\":" << trajectory << ",\"step\":" << r.step
        << ",\"symbol\":" << r.symbol << ",\"log_sigma1\":" << json_number(r.log_sigma1)
        << ",\"log_sigma2\":" << json_number(r.log_sigma2) << ",\"d_h\":" << json_number(r.d_h)
        << ",\"d_inf\":" << opt_num_json(r.d_inf) << ",\"col1\":" << opt_vec_json(r.col1)
        << ",\"col2\":" << opt_vec_json(r.col2) << ",\"unit\":[" << json_number(r.unit.a) << ','
        << json_number(r.unit.b) << ',' << json_number(r.unit.c) << ',' << json_number(r.unit.d)
        << "],\"pnv\":" << opt_vec_json(r.pnv) << "}\n";
}

}  // namespace

int cmd_simulate(const RunConfig& config, std::ostream& out) {
    const MatrixEnsemble ensemble = config.ensemble();
    const auto trajectories =
        run_trajectories(ensemble, config.seed, config.v, config.steps,
                         config.effective_record_every(), config.trajectories, config.threads);

    if (config.format == OutputFormat::Csv) {
        out << "trajectory,step,symbol,log_sigma1,log_sigma2,d_h,d_inf,"
               "col1_x,col1_y,col2_x,col2_y,unit_a,unit_b,unit_c,unit_d,pnv_x,pnv_y\n";
    }
    bool hit_zero = false;
    for (std::size_t t = 0; t < trajectories.size(); ++t) {
        for (const TrajectoryRecord& r : trajectories[t]) {
            if (config.format == OutputFormat::Csv) {
                write_record_csv(out, static_cast<int>(t), r);
            } else {
                write_record_json(out, static_cast<int>(t), r);
            }
            if (r.unit.is_zero()) {
                hit_zero = true;
            }
        }
    }
    if (hit_zero && config.v.has_value()) {
        return kExitDegenerate;  // P_nV undefined from the zero product on
    }
    return kExitOk;
}

namespace {

// Column entries are O(1), so a column-to-limit distance below a few ulps is
// not resolvable; such values count as having reached the limit exactly.
constexpr double kColumnResolution = 1e-13;

// Per-trajectory distance of the informative normalized column to the limit
// the triangular/diagonal theory assigns it. Defined for the regimes whose
// columns do not share one limit, where the distance between columns says
// nothing about convergence.
std::vector<RatePoint> column_to_limit_series(
    const RegimeReport& report, const MatrixEnsemble& ensemble, std::uint64_t master_seed,
    const std::vector<std::vector<TrajectoryRecord>>& trajectories) {
    const bool upper_distinct = report.regime == Regime::TriangularUpper &&
                                report.pq_log_margin.has_value() && !report.pq_equal() &&
                                report.pq_log_margin.value() < 0.0;
    const bool lower_distinct = report.regime == Regime::TriangularLower &&
                                report.pq_log_margin.has_value() && !report.pq_equal() &&
                                report.pq_log_margin.value() > 0.0;
    const bool constant_columns = report.regime == Regime::AllDiagonal;
    if (!upper_distinct && !lower_distinct && !constant_columns) {
        return {};
    }

    std::vector<std::vector<double>> per_traj(trajectories.size());
    for (std::size_t t = 0; t < trajectories.size(); ++t) {
        ColumnVector2 limit{0.0, 1.0};
        if (constant_columns) {
            // the columns are the axes for every n; measure both
        } else {
            const std::uint64_t seed = SplitMix64::stream_seed(master_seed, t);
            if (upper_distinct) {
                const PnvPrediction pred =
                    limit_of_pnv(ensemble, SymbolSource::iid(seed), ColumnVector2{0.0, 1.0});
                limit = pred.limit;
            } else {
                // conjugating by the coordinate swap turns the lower family
                // into an upper one with the same symbol stream; the first
                // column maps to the swapped second column
                std::vector<Matrix2> swapped;
                for (const Matrix2& m : ensemble.matrices()) {
                    swapped.push_back({m.d, m.c, m.b, m.a});
                }
                const MatrixEnsemble conj(swapped, ensemble.probs());
                const PnvPrediction pred =
                    limit_of_pnv(conj, SymbolSource::iid(seed), ColumnVector2{0.0, 1.0});
                limit = ColumnVector2{pred.limit.y, pred.limit.x};
            }
        }
        for (const TrajectoryRecord& r : trajectories[t]) {
            double dist;
            if (constant_columns) {
                if (!r.col1.has_value() || !r.col2.has_value()) {
                    continue;
                }
                dist = std::max(std::fabs(r.col1->x - 1.0) + std::fabs(r.col1->y),
                                std::fabs(r.col2->x) + std::fabs(r.col2->y - 1.0));
            } else {
                const std::optional<ColumnVector2>& col = upper_distinct ? r.col2 : r.col1;
                if (!col.has_value()) {
                    continue;
                }
                dist = std::fabs(col->x - limit.x) + std::fabs(col->y - limit.y);
            }
            per_traj[t].push_back(dist < kColumnResolution ? 0.0 : dist);
        }
    }

    std::vector<RatePoint> out;
    const std::size_t n_records = trajectories.front().size();
    std::vector<double> values;
    for (std::size_t i = 0; i < n_records; ++i) {
        values.clear();
        for (const auto& distances : per_traj) {
            if (i < distances.size()) {
                values.push_back(distances[i]);
            }
        }
        if (values.empty()) {
            continue;
        }
        std::sort(values.begin(), values.end());
        const std::size_t mid = values.size() / 2;
        out.push_back({trajectories.front()[i].step,
                       values.size() % 2 == 1 ? values[mid]
                                              : 0.5 * (values[mid - 1] + values[mid])});
    }
    return out;
}

VerifyData run_verify(const RunConfig& config) {
    const MatrixEnsemble ensemble = config.ensemble();

    VerifyData data;
    data.report = classify(ensemble);

    const auto trajectories =
        run_trajectories(ensemble, config.seed, config.v, config.steps,
                         config.effective_record_every(), config.trajectories, config.threads);

    const LyapunovEstimate estimate = estimate_lyapunov(trajectories);

    const std::vector<RatePoint> dinf_series = median_series(
        trajectories, [](const TrajectoryRecord& r) { return r.d_inf; });
    const std::vector<RatePoint> gap_series =
        median_series(trajectories, [](const TrajectoryRecord& r) -> std::optional<double> {
            return rank_one_gap(r).gap;
        });
    const std::vector<RatePoint> limit_series =
        column_to_limit_series(data.report, ensemble, config.seed, trajectories);

    if (gap_series.size() < 20) {
        throw std::domain_error("needs at least 20 recorded points per trajectory; "
                                "increase steps or lower record_every");
    }
    std::vector<RateVerdict> rates;
    if (limit_series.size() >= 20) {
        rates.push_back(
            classify_rate(RateQuantity::ColumnToLimit, limit_series, config.thresholds));
    }
    if (dinf_series.size() >= 20) {
        rates.push_back(
            classify_rate(RateQuantity::ColumnDistance, dinf_series, config.thresholds));
    }
    rates.push_back(classify_rate(RateQuantity::RankOneGap, gap_series, config.thresholds));

    std::vector<double> div_stats;
    std::vector<double> final_gaps;
    div_stats.reserve(trajectories.size());
    for (const auto& records : trajectories) {
        div_stats.push_back(divergence_statistic(records));
        final_gaps.push_back(rank_one_gap(records.back()).gap);
        if (records.back().unit.is_zero() && config.v.has_value()) {
            data.degenerate = true;
        }
    }

    data.verdict = make_verdict(data.report, estimate, rates, div_stats, median_of(final_gaps),
                                config.thresholds);
    return data;
}

void write_verdict_json(std::ostream& out, const Verdict& v) {
    out << "{\"regime\":" << json_quote(to_string(v.prediction.regime))
        << ",\"summary\":" << json_quote(v.prediction.summary)
        << ",\"p\":" << opt_num_json(v.prediction.p_const)
        << ",\"q\":" << opt_num_json(v.prediction.q_const)
        << ",\"common_left_eigenvector\":" << opt_vec_json(v.prediction.common_left_eigenvector)
        << ",\"lambda1_hat\":" << json_number(v.estimate.lambda1_hat)
        << ",\"lambda2_hat\":" << json_number(v.estimate.lambda2_hat)
        << ",\"stderr1\":" << json_number(v.estimate.stderr1)
        << ",\"stderr2\":" << json_number(v.estimate.stderr2)
        << ",\"gap\":" << json_number(v.estimate.gap)
        << ",\"gap_tol\":" << json_number(v.gap_tol)
        << ",\"n_steps\":" << v.estimate.n_steps
        << ",\"n_trajectories\":" << v.estimate.n_trajectories << ",\"rates\":[";
    for (std::size_t i = 0; i < v.rates.size(); ++i) {
        const RateVerdict& r = v.rates[i];
        if (i > 0) {
            out << ',';
        }
        out << "{\"quantity\":" << json_quote(to_string(r.quantity))
            << ",\"classification\":" << json_quote(to_string(r.classification))
            << ",\"fitted_rate\":" << json_number(r.fitted_rate) << ",\"window\":[" << r.window_lo
            << ',' << r.window_hi << "],\"residual\":" << json_number(r.residual)
            << ",\"had_zeros\":" << (r.had_zeros ? "true" : "false") << '}';
    }
    out << "],\"divergence_stat\":{\"median\":" << json_number(v.divergence_stat_median)
        << ",\"min\":" << json_number(v.divergence_stat_min)
        << ",\"max\":" << json_number(v.divergence_stat_max)
        << "},\"final_rank_one_gap_median\":" << json_number(v.final_rank_one_gap_median)
        << ",\"claims\":[";
    for (std::size_t i = 0; i < v.claims.size(); ++i) {
        const ClaimResult& c = v.claims[i];
        if (i > 0) {
            out << ',';
        }
        out << "{\"name\":" << json_quote(c.name)
            << ",\"decisive\":" << (c.decisive ? "true" : "false")
            << ",\"agree\":" << (c.agree ? "true" : "false") << ",\"note\":" << json_quote(c.note)
            << '}';
    }
    out << "],\"all_agree\":" << (v.all_agree ? "true" : "false") << "}\n";
}

void write_verdict_csv(std::ostream& out, const Verdict& v) {
    out << "key,value\n";
    out << "regime," << to_string(v.prediction.regime) << '\n';
    if (v.prediction.p_const) {
        out << "p," << csv_cell(*v.prediction.p_const) << '\n';
        out << "q," << csv_cell(*v.prediction.q_const) << '\n';
    }
    out << "lambda1_hat," << csv_cell(v.estimate.lambda1_hat) << '\n';
    out << "lambda2_hat," << csv_cell(v.estimate.lambda2_hat) << '\n';
    out << "stderr1," << csv_cell(v.estimate.stderr1) << '\n';
    out << "stderr2," << csv_cell(v.estimate.stderr2) << '\n';
    out << "gap," << csv_cell(v.estimate.gap) << '\n';
    out << "gap_tol," << csv_cell(v.gap_tol) << '\n';
    out << "n_steps," << v.estimate.n_steps << '\n';
    out << "n_trajectories," << v.estimate.n_trajectories << '\n';
    for (const RateVerdict& r : v.rates) {
        out << "rate_" << to_string(r.quantity) << ',' << to_string(r.classification) << '\n';
        out << "rate_" << to_string(r.quantity) << "_slope," << csv_cell(r.fitted_rate) << '\n';
    }
    out << "divergence_stat_median," << csv_cell(v.divergence_stat_median) << '\n';
    out << "final_rank_one_gap_median," << csv_cell(v.final_rank_one_gap_median) << '\n';
    for (const ClaimResult& c : v.claims) {
        out << "claim_" << c.name << ',' << (c.decisive ? (c.agree ? "agree" : "contradicted")
                                                        : "margin") << '\n';
    }
    out << "all_agree," << (v.all_agree ? "true" : "false") << '\n';
}

}  // namespace

int cmd_verify(const RunConfig& config, std::ostream& out) {
    VerifyData data;
    try {
        data = run_verify(config);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("verify: ") + e.what());
    }

    if (config.format == OutputFormat::Csv) {
        write_verdict_csv(out, data.verdict);
    } else {
        write_verdict_json(out, data.verdict);
    }

    if (data.degenerate) {
        return kExitDegenerate;
    }
    return data.verdict.all_agree ? kExitOk : kExitContradiction;
}

}  // namespace matprod
