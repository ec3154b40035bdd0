#include "matprod/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace matprod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbSumTol = 1e-12;
constexpr double kEigenResidualTol = 1e-10;
constexpr double kPqTieTol = 1e-12;

}  // namespace

MatrixEnsemble::MatrixEnsemble(std::vector<Matrix2> matrices, std::vector<double> probs)
    : matrices_(std::move(matrices)), probs_(std::move(probs)) {
    if (matrices_.empty()) {
        throw std::invalid_argument("MatrixEnsemble: needs at least one member");
    }
    if (matrices_.size() != probs_.size()) {
        throw std::invalid_argument("MatrixEnsemble: matrices and probs differ in length");
    }
    double sum = 0.0;
    for (double p : probs_) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw std::invalid_argument("MatrixEnsemble: every probability must be positive");
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > kProbSumTol) {
        throw std::invalid_argument("MatrixEnsemble: probabilities must sum to 1");
    }
}

Matrix2 MatrixEnsemble::member_sum() const {
    double a = 0, b = 0, c = 0, d = 0;
    for (const Matrix2& m : matrices_) {
        a += m.a;
        b += m.b;
        c += m.c;
        d += m.d;
    }
    return {a, b, c, d};
}

MatrixEnsemble MatrixEnsemble::transposed() const {
    std::vector<Matrix2> t;
    t.reserve(matrices_.size());
    for (const Matrix2& m : matrices_) {
        t.push_back(m.transposed());
    }
    return {std::move(t), probs_};
}

MatrixEnsemble MatrixEnsemble::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw std::invalid_argument("MatrixEnsemble::scaled: factor must be positive");
    }
    std::vector<Matrix2> s;
    s.reserve(matrices_.size());
    for (const Matrix2& m : matrices_) {
        s.push_back({m.a * factor, m.b * factor, m.c * factor, m.d * factor});
    }
    return {std::move(s), probs_};
}

double MatrixEnsemble::smallest_nonnull_entry() const {
    double best = kInf;
    for (const Matrix2& m : matrices_) {
        for (double e : {m.a, m.b, m.c, m.d}) {
            if (e > 0.0) {
                best = std::min(best, e);
            }
        }
    }
    return best;
}

double MatrixEnsemble::largest_entry() const {
    double best = 0.0;
    for (const Matrix2& m : matrices_) {
        best = std::max(best, m.max_entry());
    }
    return best;
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::RankOneMember: return "RankOneMember";
        case Regime::EventuallyPositive: return "EventuallyPositive";
        case Regime::TriangularUpper: return "TriangularUpper";
        case Regime::TriangularLower: return "TriangularLower";
        case Regime::AllDiagonal: return "AllDiagonal";
        case Regime::AntidiagonalPresent: return "AntidiagonalPresent";
        case Regime::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

const char* to_string(LyapunovOrder o) {
    switch (o) {
        case LyapunovOrder::Lambda2LessLambda1: return "Lambda2LessLambda1";
        case LyapunovOrder::Equal: return "Equal";
        case LyapunovOrder::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

const char* to_string(ColumnConvergence c) {
    switch (c) {
        case ColumnConvergence::ExponentialSameLimit: return "ExponentialSameLimit";
        case ColumnConvergence::ExponentialDistinctLimits: return "ExponentialDistinctLimits";
        case ColumnConvergence::SubExponential: return "SubExponential";
        case ColumnConvergence::ConstantColumns: return "ConstantColumns";
        case ColumnConvergence::Divergent: return "Divergent";
        case ColumnConvergence::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

bool RegimeReport::pq_equal() const {
    if (!pq_log_margin.has_value()) {
        return false;
    }
    // The trichotomy is discontinuous at p == q; compare the log sums with a
    // tolerance scaled to their magnitude.
    const double la = std::log(p_const.value());
    const double ld = std::log(q_const.value());
    const double scale = std::max({std::fabs(la), std::fabs(ld), 1.0});
    return std::fabs(pq_log_margin.value()) <= kPqTieTol * scale;
}

std::pair<double, double> pq_constants(const MatrixEnsemble& ensemble) {
    double log_p = 0.0;
    double log_q = 0.0;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        const Matrix2& m = ensemble.matrix(k);
        if (m.a <= 0.0 || m.d <= 0.0) {
            throw std::domain_error("pq_constants: diagonal entry is zero; the constants "
                                    "are defined for rank-2 triangular or diagonal members");
        }
        log_p += ensemble.prob(k) * std::log(m.a);
        log_q += ensemble.prob(k) * std::log(m.d);
    }
    return {std::exp(log_p), std::exp(log_q)};
}

double expected_log_det(const MatrixEnsemble& ensemble) {
    double sum = 0.0;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        const double det = std::fabs(ensemble.matrix(k).det());
        if (det == 0.0) {
            return -kInf;
        }
        sum += ensemble.prob(k) * std::log(det);
    }
    return sum;
}

std::optional<ColumnVector2> common_left_eigenvector(const MatrixEnsemble& ensemble) {
    // A scalar member accepts every direction, so candidates come from the
    // first non-scalar member; each candidate is then checked against all
    // members with a relative residual test.
    const Matrix2* pivot = nullptr;
    for (const Matrix2& m : ensemble.matrices()) {
        if (!m.is_scalar()) {
            pivot = &m;
            break;
        }
    }
    if (pivot == nullptr) {
        return ColumnVector2{1.0, 0.0};  // all members scalar: any direction
    }

    const LeftEigenSystem sys = left_eigenvectors(*pivot);
    for (const EigenPair& cand : sys.pairs) {
        const ColumnVector2& v = cand.direction;
        bool ok = true;
        for (const Matrix2& m : ensemble.matrices()) {
            const ColumnVector2 image = apply_left(v, m);
            const double vv = v.x * v.x + v.y * v.y;
            const double lambda = (image.x * v.x + image.y * v.y) / vv;
            const double residual =
                std::fabs(image.x - lambda * v.x) + std::fabs(image.y - lambda * v.y);
            if (residual > kEigenResidualTol * image.norm1()) {
                ok = false;
                break;
            }
        }
        if (ok) {
            return v;
        }
    }
    return std::nullopt;
}

namespace {

void fill_triangular_predictions(RegimeReport& report, const MatrixEnsemble& ensemble,
                                 bool upper) {
    auto [p, q] = pq_constants(ensemble);
    double margin = 0.0;
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
        const Matrix2& m = ensemble.matrix(k);
        margin += ensemble.prob(k) * (std::log(m.a) - std::log(m.d));
    }
    report.p_const = p;
    report.q_const = q;
    report.pq_log_margin = margin;

    if (report.pq_equal()) {
        report.expected_lyapunov_order = LyapunovOrder::Equal;
        report.expected_column_convergence = ColumnConvergence::SubExponential;
        report.summary = std::string(to_string(report.regime)) +
                         "; p=q: predict sub-exponential same-limit columns, lambda1=lambda2";
        return;
    }
    report.expected_lyapunov_order = LyapunovOrder::Lambda2LessLambda1;
    // For the upper family the dominant diagonal decides whether the second
    // column keeps its own limit; the lower family mirrors it.
    const bool distinct_limits = upper ? (margin < 0.0) : (margin > 0.0);
    if (distinct_limits) {
        report.expected_column_convergence = ColumnConvergence::ExponentialDistinctLimits;
        report.summary = std::string(to_string(report.regime)) +
                         "; predict exponential convergence, lambda2<lambda1, "
                         "limit depends on the sampled sequence";
    } else {
        report.expected_column_convergence = ColumnConvergence::ExponentialSameLimit;
        report.summary = std::string(to_string(report.regime)) +
                         "; predict exponential same-limit columns, lambda2<lambda1";
    }
}

}  // namespace

RegimeReport classify(const MatrixEnsemble& ensemble) {
    RegimeReport report;
    report.common_left_eigenvector = common_left_eigenvector(ensemble);

    bool any_rank_one = false;
    bool any_three_entries = false;
    bool any_antidiagonal = false;
    bool all_two_entries = true;
    for (const Matrix2& m : ensemble.matrices()) {
        if (m.det() == 0.0) {
            any_rank_one = true;
        }
        if (m.nonnull_entries() >= 3) {
            any_three_entries = true;
        }
        if (m.nonnull_entries() != 2) {
            all_two_entries = false;
        }
        if (m.is_antidiagonal()) {
            any_antidiagonal = true;
        }
    }

    if (any_rank_one) {
        report.regime = Regime::RankOneMember;
        report.expected_lyapunov_order = LyapunovOrder::Lambda2LessLambda1;
        // Once the rank-1 member appears the column space is a single ray, so
        // both normalized columns are constant and equal from then on.
        report.expected_column_convergence = ColumnConvergence::ExponentialSameLimit;
        report.summary = "RankOneMember; normalized columns become constant and equal "
                         "once a rank-1 member appears; lambda2=-inf";
        return report;
    }

    const Matrix2 sum = ensemble.member_sum();
    const bool sum_upper = sum.c == 0.0;
    const bool sum_lower = sum.b == 0.0;

    if (!sum_upper && !sum_lower) {
        if (any_three_entries) {
            report.regime = Regime::EventuallyPositive;
            report.expected_lyapunov_order = LyapunovOrder::Lambda2LessLambda1;
            report.expected_column_convergence = ColumnConvergence::ExponentialSameLimit;
            report.summary = "EventuallyPositive; predict lambda2<lambda1, "
                             "exponential same-limit columns";
            return report;
        }
        if (all_two_entries && any_antidiagonal) {
            report.regime = Regime::AntidiagonalPresent;
            report.expected_lyapunov_order = LyapunovOrder::Equal;
            report.expected_column_convergence = ColumnConvergence::Divergent;
            report.summary = "AntidiagonalPresent; predict lambda1=lambda2, column divergence";
            return report;
        }
        report.regime = Regime::Undetermined;
        report.summary = "Undetermined; the member pattern matches no analyzed case";
        return report;
    }

    if (sum_upper && sum_lower) {
        report.regime = Regime::AllDiagonal;
        auto [p, q] = pq_constants(ensemble);
        double margin = 0.0;
        for (std::size_t k = 0; k < ensemble.size(); ++k) {
            const Matrix2& m = ensemble.matrix(k);
            margin += ensemble.prob(k) * (std::log(m.a) - std::log(m.d));
        }
        report.p_const = p;
        report.q_const = q;
        report.pq_log_margin = margin;
        report.expected_column_convergence = ColumnConvergence::ConstantColumns;
        if (report.pq_equal()) {
            report.expected_lyapunov_order = LyapunovOrder::Equal;
            report.summary = "AllDiagonal; p=q: lambda1=lambda2, constant columns, "
                             "P_nV may oscillate";
        } else {
            report.expected_lyapunov_order = LyapunovOrder::Lambda2LessLambda1;
            report.summary = "AllDiagonal; predict lambda2<lambda1, constant columns, "
                             "exponential P_nV convergence";
        }
        return report;
    }

    report.regime = sum_upper ? Regime::TriangularUpper : Regime::TriangularLower;
    fill_triangular_predictions(report, ensemble, sum_upper);
    return report;
}

}  // namespace matprod
