#pragma once

#include "matprod/matrix2.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace matprod {

/// The finite family {A(0), ..., A(s-1)} together with a positive probability
/// vector (p_0, ..., p_{s-1}) summing to 1. Symbols drawn i.i.d. from this
/// vector drive the random product.
class MatrixEnsemble {
public:
    /// Validates: at least one member, matching lengths, every p_k > 0,
    /// sum p_k == 1 within 1e-12. Throws std::invalid_argument otherwise.
    MatrixEnsemble(std::vector<Matrix2> matrices, std::vector<double> probs);

    std::size_t size() const { return matrices_.size(); }
    const std::vector<Matrix2>& matrices() const { return matrices_; }
    const std::vector<double>& probs() const { return probs_; }
    const Matrix2& matrix(std::size_t k) const { return matrices_[k]; }
    double prob(std::size_t k) const { return probs_[k]; }

    /// Sum of all members; its zero pattern decides the structural regime.
    Matrix2 member_sum() const;

    MatrixEnsemble transposed() const;

    /// Every member multiplied by the same positive factor.
    MatrixEnsemble scaled(double factor) const;

    /// Smallest strictly positive entry over all members (+inf if all zero).
    double smallest_nonnull_entry() const;
    /// Largest entry over all members.
    double largest_entry() const;

private:
    std::vector<Matrix2> matrices_;
    std::vector<double> probs_;
};

enum class Regime {
    RankOneMember,
    EventuallyPositive,
    TriangularUpper,
    TriangularLower,
    AllDiagonal,
    AntidiagonalPresent,
    Undetermined,
};

enum class LyapunovOrder {
    Lambda2LessLambda1,
    Equal,
    Undetermined,
};

enum class ColumnConvergence {
    ExponentialSameLimit,
    ExponentialDistinctLimits,
    SubExponential,
    ConstantColumns,
    Divergent,
    Undetermined,
};

const char* to_string(Regime r);
const char* to_string(LyapunovOrder o);
const char* to_string(ColumnConvergence c);

/// Structural classification plus the analytic constants and the behavior the
/// theory predicts for the classified regime.
struct RegimeReport {
    Regime regime = Regime::Undetermined;

    /// Geometric weighted means of the diagonal entries, present for the
    /// triangular and diagonal regimes only.
    std::optional<double> p_const;
    std::optional<double> q_const;
    /// Raw difference sum_k p_k (log a(k) - log d(k)); exposed so callers can
    /// see how close a p == q tie was.
    std::optional<double> pq_log_margin;

    LyapunovOrder expected_lyapunov_order = LyapunovOrder::Undetermined;
    ColumnConvergence expected_column_convergence = ColumnConvergence::Undetermined;

    std::optional<ColumnVector2> common_left_eigenvector;

    std::string summary;

    bool pq_equal() const;
};

/// Classify the ensemble. Precedence:
///   1. RankOneMember        -- some member has zero determinant
///   2. EventuallyPositive   -- member sum not triangular and some member has
///                              at least three nonnull entries
///   3. TriangularUpper/Lower-- member sum triangular, not diagonal
///   4. AllDiagonal          -- every member diagonal with two nonnull entries
///   5. AntidiagonalPresent  -- every member has exactly two nonnull entries
///                              and at least one is antidiagonal
/// Anything else (unreachable for valid rank-2 families) is Undetermined.
RegimeReport classify(const MatrixEnsemble& ensemble);

/// p = exp(sum_k p_k log a(k)), q = exp(sum_k p_k log d(k)), computed in the
/// log domain. Throws std::domain_error if a diagonal entry is zero.
std::pair<double, double> pq_constants(const MatrixEnsemble& ensemble);

/// A row direction v with v A(k) = lambda_k v for every member, within
/// relative residual 1e-10, or absent when the members share no left
/// eigendirection. Canonicalized via canonical_direction.
std::optional<ColumnVector2> common_left_eigenvector(const MatrixEnsemble& ensemble);

/// sum_k p_k log |det A(k)|; -infinity when a member is singular.
double expected_log_det(const MatrixEnsemble& ensemble);

}  // namespace matprod
