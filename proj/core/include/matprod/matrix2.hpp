#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace matprod {

/// A 2x2 matrix with nonnegative finite entries, laid out
///
///     [ a  b ]
///     [ c  d ]
///
/// Construction rejects NaN, infinities and negative entries, so a value of
/// this type always satisfies the cone constraints the rest of the library
/// relies on.
struct Matrix2 {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    Matrix2() = default;
    Matrix2(double a_, double b_, double c_, double d_);

    static Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }

    Matrix2 transposed() const { return {a, c, b, d}; }

    /// Signed determinant ad - bc.
    double det() const { return a * d - b * c; }

    /// Entrywise sum; for nonnegative matrices this is the norm used for
    /// all normalization in this library.
    double norm1() const { return a + b + c + d; }

    double frobenius_sq() const { return a * a + b * b + c * c + d * d; }

    double max_entry() const;
    int nonnull_entries() const;

    bool is_zero() const { return a == 0.0 && b == 0.0 && c == 0.0 && d == 0.0; }
    bool is_diagonal() const { return b == 0.0 && c == 0.0; }
    bool is_antidiagonal() const { return a == 0.0 && d == 0.0 && b > 0.0 && c > 0.0; }
    bool is_upper_triangular() const { return c == 0.0; }
    bool is_lower_triangular() const { return b == 0.0; }
    bool is_scalar() const { return is_diagonal() && a == d; }

    bool operator==(const Matrix2&) const = default;
};

/// Exact 2x2 product. Throws std::range_error if an entry overflows to
/// infinity; long chains must go through ScaledProduct instead.
Matrix2 multiply(const Matrix2& lhs, const Matrix2& rhs);

inline Matrix2 operator*(const Matrix2& lhs, const Matrix2& rhs) { return multiply(lhs, rhs); }

/// The two singular values of a 2x2 matrix, ordered sigma1 >= sigma2 >= 0.
/// They satisfy sigma1^2 + sigma2^2 = a^2+b^2+c^2+d^2 and
/// sigma1 * sigma2 = |ad - bc|.
struct SingularPair {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

/// Closed-form singular values.  sigma1 comes from the plus branch of the
/// quadratic for the eigenvalues of M^T M, with the radicand factored as
/// (S - 2|det|)(S + 2|det|), S = a^2+b^2+c^2+d^2, to avoid cancellation.
/// sigma2 is recovered as |det| / sigma1, which stays accurate when
/// sigma2 << sigma1.  The zero matrix maps to (0, 0).
SingularPair singular_values(const Matrix2& m);

/// Hilbert projective distance between the two columns: |log(ad) - log(bc)|.
/// Returns +infinity when exactly one of ad, bc vanishes, and 0 when both do
/// (rank-deficient pattern, where the ratio is taken as 1).
double hilbert_distance(const Matrix2& m);

/// Max-norm distance between the norm-1-normalized columns:
/// |a/(a+c) - b/(b+d)|, a value in [0, 1].
/// Throws std::domain_error naming the offending column if a column is null.
double dinf_distance(const Matrix2& m);

/// Birkhoff contraction coefficient of the matrix acting on the positive
/// cone: |sqrt(ad) - sqrt(bc)| / (sqrt(ad) + sqrt(bc)), which equals
/// tanh(hilbert_distance / 4) for positive matrices.  Matrices with a zero
/// row or zero column (ad = bc = 0) are reported as non-contracting: 1.
double birkhoff_coefficient(const Matrix2& m);

/// A real 2-vector. Used both for column vectors and, in eigen contexts,
/// for row directions.
struct ColumnVector2 {
    double x = 0.0;
    double y = 0.0;

    double norm1() const;

    bool operator==(const ColumnVector2&) const = default;
};

/// Each nonnull column divided by its norm-1; a null column is absent.
std::pair<std::optional<ColumnVector2>, std::optional<ColumnVector2>>
normalized_columns(const Matrix2& m);

/// m * v
ColumnVector2 apply(const Matrix2& m, const ColumnVector2& v);

/// v^T m, returned as a plain 2-vector.
ColumnVector2 apply_left(const ColumnVector2& v, const Matrix2& m);

/// Scale to norm-1 == 1 and flip the sign so the first nonzero coordinate
/// is positive. Makes projective comparisons deterministic.
ColumnVector2 canonical_direction(double x, double y);

struct EigenPair {
    double value = 0.0;
    ColumnVector2 direction;  // row direction, canonicalized
};

/// Real left eigenpairs (v M = lambda v), eigenvalues descending.
/// A defective matrix yields a single pair; a scalar matrix yields the two
/// canonical axes. For nonnegative entries the discriminant
/// (a-d)^2 + 4bc is never negative, so complex_pair stays false; the flag
/// exists for interface completeness.
struct LeftEigenSystem {
    std::vector<EigenPair> pairs;
    bool complex_pair = false;
};

LeftEigenSystem left_eigenvectors(const Matrix2& m);

}  // namespace matprod
