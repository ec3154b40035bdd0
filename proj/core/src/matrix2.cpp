#include "matprod/matrix2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace matprod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_entry(double value, const char* name) {
    if (std::isnan(value)) {
        throw std::invalid_argument(std::string("Matrix2: entry ") + name + " is NaN");
    }
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string("Matrix2: entry ") + name + " is not finite");
    }
    if (value < 0.0) {
        throw std::invalid_argument(std::string("Matrix2: entry ") + name + " is negative");
    }
}

}  // namespace

Matrix2::Matrix2(double a_, double b_, double c_, double d_) : a(a_), b(b_), c(c_), d(d_) {
    check_entry(a, "a");
    check_entry(b, "b");
    check_entry(c, "c");
    check_entry(d, "d");
}

double Matrix2::max_entry() const {
    return std::max(std::max(a, b), std::max(c, d));
}

int Matrix2::nonnull_entries() const {
    return (a > 0.0) + (b > 0.0) + (c > 0.0) + (d > 0.0);
}

Matrix2 multiply(const Matrix2& lhs, const Matrix2& rhs) {
    const double ra = lhs.a * rhs.a + lhs.b * rhs.c;
    const double rb = lhs.a * rhs.b + lhs.b * rhs.d;
    const double rc = lhs.c * rhs.a + lhs.d * rhs.c;
    const double rd = lhs.c * rhs.b + lhs.d * rhs.d;
    if (!std::isfinite(ra) || !std::isfinite(rb) || !std::isfinite(rc) || !std::isfinite(rd)) {
        throw std::range_error("multiply: product entry overflowed to infinity; "
                               "long chains must use ScaledProduct");
    }
    return {ra, rb, rc, rd};
}

SingularPair singular_values(const Matrix2& m) {
    const double s = m.frobenius_sq();
    if (s == 0.0) {
        return {0.0, 0.0};
    }
    const double abs_det = std::fabs(m.det());
    // S >= 2|det| always holds (AM-GM on the entry pairs), so this difference
    // is the only place cancellation can bite; it equals (sigma1 - sigma2)^2.
    const double diff = std::max(0.0, s - 2.0 * abs_det);
    const double root = std::sqrt(diff * (s + 2.0 * abs_det));
    const double sigma1 = std::sqrt(0.5 * (s + root));
    const double sigma2 = sigma1 > 0.0 ? abs_det / sigma1 : 0.0;
    return {sigma1, std::min(sigma1, sigma2)};
}

double hilbert_distance(const Matrix2& m) {
    const bool main_pos = m.a > 0.0 && m.d > 0.0;
    const bool anti_pos = m.b > 0.0 && m.c > 0.0;
    if (main_pos && anti_pos) {
        // log(ad) - log(bc) evaluated as a sum of logs so huge entry products
        // cannot overflow.
        return std::fabs(std::log(m.a) + std::log(m.d) - std::log(m.b) - std::log(m.c));
    }
    if (main_pos || anti_pos) {
        return kInf;
    }
    return 0.0;  // both cross products vanish: rank-deficient pattern
}

double dinf_distance(const Matrix2& m) {
    const double col1 = m.a + m.c;
    const double col2 = m.b + m.d;
    if (col1 <= 0.0) {
        throw std::domain_error("dinf_distance: first column is null");
    }
    if (col2 <= 0.0) {
        throw std::domain_error("dinf_distance: second column is null");
    }
    return std::fabs(m.a / col1 - m.b / col2);
}

double birkhoff_coefficient(const Matrix2& m) {
    // sqrt(a)*sqrt(d) instead of sqrt(a*d): immune to overflow/underflow of
    // the raw products.
    const double main_root = std::sqrt(m.a) * std::sqrt(m.d);
    const double anti_root = std::sqrt(m.b) * std::sqrt(m.c);
    const double denom = main_root + anti_root;
    if (denom == 0.0) {
        // Zero row or zero column: the image degenerates and the matrix is
        // reported as non-contracting.
        return 1.0;
    }
    return std::fabs(main_root - anti_root) / denom;
}

double ColumnVector2::norm1() const {
    return std::fabs(x) + std::fabs(y);
}

std::pair<std::optional<ColumnVector2>, std::optional<ColumnVector2>>
normalized_columns(const Matrix2& m) {
    std::optional<ColumnVector2> first;
    std::optional<ColumnVector2> second;
    const double n1 = m.a + m.c;
    const double n2 = m.b + m.d;
    if (n1 > 0.0) {
        first = ColumnVector2{m.a / n1, m.c / n1};
    }
    if (n2 > 0.0) {
        second = ColumnVector2{m.b / n2, m.d / n2};
    }
    return {first, second};
}

ColumnVector2 apply(const Matrix2& m, const ColumnVector2& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

ColumnVector2 apply_left(const ColumnVector2& v, const Matrix2& m) {
    return {v.x * m.a + v.y * m.c, v.x * m.b + v.y * m.d};
}

ColumnVector2 canonical_direction(double x, double y) {
    const double n = std::fabs(x) + std::fabs(y);
    if (n == 0.0) {
        return {0.0, 0.0};
    }
    double cx = x / n;
    double cy = y / n;
    const double lead = cx != 0.0 ? cx : cy;
    if (lead < 0.0) {
        cx = -cx;
        cy = -cy;
    }
    // flush negative zeros so serialized directions are canonical too
    return {cx + 0.0, cy + 0.0};
}

LeftEigenSystem left_eigenvectors(const Matrix2& m) {
    LeftEigenSystem out;

    if (m.is_scalar()) {
        // Any direction works; return the canonical axes.
        out.pairs.push_back({m.a, ColumnVector2{1.0, 0.0}});
        out.pairs.push_back({m.a, ColumnVector2{0.0, 1.0}});
        return out;
    }

    const double trace = m.a + m.d;
    const double det = m.det();
    const double disc = trace * trace - 4.0 * det;
    if (disc < 0.0) {
        // Unreachable for nonnegative entries ((a-d)^2 + 4bc >= 0); kept so
        // the contract is total.
        out.complex_pair = true;
        return out;
    }

    const double root = std::sqrt(disc);
    const double lambda1 = 0.5 * (trace + root);
    const double lambda2 = 0.5 * (trace - root);

    // Left eigenvectors of M are right eigenvectors of M^T = [[a, c], [b, d]].
    // The null direction of (M^T - lambda I) comes from whichever row of that
    // matrix is larger in magnitude.
    auto direction_for = [&m](double lambda) -> ColumnVector2 {
        const double r1x = m.a - lambda, r1y = m.c;
        const double r2x = m.b, r2y = m.d - lambda;
        const double w1 = std::fabs(r1x) + std::fabs(r1y);
        const double w2 = std::fabs(r2x) + std::fabs(r2y);
        if (w1 >= w2 && w1 > 0.0) {
            return canonical_direction(-r1y, r1x);
        }
        if (w2 > 0.0) {
            return canonical_direction(-r2y, r2x);
        }
        return canonical_direction(1.0, 0.0);
    };

    out.pairs.push_back({lambda1, direction_for(lambda1)});
    if (disc > 0.0) {
        out.pairs.push_back({lambda2, direction_for(lambda2)});
    }
    // disc == 0 and not scalar: defective, single eigendirection.
    return out;
}

}  // namespace matprod
