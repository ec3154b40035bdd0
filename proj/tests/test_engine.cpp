#include "matprod/engine.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <map>

using namespace matprod;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixEnsemble single(const Matrix2& m) { return {{m}, {1.0}}; }

}  // namespace

TEST_CASE("step normalizes and accumulates the log scale") {
    ScaledProduct state = ScaledProduct::identity();
    state = step(state, Matrix2{1, 3, 0, 1});
    CHECK(state.unit.a == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(state.unit.b == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(state.unit.c == 0.0);
    CHECK(state.unit.d == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(state.log_scale == doctest::Approx(std::log(5.0)).epsilon(1e-15));
    CHECK(state.unit.norm1() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("the zero product is absorbing") {
    ScaledProduct state = ScaledProduct::identity();
    state = step(state, Matrix2{0, 1, 0, 1});   // first column dies
    state = step(state, Matrix2{1, 0, 0, 0});   // and now everything
    CHECK(state.is_zero());
    CHECK(state.log_scale == -kInf);
    const ScaledProduct after = step(state, Matrix2{5, 5, 5, 5});
    CHECK(after.is_zero());
    CHECK(after.log_scale == -kInf);
}

TEST_CASE("sixty diagonal steps reconstruct 2^60 without overflow") {
    ScaledProduct state = ScaledProduct::identity();
    for (int i = 0; i < 60; ++i) {
        state = step(state, Matrix2{2, 0, 0, 1});
    }
    const double alpha = std::exp(state.log_scale) * state.unit.a;
    CHECK(alpha == doctest::Approx(std::pow(2.0, 60)).epsilon(1e-12));
    const double delta = std::exp(state.log_scale) * state.unit.d;
    CHECK(delta == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("run reproduces the additive triangular closed form") {
    const MatrixEnsemble e({Matrix2{1, 1, 0, 1}, Matrix2{1, 3, 0, 1}}, {0.5, 0.5});
    const std::vector<std::uint32_t> symbols = {0, 1, 1, 0, 1, 0, 0, 1, 1, 1};
    double b_sum = 0.0;
    for (std::uint32_t s : symbols) {
        b_sum += s == 0 ? 1.0 : 3.0;
    }
    const auto records = run(e, SymbolSource::fixed(symbols), std::nullopt, 10, 1);
    REQUIRE(records.size() == 10);
    const Matrix2& unit = records.back().unit;
    const double norm = 2.0 + b_sum;
    CHECK(unit.a == doctest::Approx(1.0 / norm).epsilon(1e-12));
    CHECK(unit.b == doctest::Approx(b_sum / norm).epsilon(1e-12));
    CHECK(unit.c == 0.0);
    CHECK(unit.d == doctest::Approx(1.0 / norm).epsilon(1e-12));
}

TEST_CASE("run tracks P_n V for the dominant-second-diagonal family") {
    const MatrixEnsemble e = single(Matrix2{1, 1, 0, 2});
    const std::vector<std::uint32_t> symbols(20, 0);
    const auto records =
        run(e, SymbolSource::fixed(symbols), ColumnVector2{0.0, 1.0}, 20, 1);
    const double s_n = 1.0 - std::pow(2.0, -20);
    REQUIRE(records.back().pnv.has_value());
    CHECK(records.back().pnv->x == doctest::Approx(s_n / (s_n + 1.0)).epsilon(1e-14));
    CHECK(records.back().pnv->y == doctest::Approx(1.0 / (s_n + 1.0)).epsilon(1e-14));
}

TEST_CASE("a single step reproduces the plain matrix observables") {
    const Matrix2 m{2, 1, 1, 1};
    const auto records = run(single(m), SymbolSource::fixed({0}), std::nullopt, 1, 1);
    REQUIRE(records.size() == 1);
    const TrajectoryRecord& r = records.front();
    const SingularPair sv = singular_values(m);
    CHECK(r.log_sigma1 == doctest::Approx(std::log(sv.sigma1)).epsilon(1e-12));
    CHECK(r.log_sigma2 == doctest::Approx(std::log(sv.sigma2)).epsilon(1e-12));
    CHECK(r.d_h == doctest::Approx(hilbert_distance(m)).epsilon(1e-12));
    REQUIRE(r.d_inf.has_value());
    CHECK(*r.d_inf == doctest::Approx(dinf_distance(m)).epsilon(1e-12));
    auto [c1, c2] = normalized_columns(m);
    CHECK(r.col1->x == doctest::Approx(c1->x).epsilon(1e-14));
    CHECK(r.col2->x == doctest::Approx(c2->x).epsilon(1e-14));
}

TEST_CASE("run validates its inputs before stepping") {
    const MatrixEnsemble e = single(Matrix2::identity());
    CHECK_THROWS_AS(run(e, SymbolSource::iid(1), std::nullopt, 0, 1), std::domain_error);
    CHECK_THROWS_AS(run(e, SymbolSource::iid(1), std::nullopt, 10, 0), std::domain_error);
    CHECK_THROWS_AS(run(e, SymbolSource::iid(1), ColumnVector2{0.0, 0.0}, 10, 1),
                    std::domain_error);
    CHECK_THROWS_AS(run(e, SymbolSource::iid(1), ColumnVector2{-1.0, 1.0}, 10, 1),
                    std::domain_error);
    CHECK_THROWS_AS(run(e, SymbolSource::fixed({0, 0}), std::nullopt, 10, 1), std::domain_error);
    CHECK_THROWS_AS(run(e, SymbolSource::fixed({0, 7}), std::nullopt, 2, 1), std::domain_error);
}

TEST_CASE("records appear at multiples of record_every plus the final step") {
    const MatrixEnsemble e = single(Matrix2::identity());
    const auto records = run(e, SymbolSource::iid(3), std::nullopt, 10, 3);
    REQUIRE(records.size() == 4);
    CHECK(records[0].step == 3);
    CHECK(records[1].step == 6);
    CHECK(records[2].step == 9);
    CHECK(records[3].step == 10);
}

TEST_CASE("sample_symbols is deterministic and respects the probabilities") {
    CHECK(sample_symbols(9, {1.0}, 100) == std::vector<std::uint32_t>(100, 0));
    CHECK(sample_symbols(42, {0.5, 0.5}, 1000) == sample_symbols(42, {0.5, 0.5}, 1000));

    const auto symbols = sample_symbols(1234, {0.5, 0.5}, 100000);
    double frequency = 0.0;
    for (std::uint32_t s : symbols) {
        frequency += s;
    }
    frequency /= static_cast<double>(symbols.size());
    // binomial concentration: 6 sigma is just under 0.01 at n = 1e5
    CHECK(std::fabs(frequency - 0.5) < 0.01);
}

TEST_CASE("scaled stepping matches direct multiplication on short products") {
    SplitMix64 rng(57);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Matrix2> members;
        for (int k = 0; k < 3; ++k) {
            auto e = [&rng] { return static_cast<double>(rng.next_u64() % 4); };
            Matrix2 m{e(), e(), e(), e()};
            if (m.is_zero()) {
                m = Matrix2::identity();
            }
            members.push_back(m);
        }
        const MatrixEnsemble e(members, {0.25, 0.25, 0.5});
        const auto symbols = sample_symbols(rng.next_u64(), e.probs(), 30);

        Matrix2 direct = Matrix2::identity();
        ScaledProduct state = ScaledProduct::identity();
        bool overflowed = false;
        for (std::uint32_t s : symbols) {
            try {
                direct = direct * e.matrix(s);
            } catch (const std::range_error&) {
                overflowed = true;
                break;
            }
            state = step(state, e.matrix(s));
        }
        if (overflowed) {
            continue;
        }
        const double scale = std::exp(state.log_scale);
        const std::pair<double, double> entries[4] = {{state.unit.a, direct.a},
                                                      {state.unit.b, direct.b},
                                                      {state.unit.c, direct.c},
                                                      {state.unit.d, direct.d}};
        for (const auto& [got, want] : entries) {
            if (want == 0.0) {
                CHECK(std::fabs(got * scale) <= 1e-10);
            } else {
                CHECK(got * scale == doctest::Approx(want).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("log singular values add up to the running log determinant") {
    const MatrixEnsemble e({Matrix2{2, 2, 0, 1}, Matrix2{1, 1, 1, 2}}, {0.5, 0.5});
    const auto symbols = sample_symbols(77, e.probs(), 400);
    const auto records = run(e, SymbolSource::fixed(symbols), std::nullopt, 400, 1);
    double log_det = 0.0;
    std::size_t idx = 0;
    for (std::int64_t n = 1; n <= 400; ++n) {
        log_det += std::log(std::fabs(e.matrix(symbols[n - 1]).det()));
        const TrajectoryRecord& r = records[idx++];
        REQUIRE(r.step == n);
        CHECK(r.log_sigma1 + r.log_sigma2 == doctest::Approx(log_det).epsilon(1e-8));
        CHECK(r.log_sigma1 >= r.log_sigma2);
    }
}

TEST_CASE("emitted columns equal the normalized columns of the unit matrix") {
    const MatrixEnsemble e({Matrix2{1, 1, 1, 2}, Matrix2{2, 1, 0, 1}}, {0.5, 0.5});
    const auto records = run(e, SymbolSource::iid(5), std::nullopt, 200, 7);
    for (const TrajectoryRecord& r : records) {
        CHECK(r.unit.norm1() == doctest::Approx(1.0).epsilon(1e-14));
        auto [c1, c2] = normalized_columns(r.unit);
        REQUIRE(r.col1.has_value() == c1.has_value());
        REQUIRE(r.col2.has_value() == c2.has_value());
        if (c1) {
            CHECK(r.col1->x == c1->x);
            CHECK(r.col1->y == c1->y);
        }
        if (c2) {
            CHECK(r.col2->x == c2->x);
            CHECK(r.col2->y == c2->y);
        }
    }
}

TEST_CASE("log scale stays inside the entry-growth envelope") {
    const MatrixEnsemble e({Matrix2{2, 1, 1, 1}, Matrix2{1, 2, 1, 3}}, {0.5, 0.5});
    const double lo = std::log(e.smallest_nonnull_entry());
    const double hi = std::log(2.0 * e.largest_entry());
    ScaledProduct state = ScaledProduct::identity();
    const auto symbols = sample_symbols(21, e.probs(), 500);
    for (std::int64_t n = 1; n <= 500; ++n) {
        state = step(state, e.matrix(symbols[n - 1]));
        // ||P_0||_1 = 2 contributes one factor of log 2 of slack on each side
        CHECK(state.log_scale >= static_cast<double>(n) * lo - std::log(2.0));
        CHECK(state.log_scale <= static_cast<double>(n) * hi + std::log(2.0));
    }
}

TEST_CASE("pnv is a convex combination of the normalized columns") {
    const MatrixEnsemble e({Matrix2{1, 1, 1, 2}, Matrix2{2, 1, 1, 1}}, {0.5, 0.5});
    const auto records = run(e, SymbolSource::iid(8), ColumnVector2{0.3, 0.7}, 300, 11);
    for (const TrajectoryRecord& r : records) {
        REQUIRE(r.pnv.has_value());
        REQUIRE(r.col1.has_value());
        REQUIRE(r.col2.has_value());
        // solve pnv = t*col1 + (1-t)*col2 in the first coordinate
        const double denom = r.col1->x - r.col2->x;
        if (std::fabs(denom) < 1e-12) {
            CHECK(r.pnv->x == doctest::Approx(r.col1->x).epsilon(1e-9));
            continue;
        }
        const double t = (r.pnv->x - r.col2->x) / denom;
        CHECK(t >= -1e-10);
        CHECK(t <= 1.0 + 1e-10);
        CHECK(t * r.col1->y + (1.0 - t) * r.col2->y == doctest::Approx(r.pnv->y).epsilon(1e-9));
    }
}

TEST_CASE("an explicit symbol source is shared by every trajectory") {
    const MatrixEnsemble e({Matrix2{1, 1, 1, 2}, Matrix2{2, 1, 0, 1}}, {0.5, 0.5});
    const auto symbols = sample_symbols(123, e.probs(), 100);
    const auto runs =
        run_trajectories(e, SymbolSource::fixed(symbols), std::nullopt, 100, 5, 3, 2);
    REQUIRE(runs.size() == 3);
    for (std::size_t i = 0; i < runs[0].size(); ++i) {
        CHECK(runs[0][i].log_sigma1 == runs[1][i].log_sigma1);
        CHECK(runs[1][i].log_sigma1 == runs[2][i].log_sigma1);
    }
}

TEST_CASE("trajectories are identical for any thread count") {
    const MatrixEnsemble e({Matrix2{1, 1, 1, 2}, Matrix2{2, 1, 0, 1}}, {0.5, 0.5});
    const auto a = run_trajectories(e, 99, std::nullopt, 500, 10, 8, 1);
    const auto b = run_trajectories(e, 99, std::nullopt, 500, 10, 8, 8);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        REQUIRE(a[t].size() == b[t].size());
        for (std::size_t i = 0; i < a[t].size(); ++i) {
            CHECK(a[t][i].log_sigma1 == b[t][i].log_sigma1);
            CHECK(a[t][i].unit.a == b[t][i].unit.a);
            CHECK(a[t][i].unit.b == b[t][i].unit.b);
        }
    }
    // distinct trajectories draw distinct streams
    CHECK(a[0].back().unit.a != a[1].back().unit.a);
}
