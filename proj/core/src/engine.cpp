#include "matprod/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace matprod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class CategoricalSampler {
public:
    CategoricalSampler(std::uint64_t seed, const std::vector<double>& probs)
        : rng_(seed), cdf_(probs) {
        double acc = 0.0;
        for (double& c : cdf_) {
            acc += c;
            c = acc;
        }
        cdf_.back() = 1.0;  // guard against the sum rounding just below 1
    }

    std::uint32_t next() {
        const double u = rng_.next_double();
        std::uint32_t k = 0;
        while (k + 1 < cdf_.size() && u >= cdf_[k]) {
            ++k;
        }
        return k;
    }

private:
    SplitMix64 rng_;
    std::vector<double> cdf_;
};

}  // namespace

std::vector<std::uint32_t> sample_symbols(std::uint64_t seed, const std::vector<double>& probs,
                                          std::int64_t n) {
    if (probs.empty()) {
        throw std::invalid_argument("sample_symbols: empty probability vector");
    }
    CategoricalSampler sampler(seed, probs);
    std::vector<std::uint32_t> out;
    out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
    for (std::int64_t i = 0; i < n; ++i) {
        out.push_back(sampler.next());
    }
    return out;
}

SymbolSource SymbolSource::iid(std::uint64_t seed) {
    SymbolSource s;
    s.iid_ = true;
    s.seed_ = seed;
    return s;
}

SymbolSource SymbolSource::fixed(std::vector<std::uint32_t> symbols) {
    SymbolSource s;
    s.iid_ = false;
    s.symbols_ = std::move(symbols);
    return s;
}

ScaledProduct ScaledProduct::identity() {
    ScaledProduct s;
    // P_0 = I: unit = I / ||I||_1, scale 2, determinant 1.
    s.unit = Matrix2{0.5, 0.0, 0.0, 0.5};
    s.log_scale = std::log(2.0);
    s.log_det_sum = 0.0;
    return s;
}

ScaledProduct step(const ScaledProduct& state, const Matrix2& next) {
    if (state.is_zero()) {
        return state;  // absorbing
    }
    ScaledProduct out;
    const Matrix2 product = multiply(state.unit, next);
    const double norm = product.norm1();
    const double abs_det = std::fabs(next.det());
    const double log_det_sum =
        abs_det > 0.0 ? state.log_det_sum + std::log(abs_det) : -kInf;
    if (norm == 0.0) {
        out.unit = Matrix2{};
        out.log_scale = -kInf;
        out.log_det_sum = -kInf;
        return out;
    }
    out.unit = Matrix2{product.a / norm, product.b / norm, product.c / norm, product.d / norm};
    out.log_scale = state.log_scale + std::log(norm);
    out.log_det_sum = log_det_sum;
    return out;
}

std::int64_t default_record_every(std::int64_t n_steps) {
    if (n_steps <= 10'000) {
        return 1;
    }
    return (n_steps + 9'999) / 10'000;
}

namespace {

TrajectoryRecord make_record(const ScaledProduct& state, std::int64_t n, std::uint32_t symbol,
                             const std::optional<ColumnVector2>& v) {
    TrajectoryRecord rec;
    rec.step = n;
    rec.symbol = symbol;
    rec.unit = state.unit;

    if (state.is_zero()) {
        rec.log_sigma1 = -kInf;
        rec.log_sigma2 = -kInf;
        rec.d_h = 0.0;
        return rec;
    }

    const SingularPair sv = singular_values(state.unit);
    rec.log_sigma1 = state.log_scale + std::log(sv.sigma1);
    if (state.log_det_sum == -kInf) {
        rec.log_sigma2 = -kInf;
    } else {
        // log sigma2 through the determinant identity
        // log sigma1 + log sigma2 = log |det P_n|, exact in log space even
        // when sigma2 / sigma1 underflows.
        rec.log_sigma2 = std::min(state.log_det_sum - rec.log_sigma1, rec.log_sigma1);
    }

    rec.d_h = hilbert_distance(state.unit);
    const double col1_norm = state.unit.a + state.unit.c;
    const double col2_norm = state.unit.b + state.unit.d;
    if (col1_norm > 0.0 && col2_norm > 0.0) {
        // d_inf(M) == |det M| / ((a+c)(b+d)) exactly; evaluating it through
        // the running log-determinant keeps the tail resolvable long after a
        // direct column difference would drown in rounding noise.
        if (state.log_det_sum == -kInf) {
            rec.d_inf = 0.0;  // proportional columns
        } else {
            rec.d_inf = std::min(1.0, std::exp(state.log_det_sum - 2.0 * state.log_scale -
                                               std::log(col1_norm) - std::log(col2_norm)));
        }
    }
    auto [c1, c2] = normalized_columns(state.unit);
    rec.col1 = c1;
    rec.col2 = c2;

    if (v.has_value()) {
        const ColumnVector2 image = apply(state.unit, *v);
        const double n1 = image.norm1();
        if (n1 > 0.0) {
            rec.pnv = ColumnVector2{image.x / n1, image.y / n1};
        }
    }
    return rec;
}

void validate_v(const std::optional<ColumnVector2>& v) {
    if (!v.has_value()) {
        return;
    }
    if (!std::isfinite(v->x) || !std::isfinite(v->y) || v->x < 0.0 || v->y < 0.0) {
        throw std::domain_error("run: V must be nonnegative with finite entries");
    }
    if (v->x == 0.0 && v->y == 0.0) {
        throw std::domain_error("run: V must be a nonzero vector");
    }
}

}  // namespace

std::vector<TrajectoryRecord> run(const MatrixEnsemble& ensemble, const SymbolSource& source,
                                  const std::optional<ColumnVector2>& v, std::int64_t n_steps,
                                  std::int64_t record_every) {
    if (n_steps < 1) {
        throw std::domain_error("run: n_steps must be >= 1");
    }
    if (record_every < 1) {
        throw std::domain_error("run: record_every must be >= 1");
    }
    validate_v(v);
    if (!source.is_iid() &&
        static_cast<std::int64_t>(source.symbols().size()) < n_steps) {
        throw std::domain_error("run: explicit symbol sequence is shorter than n_steps");
    }
    const std::size_t s = ensemble.size();
    if (!source.is_iid()) {
        for (std::uint32_t sym : source.symbols()) {
            if (sym >= s) {
                throw std::domain_error("run: explicit symbol out of range");
            }
        }
    }

    std::optional<CategoricalSampler> sampler;
    if (source.is_iid()) {
        sampler.emplace(source.seed(), ensemble.probs());
    }

    std::vector<TrajectoryRecord> records;
    records.reserve(static_cast<std::size_t>(n_steps / record_every + 2));

    ScaledProduct state = ScaledProduct::identity();
    for (std::int64_t n = 1; n <= n_steps; ++n) {
        const std::uint32_t symbol =
            source.is_iid() ? sampler->next() : source.symbols()[static_cast<std::size_t>(n - 1)];
        state = step(state, ensemble.matrix(symbol));
        if (n % record_every == 0 || n == n_steps) {
            records.push_back(make_record(state, n, symbol, v));
        }
    }
    return records;
}

namespace {

std::vector<std::vector<TrajectoryRecord>> run_pool(
    const MatrixEnsemble& ensemble, const std::optional<ColumnVector2>& v, std::int64_t n_steps,
    std::int64_t record_every, int n_trajectories, int n_threads,
    const std::function<SymbolSource(int)>& source_for) {
    if (n_trajectories < 1) {
        throw std::domain_error("run_trajectories: n_trajectories must be >= 1");
    }
    if (n_threads <= 0) {
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads <= 0) {
            n_threads = 1;
        }
    }
    n_threads = std::min(n_threads, n_trajectories);

    std::vector<std::vector<TrajectoryRecord>> results(static_cast<std::size_t>(n_trajectories));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= n_trajectories) {
                return;
            }
            try {
                results[static_cast<std::size_t>(t)] =
                    run(ensemble, source_for(t), v, n_steps, record_every);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                return;
            }
        }
    };

    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(n_threads));
        for (int i = 0; i < n_threads; ++i) {
            threads.emplace_back(worker);
        }
        for (std::thread& th : threads) {
            th.join();
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return results;
}

}  // namespace

std::vector<std::vector<TrajectoryRecord>> run_trajectories(
    const MatrixEnsemble& ensemble, std::uint64_t master_seed,
    const std::optional<ColumnVector2>& v, std::int64_t n_steps, std::int64_t record_every,
    int n_trajectories, int n_threads) {
    return run_pool(ensemble, v, n_steps, record_every, n_trajectories, n_threads,
                    [master_seed](int t) {
                        return SymbolSource::iid(
                            SplitMix64::stream_seed(master_seed, static_cast<std::uint64_t>(t)));
                    });
}

std::vector<std::vector<TrajectoryRecord>> run_trajectories(
    const MatrixEnsemble& ensemble, const SymbolSource& source,
    const std::optional<ColumnVector2>& v, std::int64_t n_steps, std::int64_t record_every,
    int n_trajectories, int n_threads) {
    return run_pool(ensemble, v, n_steps, record_every, n_trajectories, n_threads,
                    [&source](int) { return source; });
}

}  // namespace matprod
