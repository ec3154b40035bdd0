#pragma once

#include "matprod/ensemble.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace matprod {

/// SplitMix64 (Steele, Lea, Flood, "Fast splittable pseudorandom number
/// generators"). Deterministic, and cheap to split: trajectory i of a run
/// seeded with master seed s draws from the stream seeded with
/// stream_seed(s, i), so results do not depend on thread scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    /// Uniform in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
        return mix(master + 0x9E3779B97F4A7C15ull * (index + 1));
    }

private:
    std::uint64_t state_;
};

/// n i.i.d. categorical draws from probs, deterministic given the seed.
std::vector<std::uint32_t> sample_symbols(std::uint64_t seed, const std::vector<double>& probs,
                                          std::int64_t n);

/// Where the symbol sequence omega comes from: i.i.d. sampling under the
/// ensemble probabilities (seeded), or an explicit finite sequence.
class SymbolSource {
public:
    static SymbolSource iid(std::uint64_t seed);
    static SymbolSource fixed(std::vector<std::uint32_t> symbols);

    bool is_iid() const { return iid_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint32_t>& symbols() const { return symbols_; }

private:
    SymbolSource() = default;
    bool iid_ = true;
    std::uint64_t seed_ = 0;
    std::vector<std::uint32_t> symbols_;
};

/// The running product P_n stored as a norm-1 unit matrix plus the log of the
/// accumulated scale, so P_n = exp(log_scale) * unit conceptually, however
/// long the chain. log_det_sum carries log |det P_n| (a running sum of member
/// log-determinants), which recovers the second singular value without
/// cancellation: log sigma2(P_n) = log_det_sum - log sigma1(P_n).
struct ScaledProduct {
    Matrix2 unit;             ///< norm-1 == 1, or the zero matrix
    double log_scale = 0.0;   ///< -infinity for the zero product
    double log_det_sum = 0.0; ///< -infinity once a singular member is applied

    static ScaledProduct identity();
    bool is_zero() const { return unit.is_zero(); }
};

/// One multiplication step with renormalization: P_n = P_{n-1} * next.
/// The zero product is absorbing.
ScaledProduct step(const ScaledProduct& state, const Matrix2& next);

/// Per-step observables of P_n. Everything scale-dependent is carried in log
/// form; everything scale-free is computed on the unit matrix.
struct TrajectoryRecord {
    std::int64_t step = 0;
    std::uint32_t symbol = 0;
    double log_sigma1 = 0.0;              ///< log of the larger singular value of P_n
    double log_sigma2 = 0.0;              ///< log of the smaller; -infinity allowed
    double d_h = 0.0;                     ///< Hilbert distance between the columns
    std::optional<double> d_inf;          ///< column distance in [0,1]; absent on a null column
    std::optional<ColumnVector2> col1;    ///< normalized columns
    std::optional<ColumnVector2> col2;
    Matrix2 unit;                         ///< P_n / ||P_n||_1
    std::optional<ColumnVector2> pnv;     ///< normalized P_n V, when V was supplied
};

/// 1 while n fits in 10^4 records, else ceil(n / 10^4).
std::int64_t default_record_every(std::int64_t n_steps);

/// Stream the product along one symbol sequence. Records are emitted at steps
/// that are multiples of record_every and at the final step. Deterministic
/// given (ensemble, source, v, n_steps). Throws std::domain_error for an
/// invalid V (negative entry or zero vector) before any stepping.
std::vector<TrajectoryRecord> run(const MatrixEnsemble& ensemble, const SymbolSource& source,
                                  const std::optional<ColumnVector2>& v, std::int64_t n_steps,
                                  std::int64_t record_every);

/// T independent trajectories; trajectory t uses the symbol stream derived
/// from (master_seed, t). Trajectories are distributed over n_threads workers
/// (0 = hardware concurrency); results are indexed by trajectory, so the
/// output is identical for any thread count.
std::vector<std::vector<TrajectoryRecord>> run_trajectories(
    const MatrixEnsemble& ensemble, std::uint64_t master_seed,
    const std::optional<ColumnVector2>& v, std::int64_t n_steps, std::int64_t record_every,
    int n_trajectories, int n_threads);

/// Same stepping for an explicit source shared by every trajectory.
std::vector<std::vector<TrajectoryRecord>> run_trajectories(
    const MatrixEnsemble& ensemble, const SymbolSource& source,
    const std::optional<ColumnVector2>& v, std::int64_t n_steps, std::int64_t record_every,
    int n_trajectories, int n_threads);

}  // namespace matprod
