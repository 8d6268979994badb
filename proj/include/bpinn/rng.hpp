#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace bpinn {

/// Deterministic, cross-platform random stream (xoshiro256++ seeded through
/// splitmix64). All stochastic code takes an explicit Rng; there is no global
/// state, so independent streams can run concurrently.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
    {
        // splitmix64 expansion of (seed, stream) into the 256-bit state
        std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1).
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1].
    double u01_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Standard normal via Box-Muller; the second draw of each pair is cached.
    double normal()
    {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = u01_open();
        const double u2 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    void fill_normal(std::span<double> out)
    {
        for (auto& v : out) v = normal();
    }

    /// Uniform integer in [0, n). Modulo bias is below 2^-53 for the sizes
    /// used here.
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4] {};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace bpinn
