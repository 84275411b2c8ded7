#ifndef LPREL_RNG_HPP
#define LPREL_RNG_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace lprel {

/// Seeded random stream backed by the pcg32 generator (64-bit LCG state,
/// XSH-RR output). Streams are addressed by (master seed, purpose tag,
/// index); the same triple reproduces the same sequence on every platform,
/// and distinct triples give statistically independent streams. Normal
/// variates come from the inverse-cdf transform so they inherit the same
/// reproducibility guarantee.
class RngStream {
public:
    static constexpr const char* kAlgorithm = "pcg32";

    explicit RngStream(std::uint64_t seed, std::string_view purpose = "",
                       std::uint64_t index = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform on [0,1) with 53 random bits.
    double uniform();
    /// Uniform on the open interval (0,1); safe to feed into quantile maps.
    double uniform_open();
    double normal(double mean = 0.0, double sd = 1.0);
    /// Uniform index in [0, n); n must be positive.
    std::size_t uniform_index(std::size_t n);

    /// Derived stream: same master seed, nested purpose tag.
    RngStream substream(std::string_view tag, std::uint64_t index = 0) const;

    std::uint64_t master_seed() const { return master_; }
    const std::string& purpose() const { return purpose_; }
    std::uint64_t stream_index() const { return index_; }

private:
    std::uint64_t master_ = 0;
    std::string purpose_;
    std::uint64_t index_ = 0;
    std::uint64_t state_ = 0;
    std::uint64_t inc_ = 0;
};

}  // namespace lprel

#endif  // LPREL_RNG_HPP
