#include "lprel/rng.hpp"

#include <stdexcept>

#include "lprel/numeric.hpp"

namespace lprel {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t kPcgMult = 6364136223846793005ULL;

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view purpose, std::uint64_t index)
    : master_(seed), purpose_(purpose), index_(index) {
    const std::uint64_t initstate = splitmix64(seed ^ splitmix64(index));
    const std::uint64_t initseq = fnv1a64(purpose_) ^ splitmix64(index * 0x9e3779b97f4a7c15ULL + 1);
    state_ = 0;
    inc_ = (initseq << 1u) | 1u;
    next_u32();
    state_ += initstate;
    next_u32();
}

std::uint32_t RngStream::next_u32() {
    const std::uint64_t old = state_;
    state_ = old * kPcgMult + inc_;
    const std::uint32_t xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal(double mean, double sd) {
    return mean + sd * normal_quantile(uniform_open());
}

std::size_t RngStream::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

RngStream RngStream::substream(std::string_view tag, std::uint64_t index) const {
    std::string child = purpose_;
    if (!child.empty()) child += '/';
    child += tag;
    if (index_ != 0) child += '#' + std::to_string(index_);
    return RngStream(master_, child, index);
}

}  // namespace lprel
