#pragma once
#include <cstdint>
#include <cmath>

namespace ledlink {

// Counter-based generator: output depends only on (seed, stream, counter), so
// parallel streams never share state and any draw can be reproduced in isolation.
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream)
        : key_(mix(mix(seed) ^ (stream * 0xd2b74407b1ce6e93ull + 0x9e3779b97f4a7c15ull))) {}

    uint64_t u64() { return mix(key_ ^ (++ctr_ * 0xa0761d6478bd642full)); }

    // uniform in (0, 1): never returns 0 so log() below is safe
    double u01() { return (double(u64() >> 11) + 0.5) * 0x1.0p-53; }

    // index in [0, n)
    uint64_t below(uint64_t n) { return u64() % n; }

    // Random access by draw index, independent of sequential state: lets block
    // processing regenerate any sample without replaying the stream.
    uint64_t u64_at(uint64_t i) const { return mix(key_ ^ ((i + 1) * 0xa0761d6478bd642full)); }
    double u01_at(uint64_t i) const { return (double(u64_at(i) >> 11) + 0.5) * 0x1.0p-53; }
    double normal_at(uint64_t i) const {
        double u1 = u01_at(2 * i), u2 = u01_at(2 * i + 1);
        return std::sqrt(-2.0 * std::log(u1))
               * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal() {
        if (have_spare_) { have_spare_ = false; return spare_; }
        double u1 = u01(), u2 = u01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static uint64_t mix(uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    uint64_t key_;
    uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace ledlink
