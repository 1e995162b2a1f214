#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>

namespace mirplan {

// GMDP state: the set of still-unobserved arms, bitmask semantics. Capacity
// 63 arms, which covers everything that enumerates the subset lattice; the
// index-policy play-out path tracks its own sparse structures instead.
class StateSet {
public:
    static constexpr int kMaxArms = 63;

    constexpr StateSet() = default;
    constexpr explicit StateSet(std::uint64_t bits) : bits_(bits) {}

    static StateSet full(int num_arms) {
        if (num_arms < 0 || num_arms > kMaxArms)
            throw std::invalid_argument("StateSet supports up to 63 arms");
        return StateSet(num_arms == 0 ? 0 : (~std::uint64_t{0} >> (64 - num_arms)));
    }
    static constexpr StateSet empty_set() { return StateSet(0); }

    constexpr bool contains(int arm) const { return (bits_ >> arm) & 1u; }
    constexpr StateSet without(int arm) const { return StateSet(bits_ & ~(std::uint64_t{1} << arm)); }
    constexpr StateSet with(int arm) const { return StateSet(bits_ | (std::uint64_t{1} << arm)); }

    int count() const { return std::popcount(bits_); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr std::uint64_t bits() const { return bits_; }

    constexpr bool operator==(const StateSet&) const = default;

private:
    std::uint64_t bits_ = 0;
};

}  // namespace mirplan
