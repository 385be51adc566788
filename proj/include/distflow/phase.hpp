#pragma once

#include <cstdint>
#include <string>

#include "distflow/errors.hpp"

namespace distflow {

/// Phase labels double as rotation exponents (a=0, b=1, c=2) for the
/// alpha = e^{-i 2pi/3} operator used in the multiphase LinDistFlow sums.
enum class Phase : std::uint8_t { A = 0, B = 1, C = 2 };

inline constexpr Phase kPhases[3] = {Phase::A, Phase::B, Phase::C};

inline char phase_letter(Phase p) { return "abc"[static_cast<int>(p)]; }

inline Phase phase_from_letter(char c) {
    switch (c) {
        case 'a': case 'A': return Phase::A;
        case 'b': case 'B': return Phase::B;
        case 'c': case 'C': return Phase::C;
        default:
            throw ValidationError(std::string("unknown phase letter '") + c + "'");
    }
}

/// Ordered subset of {a, b, c}; iteration and block offsets always follow
/// the a < b < c convention.
class PhaseSet {
public:
    PhaseSet() = default;

    static PhaseSet parse(const std::string& letters) {
        PhaseSet s;
        for (char c : letters) {
            Phase p = phase_from_letter(c);
            if (s.contains(p))
                throw ValidationError("duplicate phase '" + std::string(1, c) + "' in \"" + letters + "\"");
            s.add(p);
        }
        return s;
    }

    static PhaseSet all() {
        PhaseSet s;
        s.mask_ = 0b111;
        return s;
    }

    void add(Phase p) { mask_ |= bit(p); }
    bool contains(Phase p) const { return (mask_ & bit(p)) != 0; }
    bool empty() const { return mask_ == 0; }

    int size() const {
        return ((mask_ >> 0) & 1) + ((mask_ >> 1) & 1) + ((mask_ >> 2) & 1);
    }

    /// Row/column of phase p inside blocks ordered by this set.
    int offset_of(Phase p) const {
        if (!contains(p))
            throw ValidationError(std::string("phase ") + phase_letter(p) + " not in set \"" + to_string() + "\"");
        int off = 0;
        for (int q = 0; q < static_cast<int>(p); ++q)
            if (mask_ & (1u << q)) ++off;
        return off;
    }

    Phase at(int offset) const {
        for (Phase p : kPhases) {
            if (!contains(p)) continue;
            if (offset-- == 0) return p;
        }
        throw ValidationError("phase offset out of range");
    }

    bool is_subset_of(const PhaseSet& o) const { return (mask_ & ~o.mask_) == 0; }

    PhaseSet intersect(const PhaseSet& o) const {
        PhaseSet s;
        s.mask_ = mask_ & o.mask_;
        return s;
    }

    std::string to_string() const {
        std::string s;
        for (Phase p : kPhases)
            if (contains(p)) s += phase_letter(p);
        return s;
    }

    bool operator==(const PhaseSet&) const = default;

    class iterator {
    public:
        iterator(std::uint8_t mask, int pos) : mask_(mask), pos_(pos) { advance(); }
        Phase operator*() const { return static_cast<Phase>(pos_); }
        iterator& operator++() {
            ++pos_;
            advance();
            return *this;
        }
        bool operator!=(const iterator& o) const { return pos_ != o.pos_; }

    private:
        void advance() {
            while (pos_ < 3 && !(mask_ & (1u << pos_))) ++pos_;
        }
        std::uint8_t mask_;
        int pos_;
    };
    iterator begin() const { return {mask_, 0}; }
    iterator end() const { return {mask_, 3}; }

private:
    static std::uint8_t bit(Phase p) { return static_cast<std::uint8_t>(1u << static_cast<int>(p)); }
    std::uint8_t mask_ = 0;
};

}  // namespace distflow
