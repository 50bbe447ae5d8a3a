#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace flowtopo {

inline constexpr const char* kLibraryVersion = "flowtopo 0.1.0";

inline constexpr double kPi = 3.14159265358979323846;

// Error codes surfaced by the library. Each maps to one failure mode of a
// public operation; tests match on the code, messages are for humans.
enum class errc {
    bad_magic,
    truncated,
    non_positive_dims,
    invalid_value,
    no_valid_anchors,
    zero_contrast,
    empty_input,
    dimension_mismatch,
    k_too_large,
    size_explosion,
    no_witnesses,
    invalid_prime,
    not_a_subcomplex,
    empty_bin,
    invalid_argument,
    config,
    io,
};

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::bad_magic: return "BadMagic";
    case errc::truncated: return "Truncated";
    case errc::non_positive_dims: return "NonPositiveDims";
    case errc::invalid_value: return "InvalidValue";
    case errc::no_valid_anchors: return "NoValidAnchors";
    case errc::zero_contrast: return "ZeroContrast";
    case errc::empty_input: return "EmptyInput";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::k_too_large: return "KTooLarge";
    case errc::size_explosion: return "SizeExplosion";
    case errc::no_witnesses: return "NoWitnesses";
    case errc::invalid_prime: return "InvalidPrime";
    case errc::not_a_subcomplex: return "NotASubcomplex";
    case errc::empty_bin: return "EmptyBin";
    case errc::invalid_argument: return "InvalidArgument";
    case errc::config: return "ConfigError";
    case errc::io: return "IoError";
    }
    return "UnknownError";
}

// Deterministic random source. The engine is std::mt19937_64 (fully specified
// by the standard); the distributions are hand-rolled so that streams are
// identical across standard library implementations, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform index in [0, n). Lemire multiply-shift; bias is O(n / 2^64).
    std::size_t index(std::size_t n) {
        return static_cast<std::size_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    // Standard normal via Box-Muller, one cached spare per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double sigma) { return sigma * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Angle helpers. reduce_mod_2pi maps into [0, 2pi); angular_distance_mod_pi is
// the projective-line metric used for predominant-direction binning.
inline double reduce_mod_2pi(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r < 0) r += 2.0 * kPi;
    if (r >= 2.0 * kPi) r = 0.0;
    return r;
}

inline double reduce_mod_pi(double a) {
    double r = std::fmod(a, kPi);
    if (r < 0) r += kPi;
    if (r >= kPi) r = 0.0;
    return r;
}

inline double angular_distance_mod_pi(double a, double b) {
    double d = std::fabs(reduce_mod_pi(a) - reduce_mod_pi(b));
    return std::min(d, kPi - d);
}

} // namespace flowtopo
