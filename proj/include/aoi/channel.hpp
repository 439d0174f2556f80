// Finite-blocklength block error rate model for an AWGN link.
//
// An N-bit status update coded into m channel uses fails to decode with
// probability
//
//   eps(m) = Q( psi(m) ),
//   psi(m) = ( (1/2)log2(1+gamma) - N/m ) / ( log2(e) * sqrt(V / (2m)) ),
//   V      = 1 - 1/(1+gamma)^2,
//
// the normal approximation, tight for m > 100. Blocklength enters as a
// real number so the optimizer can root-find on a continuous relaxation;
// integral inputs evaluate identically through the same path.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aoi {

/// Payload size and received SNR defining the error model.
struct ChannelConfig {
    int payload_bits = 150;    ///< N, bits per status update
    double snr_linear = 0.0;   ///< gamma (dimensionless)
    double snr_db = 0.0;       ///< 10*log10(gamma), kept consistent

    static ChannelConfig from_db(int payload_bits, double snr_db) {
        ChannelConfig ch;
        ch.payload_bits = payload_bits;
        ch.snr_db = snr_db;
        ch.snr_linear = std::pow(10.0, snr_db / 10.0);
        ch.validate();
        return ch;
    }

    static ChannelConfig from_linear(int payload_bits, double snr_linear) {
        ChannelConfig ch;
        ch.payload_bits = payload_bits;
        ch.snr_linear = snr_linear;
        ch.snr_db = 10.0 * std::log10(snr_linear);
        ch.validate();
        return ch;
    }

    void validate() const {
        if (payload_bits < 1)
            throw std::domain_error("ChannelConfig: payload_bits must be >= 1");
        if (!(snr_linear > 0.0) || !std::isfinite(snr_linear))
            throw std::domain_error("ChannelConfig: snr_linear must be positive");
    }
};

/// Number of channel uses (symbols) per transmission attempt.
struct Blocklength {
    int value = 1;

    /// The normal approximation is only tight for m > 100; callers surface
    /// this as a warning flag, not a rejection.
    bool loose_approximation() const { return value <= 100; }

    void validate() const {
        if (value < 1) throw std::domain_error("Blocklength: m must be >= 1");
    }
};

namespace detail {

inline void check_channel_domain(double m, const ChannelConfig& ch) {
    ch.validate();
    if (!(m >= 1.0) || !std::isfinite(m))
        throw std::domain_error("blocklength m must be >= 1, got " + std::to_string(m));
}

/// Gaussian tail Q(x) = erfc(x/sqrt(2))/2, clamped into [0,1] against
/// floating-point overshoot.
inline double q_function(double x) {
    const double q = 0.5 * std::erfc(x / std::sqrt(2.0));
    return std::clamp(q, 0.0, 1.0);
}

}  // namespace detail

/// Argument of the Q-function in the BLER approximation. Strictly
/// increasing in m for fixed (gamma, N).
inline double psi(double m, const ChannelConfig& ch) {
    detail::check_channel_domain(m, ch);
    const double log2e = 1.4426950408889634;  // log2(e)
    const double cap = 0.5 * std::log2(1.0 + ch.snr_linear);
    const double v = 1.0 - 1.0 / ((1.0 + ch.snr_linear) * (1.0 + ch.snr_linear));
    const double num = cap - static_cast<double>(ch.payload_bits) / m;
    const double den = log2e * std::sqrt(v / (2.0 * m));
    return num / den;
}

inline double psi(Blocklength m, const ChannelConfig& ch) {
    m.validate();
    return psi(static_cast<double>(m.value), ch);
}

/// Block error rate of one m-symbol attempt, eps = Q(psi(m)).
inline double bler(double m, const ChannelConfig& ch) {
    return detail::q_function(psi(m, ch));
}

inline double bler(Blocklength m, const ChannelConfig& ch) {
    m.validate();
    return bler(static_cast<double>(m.value), ch);
}

/// d(eps)/dm on the continuous relaxation; always <= 0.
inline double bler_derivative(double m, const ChannelConfig& ch) {
    const double p = psi(m, ch);  // also validates the domain
    const double log2e = 1.4426950408889634;
    const double v = 1.0 - 1.0 / ((1.0 + ch.snr_linear) * (1.0 + ch.snr_linear));
    const double n = static_cast<double>(ch.payload_bits);
    const double sqrt_m = std::sqrt(m);
    const double dpsi_dm = std::sqrt(2.0) * (n / (m * sqrt_m) + std::log2(1.0 + ch.snr_linear) / (2.0 * sqrt_m)) /
                           (2.0 * log2e * std::sqrt(v));
    const double two_pi = 6.283185307179586;
    return -std::exp(-0.5 * p * p) / std::sqrt(two_pi) * dpsi_dm;
}

inline double bler_derivative(Blocklength m, const ChannelConfig& ch) {
    m.validate();
    return bler_derivative(static_cast<double>(m.value), ch);
}

}  // namespace aoi
