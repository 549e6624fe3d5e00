#pragma once

/// \file model.hpp
/// Radar scenario description and the steering/geometry quantities derived from it.

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mimostap {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 3.0e8;

double deg_to_rad(double deg);
double rad_to_deg(double rad);

/// Transmit/receive uniform linear arrays. Spacings are in wavelengths.
struct ArrayGeometry {
    std::size_t n_tx = 4;
    std::size_t n_rx = 4;
    double d_tx = 2.0;
    double d_rx = 0.5;

    void validate() const;
};

struct PulseParams {
    std::size_t m_pulses = 16;
    double prf_hz = 1000.0;
    std::size_t code_length = 13;
    double carrier_hz = 1.0e9;
    double bandwidth_hz = 1.0e6;  // recorded only

    double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
    void validate() const;
};

struct TargetParams {
    double doa_rad = 0.0;
    double normalized_doppler = 0.2;
    double amplitude_power = 1.0;
    double range_m = 12728.0;  // recorded only

    double omega() const { return 2.0 * kPi * normalized_doppler; }
    void validate() const;
};

struct ClutterConfig {
    std::size_t ring_halfwidth = 1;
    std::size_t patches_per_ring = 361;
    /// Either empty (uniform `uniform_patch_power`), length N_c (shared by every
    /// ring) or length (2P+1)*N_c (ring-major).
    std::vector<double> patch_power;
    double uniform_patch_power = 1.0;
    double platform_speed_mps = 150.0;
    double platform_height_m = 9000.0;  // recorded only
    /// Empty selects N_c points evenly spaced on [-90deg, +90deg].
    std::vector<double> azimuth_grid_rad;

    std::size_t ring_count() const { return 2 * ring_halfwidth + 1; }
    std::vector<double> azimuth_grid() const;
    double power(int ring, std::size_t k) const;
    void validate() const;
};

struct Jammer {
    double doa_rad = 0.0;
    double power = 0.0;
};

struct JammerConfig {
    std::vector<Jammer> jammers;
    void validate() const;
};

struct Scenario {
    ArrayGeometry geometry;
    PulseParams pulses;
    TargetParams target;
    ClutterConfig clutter;
    JammerConfig jammers;
    double noise_power = 1.0;
    double total_energy = 1.0;

    std::size_t code_size() const { return pulses.code_length * geometry.n_tx; }  // L*N_T
    std::size_t snapshot_size() const {                                             // L*M*N_R
        return pulses.code_length * pulses.m_pulses * geometry.n_rx;
    }
    double chip_power() const { return total_energy / static_cast<double>(code_size()); }
    void validate() const;

    /// Defaults used by the numerical examples: 4x4 arrays, L=13, M=16, one
    /// 35 dB jammer at 30 degrees, three clutter rings of 361 patches.
    static Scenario reference();
};

/// One clutter patch: ring offset p, azimuth index k, power, DOA and Doppler.
struct ClutterPatch {
    int ring = 0;
    std::size_t index = 0;
    double power = 0.0;
    double theta = 0.0;
    double omega = 0.0;

    bool operator==(const ClutterPatch&) const = default;
};

CVector steering_tx(const ArrayGeometry& geometry, double wavelength, double theta);
CVector steering_rx(const ArrayGeometry& geometry, double wavelength, double theta);
CVector temporal_steering(std::size_t m_pulses, double omega);

/// Clutter Doppler in radians per pulse for a side-looking platform.
double clutter_doppler(const ClutterConfig& clutter, const PulseParams& pulses, double theta);

/// (2P+1)*N_c patch records ordered by ring (ascending) then azimuth index.
std::vector<ClutterPatch> enumerate_clutter_patches(const Scenario& scenario);

}  // namespace mimostap
