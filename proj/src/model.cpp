#include "mimostap/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mimostap {

double deg_to_rad(double deg) { return deg * kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

void ArrayGeometry::validate() const {
    if (n_tx < 1 || n_rx < 1) throw std::invalid_argument("array element counts must be >= 1");
    if (!(d_tx > 0.0) || !(d_rx > 0.0)) throw std::invalid_argument("array spacings must be > 0");
}

void PulseParams::validate() const {
    if (m_pulses < 1) throw std::invalid_argument("m_pulses must be >= 1");
    if (code_length < 1) throw std::invalid_argument("code_length must be >= 1");
    if (!(prf_hz > 0.0)) throw std::invalid_argument("prf_hz must be > 0");
    if (!(carrier_hz > 0.0)) throw std::invalid_argument("carrier_hz must be > 0");
}

void TargetParams::validate() const {
    if (std::abs(normalized_doppler) > 0.5)
        throw std::invalid_argument("target normalized_doppler must lie in [-0.5, 0.5]");
    if (!(amplitude_power >= 0.0)) throw std::invalid_argument("target amplitude_power must be >= 0");
}

std::vector<double> ClutterConfig::azimuth_grid() const {
    if (!azimuth_grid_rad.empty()) return azimuth_grid_rad;
    std::vector<double> grid(patches_per_ring);
    if (patches_per_ring == 1) {
        grid[0] = 0.0;
        return grid;
    }
    const double step = kPi / static_cast<double>(patches_per_ring - 1);
    for (std::size_t k = 0; k < patches_per_ring; ++k)
        grid[k] = -kPi / 2.0 + step * static_cast<double>(k);
    // Pin the endpoints so +-90 deg are exact regardless of accumulated rounding.
    grid.back() = kPi / 2.0;
    return grid;
}

double ClutterConfig::power(int ring, std::size_t k) const {
    if (patch_power.empty()) return uniform_patch_power;
    if (patch_power.size() == patches_per_ring) return patch_power[k];
    const auto row = static_cast<std::size_t>(ring + static_cast<int>(ring_halfwidth));
    return patch_power[row * patches_per_ring + k];
}

void ClutterConfig::validate() const {
    if (patches_per_ring < 1) throw std::invalid_argument("patches_per_ring must be >= 1");
    if (!azimuth_grid_rad.empty()) {
        if (azimuth_grid_rad.size() != patches_per_ring)
            throw std::invalid_argument("azimuth grid length must equal patches_per_ring");
        for (std::size_t k = 1; k < azimuth_grid_rad.size(); ++k)
            if (!(azimuth_grid_rad[k] > azimuth_grid_rad[k - 1]))
                throw std::invalid_argument("azimuth grid must be strictly increasing");
    }
    if (!patch_power.empty() && patch_power.size() != patches_per_ring &&
        patch_power.size() != ring_count() * patches_per_ring)
        throw std::invalid_argument("patch_power must have N_c or (2P+1)*N_c entries");
    for (double p : patch_power)
        if (!(p >= 0.0)) throw std::invalid_argument("clutter patch powers must be >= 0");
    if (!(uniform_patch_power >= 0.0)) throw std::invalid_argument("clutter patch power must be >= 0");
}

void JammerConfig::validate() const {
    for (const auto& j : jammers)
        if (!(j.power >= 0.0)) throw std::invalid_argument("jammer powers must be >= 0");
}

void Scenario::validate() const {
    geometry.validate();
    pulses.validate();
    target.validate();
    clutter.validate();
    jammers.validate();
    if (!(noise_power > 0.0)) throw std::invalid_argument("noise_power must be > 0");
    if (!(total_energy > 0.0)) throw std::invalid_argument("total_energy must be > 0");
}

Scenario Scenario::reference() {
    Scenario s;
    s.jammers.jammers.push_back({deg_to_rad(30.0), std::pow(10.0, 3.5)});
    return s;
}

namespace {

CVector ula_steering(std::size_t count, double spacing_m, double wavelength, double theta) {
    CVector a(static_cast<Eigen::Index>(count));
    const double phase_step = 2.0 * kPi * spacing_m * std::sin(theta) / wavelength;
    for (std::size_t n = 0; n < count; ++n)
        a[static_cast<Eigen::Index>(n)] = std::polar(1.0, phase_step * static_cast<double>(n));
    return a;
}

}  // namespace

CVector steering_tx(const ArrayGeometry& geometry, double wavelength, double theta) {
    return ula_steering(geometry.n_tx, geometry.d_tx * wavelength, wavelength, theta);
}

CVector steering_rx(const ArrayGeometry& geometry, double wavelength, double theta) {
    return ula_steering(geometry.n_rx, geometry.d_rx * wavelength, wavelength, theta);
}

CVector temporal_steering(std::size_t m_pulses, double omega) {
    CVector d(static_cast<Eigen::Index>(m_pulses));
    for (std::size_t m = 0; m < m_pulses; ++m)
        d[static_cast<Eigen::Index>(m)] = std::polar(1.0, omega * static_cast<double>(m));
    return d;
}

double clutter_doppler(const ClutterConfig& clutter, const PulseParams& pulses, double theta) {
    return 4.0 * kPi * clutter.platform_speed_mps * std::sin(theta) /
           (pulses.prf_hz * pulses.wavelength_m());
}

std::vector<ClutterPatch> enumerate_clutter_patches(const Scenario& scenario) {
    const auto& c = scenario.clutter;
    const auto grid = c.azimuth_grid();
    const int P = static_cast<int>(c.ring_halfwidth);
    std::vector<ClutterPatch> patches;
    patches.reserve(c.ring_count() * grid.size());
    for (int p = -P; p <= P; ++p) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
            patches.push_back({p, k, c.power(p, k), grid[k],
                               clutter_doppler(c, scenario.pulses, grid[k])});
        }
    }
    return patches;
}

}  // namespace mimostap
