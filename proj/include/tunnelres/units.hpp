#pragma once

// Physical constants and unit conversions. Everything downstream works in
// hartree atomic units (hbar = e = m_e = a0 = 1) with the reduced mass kept
// explicit, so E = k^2 / (2 mu).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace tunnelres {

/// Base error type; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class UnitError : public Error {
public:
    using Error::Error;
};

namespace constants {

// CODATA 2018
inline constexpr double hartree_in_meV = 27211.386245988;
inline constexpr double hartree_in_eV = 27.211386245988;
inline constexpr double hartree_in_MHz = 6.579683920502e9;     // E_h / h
inline constexpr double hartree_in_kelvin = 3.1577502480407e5; // E_h / k_B
inline constexpr double bohr_in_angstrom = 0.529177210903;
inline constexpr double bohr_in_cm = 0.529177210903e-8;
inline constexpr double atomic_time_in_s = 2.4188843265857e-17;
inline constexpr double amu_in_electron_mass = 1822.888486209;
inline constexpr double pi = 3.141592653589793238462643383279502884;

// Isotope masses in amu (AME 2016).
inline constexpr double mass_K39 = 38.9637064864;
inline constexpr double mass_He3 = 3.0160293220;
inline constexpr double mass_Ar37 = 36.96677632;

}  // namespace constants

enum class Unit {
    hartree,
    meV,
    eV,
    MHz,
    kelvin,
    bohr,
    angstrom,
    amu,
    electron_mass,
    cm3_per_s,
    bohr2,
    cm2,
    second,
    atomic_time,
};

enum class Dimension { energy, length, mass, rate_coefficient, area, time };

struct PhysQuantity {
    double value = 0.0;
    Unit unit = Unit::hartree;
};

namespace detail {

struct UnitInfo {
    Unit unit;
    std::string_view name;
    Dimension dim;
    double to_atomic;  // multiply a value in this unit to get atomic units
};

inline constexpr std::array<UnitInfo, 14> unit_table{{
    {Unit::hartree, "hartree", Dimension::energy, 1.0},
    {Unit::meV, "meV", Dimension::energy, 1.0 / constants::hartree_in_meV},
    {Unit::eV, "eV", Dimension::energy, 1.0 / constants::hartree_in_eV},
    {Unit::MHz, "MHz", Dimension::energy, 1.0 / constants::hartree_in_MHz},
    {Unit::kelvin, "kelvin", Dimension::energy, 1.0 / constants::hartree_in_kelvin},
    {Unit::bohr, "bohr", Dimension::length, 1.0},
    {Unit::angstrom, "angstrom", Dimension::length, 1.0 / constants::bohr_in_angstrom},
    {Unit::amu, "amu", Dimension::mass, constants::amu_in_electron_mass},
    {Unit::electron_mass, "electron-mass", Dimension::mass, 1.0},
    {Unit::cm3_per_s, "cm^3/s", Dimension::rate_coefficient,
     constants::atomic_time_in_s / (constants::bohr_in_cm * constants::bohr_in_cm * constants::bohr_in_cm)},
    {Unit::bohr2, "bohr^2", Dimension::area, 1.0},
    {Unit::cm2, "cm^2", Dimension::area, 1.0 / (constants::bohr_in_cm * constants::bohr_in_cm)},
    {Unit::second, "second", Dimension::time, 1.0 / constants::atomic_time_in_s},
    {Unit::atomic_time, "atomic-time", Dimension::time, 1.0},
}};

inline constexpr const UnitInfo& info(Unit u) {
    for (const auto& i : unit_table)
        if (i.unit == u) return i;
    return unit_table[0];  // unreachable for valid enumerators
}

}  // namespace detail

inline std::string_view unit_name(Unit u) { return detail::info(u).name; }
inline Dimension dimension_of(Unit u) { return detail::info(u).dim; }

inline PhysQuantity convert(PhysQuantity q, Unit target) {
    const auto& from = detail::info(q.unit);
    const auto& to = detail::info(target);
    if (from.dim != to.dim)
        throw UnitError("cannot convert " + std::string(from.name) + " to " + std::string(to.name) +
                        ": incompatible dimensions");
    if (q.unit == target) return q;
    return {q.value * from.to_atomic / to.to_atomic, target};
}

inline double to_atomic(double value, Unit u) { return value * detail::info(u).to_atomic; }
inline double from_atomic(double value, Unit u) { return value / detail::info(u).to_atomic; }

inline double meV(double v) { return to_atomic(v, Unit::meV); }
inline double to_meV(double hartree) { return from_atomic(hartree, Unit::meV); }

/// Reduced mass of a pair given in amu, returned in electron masses.
inline PhysQuantity reduced_mass(double m_a_amu, double m_b_amu) {
    if (!(m_a_amu > 0.0) || !(m_b_amu > 0.0))
        throw UnitError("reduced_mass: masses must be positive");
    const double mu_amu = m_a_amu * m_b_amu / (m_a_amu + m_b_amu);
    return convert({mu_amu, Unit::amu}, Unit::electron_mass);
}

/// K-3He reduced mass in electron masses.
inline double mu_K_He3() { return reduced_mass(constants::mass_K39, constants::mass_He3).value; }
inline double mu_K_Ar37() { return reduced_mass(constants::mass_K39, constants::mass_Ar37).value; }

/// The single wave-number convention used everywhere: k = sqrt(2 mu E).
inline double wavenumber(double mu, double energy) { return std::sqrt(2.0 * mu * energy); }
inline double energy_of(double mu, double k) { return k * k / (2.0 * mu); }

/// Dissociation rate (inverse atomic time) from a lifetime in seconds.
inline double rate_from_lifetime(double seconds) {
    if (!(seconds > 0.0)) throw UnitError("lifetime must be positive");
    return constants::atomic_time_in_s / seconds;
}

/// Parses a lifetime such as "1ns", "250 ps" or "1e-9s" into seconds.
inline double parse_lifetime(std::string_view text) {
    std::string s(text);
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw UnitError("cannot parse lifetime '" + s + "'");
    }
    std::string unit = s.substr(pos);
    unit.erase(0, unit.find_first_not_of(' '));
    static constexpr std::array<std::pair<std::string_view, double>, 7> scale{{
        {"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}, {"ps", 1e-12}, {"fs", 1e-15}, {"", 1.0}}};
    for (const auto& [name, f] : scale)
        if (unit == name) {
            if (!(v > 0.0)) throw UnitError("lifetime must be positive: '" + s + "'");
            return v * f;
        }
    throw UnitError("unknown time unit '" + unit + "' in '" + s + "'");
}

/// Rate from an angular frequency quoted as 2*pi*f with f in MHz.
inline double rate_from_angular_MHz(double f_MHz) {
    return 2.0 * constants::pi * f_MHz * 1e6 * constants::atomic_time_in_s;
}

/// Hyperfine coupling quoted as a cyclic frequency f in MHz -> hbar*alpha = h*f in
/// hartree, which is also the angular frequency in inverse atomic time.
inline double hyperfine_to_atomic(double alpha_MHz) { return to_atomic(alpha_MHz, Unit::MHz); }

}  // namespace tunnelres
