#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace srsim::srs {

// Normalized power SNR of the SRS process at fixed total intensity, as a
// function of the Stokes-to-pump intensity ratio x:
//   signal amplitude ~ I_pump * I_stokes, shot noise power ~ I_stokes
//   => power SNR ~ I_pump^2 * I_stokes ~ x / (1 + x)^3.
double snr_vs_ratio(double x);

// Argmax of snr_vs_ratio, verified numerically by golden-section search.
double optimal_ratio();

// Raman shift in cm^-1 for pump/Stokes wavelengths in nm, and its inverse.
double raman_shift_cm1(double pump_nm, double stokes_nm);
double pump_for_shift_nm(double shift_cm1, double stokes_nm);

enum class Chemical { dna = 0, protein = 1, lipid = 2 };
inline constexpr std::array<Chemical, 3> kChemicals{Chemical::dna, Chemical::protein,
                                                    Chemical::lipid};
const char* chemical_name(Chemical c);
Chemical parse_chemical(const std::string& name);  // throws std::invalid_argument

// Assigned dominant CH-stretch shifts (cm^-1).
inline constexpr double kDnaShift = 2967.0;
inline constexpr double kProteinShift = 2926.0;
inline constexpr double kLipidShift = 2850.0;

struct LorentzLine {
    double center_cm1;
    double fwhm_cm1;
    double amplitude;
};

std::span<const LorentzLine> spectrum_lines(Chemical c);

// Sum of the chemical's Lorentzian lines. Valid for shift in [2700, 3200].
double spectrum_value(Chemical c, double shift_cm1);

// M[row: shift][col: chemical]; rows ordered as the shifts argument.
std::array<std::array<double, 3>, 3> spectra_matrix(const std::array<double, 3>& shifts);

struct IlluminationConfig {
    double stokes_nm = 1064.0;
    double pump_nm = 816.43;          // lipid line by default
    double stokes_mw = 17.8;
    double pump_mw = 35.6;
    double intensity_w_um2 = 75.0;    // total intensity at the sample
    double mod_freq_mhz = 20.0;
    double rep_rate_mhz = 80.0;
    double damage_threshold_w_um2 = 80.0;

    double ratio() const;             // Stokes-to-pump power ratio
    void validate() const;
};

struct DamageCheck {
    bool ok = true;
    double margin_w_um2 = 0.0;        // threshold - actual; negative on violation
};

DamageCheck photodamage_check(const IlluminationConfig& cfg);

}  // namespace srsim::srs
