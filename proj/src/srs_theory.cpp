#include "srsim/srs_theory.hpp"

#include <cmath>
#include <stdexcept>

#include "srsim/math_util.hpp"

namespace srsim::srs {

double snr_vs_ratio(double x) {
    if (!(x > 0) || !std::isfinite(x))
        throw std::domain_error("snr_vs_ratio: ratio must be > 0");
    const double s = 1.0 + x;
    return x / (s * s * s);
}

double optimal_ratio() {
    const double r = util::golden_section_max([](double x) { return snr_vs_ratio(x); },
                                              0.01, 10.0, 1e-9);
    // the closed form has its only interior maximum at exactly 1/2
    if (std::abs(r - 0.5) > 1e-6)
        throw std::runtime_error("optimal_ratio: numerical check failed");
    return r;
}

double raman_shift_cm1(double pump_nm, double stokes_nm) {
    if (!(pump_nm > 0) || !(stokes_nm > 0) || !(pump_nm < stokes_nm))
        throw std::domain_error("raman_shift_cm1: need 0 < pump < stokes");
    return 1e7 / pump_nm - 1e7 / stokes_nm;
}

double pump_for_shift_nm(double shift_cm1, double stokes_nm) {
    if (!(stokes_nm > 0) || !(shift_cm1 > 0))
        throw std::domain_error("pump_for_shift_nm: need positive shift and wavelength");
    return 1e7 / (shift_cm1 + 1e7 / stokes_nm);
}

const char* chemical_name(Chemical c) {
    switch (c) {
        case Chemical::dna: return "dna";
        case Chemical::protein: return "protein";
        case Chemical::lipid: return "lipid";
    }
    return "?";
}

Chemical parse_chemical(const std::string& name) {
    if (name == "dna") return Chemical::dna;
    if (name == "protein") return Chemical::protein;
    if (name == "lipid") return Chemical::lipid;
    throw std::invalid_argument("unknown chemical: " + name);
}

namespace {
// Main line at the assigned shift plus secondary CH-stretch bands. The
// cross-amplitudes keep every chemical above 10% at the other two shifts
// while the assigned shift stays the global maximum of its spectrum.
constexpr LorentzLine kDnaLines[] = {
    {2967.0, 35.0, 1.00}, {2926.0, 40.0, 0.28}, {2850.0, 45.0, 0.18}};
constexpr LorentzLine kProteinLines[] = {
    {2926.0, 35.0, 1.00}, {2967.0, 40.0, 0.42}, {2880.0, 50.0, 0.28}, {2850.0, 45.0, 0.12}};
constexpr LorentzLine kLipidLines[] = {
    {2850.0, 35.0, 1.00}, {2895.0, 42.0, 0.30}, {2935.0, 40.0, 0.26}};
}  // namespace

std::span<const LorentzLine> spectrum_lines(Chemical c) {
    switch (c) {
        case Chemical::dna: return kDnaLines;
        case Chemical::protein: return kProteinLines;
        case Chemical::lipid: return kLipidLines;
    }
    throw std::invalid_argument("spectrum_lines: unknown chemical");
}

double spectrum_value(Chemical c, double shift_cm1) {
    if (!(shift_cm1 >= 2700.0 && shift_cm1 <= 3200.0))
        throw std::domain_error("spectrum_value: shift outside [2700, 3200] cm^-1");
    double v = 0.0;
    for (const auto& line : spectrum_lines(c)) {
        const double hw = 0.5 * line.fwhm_cm1;
        const double d = shift_cm1 - line.center_cm1;
        v += line.amplitude * hw * hw / (d * d + hw * hw);
    }
    return v;
}

std::array<std::array<double, 3>, 3> spectra_matrix(const std::array<double, 3>& shifts) {
    std::array<std::array<double, 3>, 3> m{};
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) {
            m[row][col] = spectrum_value(kChemicals[col], shifts[row]);
        }
    }
    return m;
}

double IlluminationConfig::ratio() const {
    if (!(pump_mw > 0)) throw std::domain_error("ratio: pump power must be > 0");
    return stokes_mw / pump_mw;
}

void IlluminationConfig::validate() const {
    if (stokes_mw < 0 || pump_mw < 0 || intensity_w_um2 < 0)
        throw std::domain_error("IlluminationConfig: powers must be >= 0");
    if (!(pump_nm < stokes_nm))
        throw std::domain_error("IlluminationConfig: pump wavelength must be below Stokes");
}

DamageCheck photodamage_check(const IlluminationConfig& cfg) {
    cfg.validate();
    DamageCheck out;
    out.margin_w_um2 = cfg.damage_threshold_w_um2 - cfg.intensity_w_um2;
    out.ok = out.margin_w_um2 >= 0.0;
    return out;
}

}  // namespace srsim::srs
