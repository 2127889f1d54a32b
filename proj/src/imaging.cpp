#include "srsim/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "srsim/csv.hpp"
#include "srsim/errors.hpp"
#include "srsim/math_util.hpp"
#include "srsim/rng.hpp"

namespace srsim::imaging {

using srs::Chemical;

double Phantom::total_concentration(int x, int y) const {
    const std::size_t i = static_cast<std::size_t>(y) * nx + x;
    return concentration[0][i] + concentration[1][i] + concentration[2][i];
}

PhantomSpec default_yeast_spec(std::uint64_t seed) {
    PhantomSpec spec;
    const double cx = 5.0, cy = 5.0;  // cell center, um

    // cytosol across the whole cell body
    spec.shapes.push_back({Shape::Kind::ellipse, cx, cy, 3.0, 2.9, Chemical::protein, 0.55});
    spec.shapes.push_back({Shape::Kind::ellipse, cx, cy, 3.0, 2.9, Chemical::lipid, 0.18});
    spec.shapes.push_back({Shape::Kind::ellipse, cx, cy, 3.0, 2.9, Chemical::dna, 0.10});

    // nucleus: DNA-rich, with protein and membrane lipid
    const double nx_ = cx - 0.4, ny_ = cy - 0.3;
    spec.shapes.push_back({Shape::Kind::disk, nx_, ny_, 1.1, 1.1, Chemical::dna, 0.85});
    spec.shapes.push_back({Shape::Kind::disk, nx_, ny_, 1.1, 1.1, Chemical::protein, 0.70});
    spec.shapes.push_back({Shape::Kind::disk, nx_, ny_, 1.1, 1.1, Chemical::lipid, 0.55});

    // lipid droplets on a ring well clear of the nucleus
    util::Rng rng(util::substream_seed(seed, 0xD20F1E7));
    constexpr int kDroplets = 4;
    std::vector<double> angles;
    while (static_cast<int>(angles.size()) < kDroplets) {
        const double a = rng.uniform() * 2.0 * util::kPi;
        bool clear = true;
        for (double b : angles) {
            double d = std::abs(a - b);
            d = std::min(d, 2.0 * util::kPi - d);
            if (d < util::kPi / 3.0) clear = false;
        }
        if (clear) angles.push_back(a);
    }
    for (double a : angles) {
        const double rad = 2.1 + 0.35 * rng.uniform();
        const double r = 0.30 + 0.12 * rng.uniform();
        spec.shapes.push_back({Shape::Kind::disk, cx + rad * std::cos(a),
                               cy + rad * std::sin(a), r, r, Chemical::lipid, 1.0});
    }
    spec.bright_organelles = kDroplets + 1;  // droplets + nucleus
    return spec;
}

PhantomSpec parse_phantom_spec(const std::string& text) {
    PhantomSpec spec;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string head;
        ls >> head;
        auto fail = [&](const std::string& why) {
            throw std::invalid_argument("phantom spec line " + std::to_string(lineno) +
                                        ": " + why);
        };
        if (head == "ellipse" || head == "disk") {
            Shape s;
            s.kind = head == "disk" ? Shape::Kind::disk : Shape::Kind::ellipse;
            std::string chem;
            if (s.kind == Shape::Kind::disk) {
                if (!(ls >> s.cx_um >> s.cy_um >> s.rx_um)) fail("expected cx cy r");
                s.ry_um = s.rx_um;
            } else {
                if (!(ls >> s.cx_um >> s.cy_um >> s.rx_um >> s.ry_um))
                    fail("expected cx cy rx ry");
            }
            if (!(ls >> chem >> s.concentration)) fail("expected chem conc");
            if (s.rx_um <= 0 || s.ry_um <= 0) fail("radii must be > 0");
            if (s.concentration < 0) fail("concentration must be >= 0");
            s.chem = srs::parse_chemical(chem);
            spec.shapes.push_back(s);
        } else if (head.find('=') != std::string::npos) {
            const auto eq = head.find('=');
            const std::string key = head.substr(0, eq);
            const std::string value = head.substr(eq + 1);
            if (value.empty()) fail("missing value for '" + key + "'");
            if (key == "psf_radius_nm")
                spec.psf_radius_nm = std::stod(value);
            else if (key == "bright_organelles")
                spec.bright_organelles = std::stoi(value);
            else
                fail("unknown key '" + key + "'");
        } else {
            fail("unknown directive '" + head + "'");
        }
    }
    return spec;
}

std::string phantom_spec_text(const PhantomSpec& spec) {
    std::ostringstream out;
    out << "psf_radius_nm=" << spec.psf_radius_nm << "\n";
    out << "bright_organelles=" << spec.bright_organelles << "\n";
    char buf[160];
    for (const auto& s : spec.shapes) {
        if (s.kind == Shape::Kind::disk) {
            std::snprintf(buf, sizeof buf, "disk %.6g %.6g %.6g %s %.6g", s.cx_um, s.cy_um,
                          s.rx_um, srs::chemical_name(s.chem), s.concentration);
        } else {
            std::snprintf(buf, sizeof buf, "ellipse %.6g %.6g %.6g %.6g %s %.6g", s.cx_um,
                          s.cy_um, s.rx_um, s.ry_um, srs::chemical_name(s.chem),
                          s.concentration);
        }
        out << buf << "\n";
    }
    return out.str();
}

namespace {

void gaussian_blur_inplace(std::vector<double>& map, int nx, int ny, double sigma_px) {
    if (sigma_px <= 0.05) return;
    const int half = static_cast<int>(std::ceil(4.0 * sigma_px));
    std::vector<double> kernel(2 * half + 1);
    for (int i = -half; i <= half; ++i)
        kernel[i + half] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));

    std::vector<double> tmp(map.size());
    // horizontal pass, kernel renormalized at the edges
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int k = -half; k <= half; ++k) {
                const int xx = x + k;
                if (xx < 0 || xx >= nx) continue;
                acc += kernel[k + half] * map[static_cast<std::size_t>(y) * nx + xx];
                wsum += kernel[k + half];
            }
            tmp[static_cast<std::size_t>(y) * nx + x] = acc / wsum;
        }
    }
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int k = -half; k <= half; ++k) {
                const int yy = y + k;
                if (yy < 0 || yy >= ny) continue;
                acc += kernel[k + half] * tmp[static_cast<std::size_t>(yy) * nx + x];
                wsum += kernel[k + half];
            }
            map[static_cast<std::size_t>(y) * nx + x] = acc / wsum;
        }
    }
}

}  // namespace

Phantom build_phantom(const PhantomSpec& spec, int nx, int ny, double pitch_nm) {
    if (spec.shapes.empty())
        throw std::invalid_argument("build_phantom: empty phantom spec");
    if (nx < 1 || ny < 1 || pitch_nm <= 0)
        throw std::invalid_argument("build_phantom: bad grid");
    const double w_um = nx * pitch_nm * 1e-3;
    const double h_um = ny * pitch_nm * 1e-3;
    for (const auto& s : spec.shapes) {
        if (s.cx_um < 0 || s.cx_um > w_um || s.cy_um < 0 || s.cy_um > h_um)
            throw std::invalid_argument("build_phantom: shape center outside the grid");
    }

    Phantom ph;
    ph.nx = nx;
    ph.ny = ny;
    ph.pitch_nm = pitch_nm;
    ph.bright_organelles = spec.bright_organelles;
    for (auto& m : ph.concentration) m.assign(static_cast<std::size_t>(nx) * ny, 0.0);

    const double pitch_um = pitch_nm * 1e-3;
    for (const auto& s : spec.shapes) {
        auto& map = ph.concentration[static_cast<int>(s.chem)];
        const int x0 = std::max(0, static_cast<int>((s.cx_um - s.rx_um) / pitch_um) - 1);
        const int x1 = std::min(nx - 1, static_cast<int>((s.cx_um + s.rx_um) / pitch_um) + 1);
        const int y0 = std::max(0, static_cast<int>((s.cy_um - s.ry_um) / pitch_um) - 1);
        const int y1 = std::min(ny - 1, static_cast<int>((s.cy_um + s.ry_um) / pitch_um) + 1);
        for (int y = y0; y <= y1; ++y) {
            const double py = (y + 0.5) * pitch_um;
            for (int x = x0; x <= x1; ++x) {
                const double px = (x + 0.5) * pitch_um;
                const double ex = (px - s.cx_um) / s.rx_um;
                const double ey = (py - s.cy_um) / s.ry_um;
                if (ex * ex + ey * ey <= 1.0)
                    map[static_cast<std::size_t>(y) * nx + x] += s.concentration;
            }
        }
    }

    if (spec.psf_radius_nm > 0) {
        // 1/e^2 intensity radius w maps to a Gaussian sigma of w/2
        const double sigma_px = 0.5 * spec.psf_radius_nm / pitch_nm;
        for (auto& m : ph.concentration) gaussian_blur_inplace(m, nx, ny, sigma_px);
    }

    ph.support.assign(static_cast<std::size_t>(nx) * ny, 0);
    double peak = 0.0;
    for (std::size_t i = 0; i < ph.support.size(); ++i) {
        const double t =
            ph.concentration[0][i] + ph.concentration[1][i] + ph.concentration[2][i];
        peak = std::max(peak, t);
    }
    const double thresh = 1e-6 * peak;
    for (std::size_t i = 0; i < ph.support.size(); ++i) {
        const double t =
            ph.concentration[0][i] + ph.concentration[1][i] + ph.concentration[2][i];
        ph.support[i] = t > thresh ? 1 : 0;
    }
    return ph;
}

// ---------------------------------------------------------------------------
// chain calibration: DC gain per unit tone amplitude and DC noise variance,
// for a given noise/detector/lock-in configuration and dwell. Uses internal
// fixed seeds so results do not depend on the scan seed, and is memoized.
// ---------------------------------------------------------------------------
namespace {

struct ChainCalibration {
    double dc_per_amplitude = 0.5;
    double dc_noise_var = 0.0;
};

struct CalKey {
    double dwell, power, v, elec, bw;
    int resonant;
    bool operator<(const CalKey& o) const {
        return std::tie(dwell, power, v, elec, bw, resonant) <
               std::tie(o.dwell, o.power, o.v, o.elec, o.bw, o.resonant);
    }
};

constexpr std::uint64_t kCalSeedBase = 0x5eedCa11B007ull;
constexpr int kCalNoisePixels = 128;

double pixel_dc(const chain::PixelTrace& raw, const chain::DetectorModel& det,
                bool resonant, const chain::LockinConfig& lock, double* noise_var) {
    chain::LockinResult res;
    if (resonant) {
        res = chain::lockin_demodulate(chain::resonant_detector(raw, det), lock);
    } else {
        res = chain::lockin_demodulate(raw, lock);
    }
    if (noise_var) *noise_var = res.noise_var;
    return res.dc;
}

ChainCalibration chain_calibration(const chain::NoiseConfig& noise,
                                   const chain::DetectorModel& det, bool resonant,
                                   const chain::LockinConfig& lock, double dwell_s) {
    static std::map<CalKey, ChainCalibration> cache;
    static std::mutex mutex;
    const CalKey key{dwell_s, noise.detected_power_mw, noise.squeeze_variance,
                     noise.electronic_db, det.bandwidth_hz, resonant ? 1 : 0};
    {
        std::lock_guard<std::mutex> lk(mutex);
        const auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }

    ChainCalibration cal;
    // noiseless unit-amplitude pixel fixes the in-phase DC gain of the chain
    chain::NoiseConfig quiet = noise;
    quiet.squeeze_variance = 1.0;
    quiet.electronic_db = -std::numeric_limits<double>::infinity();
    quiet.spurious_amplitude = 0.0;
    {
        chain::NoiseConfig q0 = quiet;
        q0.detected_power_mw = 0.0;  // no DC, no shot noise, tone only
        const auto tr = chain::synthesize_photocurrent(1.0, q0, det, dwell_s, kCalSeedBase);
        cal.dc_per_amplitude = pixel_dc(tr, det, resonant, lock, nullptr);
    }

    chain::NoiseConfig bg = noise;
    bg.spurious_amplitude = 0.0;
    std::vector<double> dcs(kCalNoisePixels);
    for (int i = 0; i < kCalNoisePixels; ++i) {
        const auto tr = chain::synthesize_photocurrent(
            0.0, bg, det, dwell_s, util::substream_seed(kCalSeedBase, 1 + i));
        dcs[i] = pixel_dc(tr, det, resonant, lock, nullptr);
    }
    cal.dc_noise_var = util::variance(dcs);

    std::lock_guard<std::mutex> lk(mutex);
    cache.emplace(key, cal);
    return cal;
}

std::vector<double> composite_signal(const Phantom& ph, double shift_cm1) {
    const std::array<double, 3> spec = {
        srs::spectrum_value(Chemical::dna, shift_cm1),
        srs::spectrum_value(Chemical::protein, shift_cm1),
        srs::spectrum_value(Chemical::lipid, shift_cm1)};
    std::vector<double> out(ph.concentration[0].size(), 0.0);
    for (int c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += ph.concentration[c][i] * spec[c];
    }
    return out;
}

chain::NoiseConfig image_noise_config(const ScanConfig& scan,
                                      const chain::NoiseConfig& noise) {
    chain::NoiseConfig n = noise;
    if (!scan.squeezer_on) n.squeeze_variance = 1.0;
    return n;
}

}  // namespace

double calibrate_k(const Phantom& phantom, const ScanConfig& scan,
                   const srs::IlluminationConfig& illum, const chain::NoiseConfig& noise) {
    // reference configuration: 1 ms dwell, squeezer on, lipid shift
    ScanConfig ref = scan;
    ref.dwell_s = 1e-3;
    ref.squeezer_on = true;
    ref.pump_on = true;
    ref.shift_cm1 = srs::kLipidShift;

    const auto comp = composite_signal(phantom, ref.shift_cm1);
    const double peak = *std::max_element(comp.begin(), comp.end());
    if (!(peak > 0)) return 0.0;  // signal-less phantom: pure-noise acquisition

    const chain::DetectorModel det;
    const chain::LockinConfig lock;
    const auto cal = chain_calibration(image_noise_config(ref, noise), det,
                                       ref.resonant_stage, lock, ref.dwell_s);
    // anchor: (K * peak * P_pump * P_stokes * dc_gain)^2 / noise_var = 10^(14/10)
    const double target_dc = std::sqrt(util::from_db(kPeakSnrAnchorDb) * cal.dc_noise_var);
    return target_dc / (peak * illum.pump_mw * illum.stokes_mw * cal.dc_per_amplitude);
}

ScanImage acquire_image(const Phantom& phantom, const ScanConfig& scan,
                        const srs::IlluminationConfig& illum,
                        const chain::NoiseConfig& noise) {
    if (scan.nx < 1 || scan.ny < 1 || scan.dwell_s <= 0)
        throw std::invalid_argument("acquire_image: bad scan config");
    if (phantom.nx != scan.nx || phantom.ny != scan.ny)
        throw std::invalid_argument("acquire_image: phantom and scan dimensions differ");
    const auto damage = srs::photodamage_check(illum);
    if (!damage.ok && !scan.allow_damage_override)
        throw std::domain_error("acquire_image: photodamage threshold exceeded by " +
                                std::to_string(-damage.margin_w_um2) +
                                " W/um^2 (set the override to proceed)");

    const chain::DetectorModel det;
    const chain::LockinConfig lock;
    const chain::NoiseConfig pixel_noise = image_noise_config(scan, noise);
    const double k = calibrate_k(phantom, scan, illum, noise);
    const auto cal =
        chain_calibration(pixel_noise, det, scan.resonant_stage, lock, scan.dwell_s);

    ScanImage img;
    img.nx = scan.nx;
    img.ny = scan.ny;
    img.scan = scan;
    img.support = phantom.support;
    img.calibration_k = k;
    img.predicted_dc_noise_var = cal.dc_noise_var;
    img.wall_time_s = scan.ny * (scan.nx * scan.dwell_s + scan.line_overhead_s);
    const std::size_t npix = static_cast<std::size_t>(scan.nx) * scan.ny;
    img.dc.resize(npix);
    img.noise_var.resize(npix);
    img.snr_db.resize(npix);

    const auto comp = composite_signal(phantom, scan.shift_cm1);
    const double pump = scan.pump_on ? illum.pump_mw : 0.0;
    const double amp_scale = k * pump * illum.stokes_mw;

    int n_threads = scan.threads;
    if (n_threads <= 0)
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;

    std::mutex err_mutex;
    std::string first_error;

    auto run_rows = [&](int y_begin, int y_end) {
        try {
            for (int y = y_begin; y < y_end; ++y) {
                for (int x = 0; x < scan.nx; ++x) {
                    const std::size_t p = static_cast<std::size_t>(y) * scan.nx + x;
                    const double amp = amp_scale * comp[p];
                    chain::PixelTrace tr;
                    try {
                        tr = chain::synthesize_photocurrent(
                            amp, pixel_noise, det, scan.dwell_s,
                            util::substream_seed(scan.seed, p));
                    } catch (const saturation_error& e) {
                        throw saturation_error("pixel (" + std::to_string(x) + "," +
                                               std::to_string(y) + "): " + e.what());
                    }
                    double nv = 0.0;
                    const double dc = pixel_dc(tr, det, scan.resonant_stage, lock, &nv);
                    img.dc[p] = dc;
                    img.noise_var[p] = nv;
                    img.snr_db[p] = util::to_db(dc * dc / cal.dc_noise_var);
                }
            }
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lk(err_mutex);
            if (first_error.empty()) first_error = e.what();
        }
    };

    if (n_threads == 1) {
        run_rows(0, scan.ny);
    } else {
        std::vector<std::thread> pool;
        const int rows_per = (scan.ny + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const int y0 = t * rows_per;
            const int y1 = std::min(scan.ny, y0 + rows_per);
            if (y0 >= y1) break;
            pool.emplace_back(run_rows, y0, y1);
        }
        for (auto& th : pool) th.join();
    }
    if (!first_error.empty()) throw saturation_error(first_error);
    return img;
}

double measure_enhancement_db(const ScanImage& squeezed, const ScanImage& reference,
                              const Region& region) {
    for (const ScanImage* im : {&squeezed, &reference}) {
        if (region.x0 < 0 || region.y0 < 0 || region.x1 > im->nx || region.y1 > im->ny ||
            region.x0 >= region.x1 || region.y0 >= region.y1)
            throw invalid_region_error("measure_enhancement: region outside image");
    }
    if (region.pixels() < 100)
        throw invalid_region_error("measure_enhancement: region must contain >= 100 pixels");

    double sum_sq = 0.0, sum_ref = 0.0;
    int on_support = 0;
    for (int y = region.y0; y < region.y1; ++y) {
        for (int x = region.x0; x < region.x1; ++x) {
            const std::size_t p = squeezed.index(x, y);
            if (!squeezed.support.empty() && squeezed.support[p]) ++on_support;
            sum_sq += squeezed.noise_var[p];
            sum_ref += reference.noise_var[p];
        }
    }
    if (on_support > 0)
        throw invalid_region_error("measure_enhancement: region overlaps phantom support (" +
                                   std::to_string(on_support) + " pixels)");
    if (!(sum_sq > 0) || !(sum_ref > 0))
        throw std::domain_error("measure_enhancement: degenerate variances");
    return util::to_db(sum_ref / sum_sq);
}

std::vector<std::uint8_t> contour_mask(const ScanImage& image, double threshold_db) {
    std::vector<std::uint8_t> mask(image.snr_db.size(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i)
        mask[i] = image.snr_db[i] >= threshold_db ? 1 : 0;
    return mask;
}

int count_components(std::span<const std::uint8_t> mask, int nx, int ny, int min_size) {
    if (static_cast<std::size_t>(nx) * ny != mask.size())
        throw std::invalid_argument("count_components: size mismatch");
    std::vector<std::uint8_t> seen(mask.size(), 0);
    int count = 0;
    std::deque<std::pair<int, int>> queue;
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            const std::size_t p = static_cast<std::size_t>(y) * nx + x;
            if (!mask[p] || seen[p]) continue;
            int size = 0;
            queue.clear();
            queue.emplace_back(x, y);
            seen[p] = 1;
            while (!queue.empty()) {
                const auto [cx, cy] = queue.front();
                queue.pop_front();
                ++size;
                constexpr int dx[4] = {1, -1, 0, 0};
                constexpr int dy[4] = {0, 0, 1, -1};
                for (int d = 0; d < 4; ++d) {
                    const int qx = cx + dx[d], qy = cy + dy[d];
                    if (qx < 0 || qx >= nx || qy < 0 || qy >= ny) continue;
                    const std::size_t q = static_cast<std::size_t>(qy) * nx + qx;
                    if (mask[q] && !seen[q]) {
                        seen[q] = 1;
                        queue.emplace_back(qx, qy);
                    }
                }
            }
            if (size >= min_size) ++count;
        }
    }
    return count;
}

namespace {
std::vector<double> renormalize(std::span<const double> v) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    std::vector<double> out(v.size(), 0.0);
    const double span = *mx - *mn;
    if (span <= 0) return out;
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *mn) / span;
    return out;
}
}  // namespace

RgbImage compose_rgb(const ScanImage& dna, const ScanImage& protein,
                     const ScanImage& lipid) {
    if (dna.nx != protein.nx || dna.nx != lipid.nx || dna.ny != protein.ny ||
        dna.ny != lipid.ny)
        throw std::invalid_argument("compose_rgb: image dimensions differ");
    RgbImage out;
    out.nx = dna.nx;
    out.ny = dna.ny;
    out.r = renormalize(dna.dc);
    out.b = renormalize(protein.dc);
    out.g = renormalize(lipid.dc);
    return out;
}

double condition_number_3x3(const std::array<std::array<double, 3>, 3>& m) {
    // eigenvalues of M^T M by Jacobi rotations; cond = sqrt(lmax/lmin)
    double a[3][3] = {};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) a[i][j] += m[k][i] * m[k][j];
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
        if (off < 1e-14) break;
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const double l = std::max(a[i][i], 0.0);
        lmax = std::max(lmax, l);
        lmin = std::min(lmin, l);
    }
    if (!(lmin > 0)) return std::numeric_limits<double>::infinity();
    return std::sqrt(lmax / lmin);
}

std::array<std::vector<double>, 3> unmix(std::array<std::span<const double>, 3> images,
                                         const std::array<std::array<double, 3>, 3>& m) {
    const double cond = condition_number_3x3(m);
    if (!(cond < 1e3)) {
        throw std::invalid_argument(
            "unmix: spectra matrix for (dna, protein, lipid) is singular or "
            "ill-conditioned (cond = " +
            std::to_string(cond) + ")");
    }
    const std::size_t n = images[0].size();
    if (images[1].size() != n || images[2].size() != n)
        throw std::invalid_argument("unmix: image sizes differ");

    // inverse via adjugate
    const auto& a = m;
    double inv[3][3];
    const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                       a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                       a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    inv[0][0] = (a[1][1] * a[2][2] - a[1][2] * a[2][1]) / det;
    inv[0][1] = (a[0][2] * a[2][1] - a[0][1] * a[2][2]) / det;
    inv[0][2] = (a[0][1] * a[1][2] - a[0][2] * a[1][1]) / det;
    inv[1][0] = (a[1][2] * a[2][0] - a[1][0] * a[2][2]) / det;
    inv[1][1] = (a[0][0] * a[2][2] - a[0][2] * a[2][0]) / det;
    inv[1][2] = (a[0][2] * a[1][0] - a[0][0] * a[1][2]) / det;
    inv[2][0] = (a[1][0] * a[2][1] - a[1][1] * a[2][0]) / det;
    inv[2][1] = (a[0][1] * a[2][0] - a[0][0] * a[2][1]) / det;
    inv[2][2] = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) / det;

    std::array<std::vector<double>, 3> out;
    for (auto& v : out) v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s0 = images[0][i], s1 = images[1][i], s2 = images[2][i];
        for (int c = 0; c < 3; ++c) {
            const double v = inv[c][0] * s0 + inv[c][1] * s1 + inv[c][2] * s2;
            out[c][i] = v > 0.0 ? v : 0.0;
        }
    }
    return out;
}

void write_image_csv(const std::string& path, const ScanImage& image) {
    io::CsvTable t;
    t.header = {"x", "y", "dc", "snr_db"};
    t.columns.resize(4);
    for (int y = 0; y < image.ny; ++y) {
        for (int x = 0; x < image.nx; ++x) {
            const std::size_t p = image.index(x, y);
            t.columns[0].push_back(x);
            t.columns[1].push_back(y);
            t.columns[2].push_back(image.dc[p]);
            t.columns[3].push_back(image.snr_db[p]);
        }
    }
    io::write_csv(path, t);
}

}  // namespace srsim::imaging
