// srsim: desk-scale simulation toolkit for a quantum-enhanced SRS microscope.
// Subcommands map to the analysis recipes: squeeze-optics model fits and
// aperture sweeps, SNR-vs-ratio theory, lock-in chain demos, phantom imaging,
// and minimum-dwell-time analysis.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srsim/config.hpp"
#include "srsim/csv.hpp"
#include "srsim/dwell.hpp"
#include "srsim/errors.hpp"
#include "srsim/fft.hpp"
#include "srsim/imaging.hpp"
#include "srsim/math_util.hpp"
#include "srsim/pgm.hpp"
#include "srsim/rng.hpp"
#include "srsim/signal_chain.hpp"
#include "srsim/squeeze_optics.hpp"
#include "srsim/srs_theory.hpp"

namespace fs = std::filesystem;
using namespace srsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFitFailure = 2;
constexpr int kExitUsage = 64;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

io::RunConfig load_config(const GlobalArgs& g) {
    io::RunConfig cfg;
    if (!g.config_path.empty()) cfg = io::RunConfig::from_file(g.config_path);
    if (g.seed) cfg.set("seed", std::to_string(*g.seed));
    return cfg;
}

// <command>-<timestamp>-<confighash>/ under --out, $SRSIM_OUT_ROOT or cwd.
fs::path make_out_dir(const std::string& command, const GlobalArgs& g,
                      const io::RunConfig& cfg) {
    fs::path dir;
    if (!g.out_dir.empty()) {
        dir = g.out_dir;
    } else {
        fs::path root = ".";
        if (const char* env = std::getenv("SRSIM_OUT_ROOT")) root = env;
        const auto now = std::chrono::system_clock::now();
        const auto secs =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(cfg.resolved_hash()));
        dir = root / (command + "-" + std::to_string(secs) + "-" + std::string(hash));
    }
    fs::create_directories(dir);
    return dir;
}

void write_resolved_config(const fs::path& dir, const io::RunConfig& cfg) {
    io::atomic_write_text((dir / "resolved-config.txt").string(), cfg.resolved_text());
}

optics::OpaModel model_from(const io::RunConfig& cfg) {
    return optics::OpaModel{cfg.get_double("model.w0", 0.855),
                            cfg.get_double("model.a00", 0.6),
                            cfg.get_double("model.a01", 3.0)};
}

srs::IlluminationConfig illum_from(const io::RunConfig& cfg) {
    srs::IlluminationConfig c;
    c.stokes_nm = cfg.get_double("illum.stokes_nm", c.stokes_nm);
    c.pump_nm = cfg.get_double("illum.pump_nm", c.pump_nm);
    c.stokes_mw = cfg.get_double("illum.stokes_mw", c.stokes_mw);
    c.pump_mw = cfg.get_double("illum.pump_mw", c.pump_mw);
    c.intensity_w_um2 = cfg.get_double("illum.intensity_w_um2", c.intensity_w_um2);
    c.damage_threshold_w_um2 =
        cfg.get_double("illum.damage_threshold_w_um2", c.damage_threshold_w_um2);
    return c;
}

chain::NoiseConfig noise_from(const io::RunConfig& cfg) {
    chain::NoiseConfig n;
    n.detected_power_mw = cfg.get_double("noise.detected_power_mw", n.detected_power_mw);
    n.squeeze_variance =
        util::squeezing_db_to_variance(cfg.get_double("noise.squeeze_db", 1.2));
    n.electronic_db = cfg.get_double("noise.electronic_db", n.electronic_db);
    n.spurious_amplitude = cfg.get_double("noise.spurious_amp", n.spurious_amplitude);
    n.spurious_phase_rad = cfg.get_double("noise.spurious_phase_rad", n.spurious_phase_rad);
    n.pulse_depth = cfg.get_double("noise.pulse_depth", n.pulse_depth);
    n.signal_phase_rad = cfg.get_double("noise.signal_phase_rad", n.signal_phase_rad);
    n.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));
    return n;
}

imaging::ScanConfig scan_from(const io::RunConfig& cfg) {
    imaging::ScanConfig s;
    s.nx = static_cast<int>(cfg.get_long("scan.nx", 100));
    s.ny = static_cast<int>(cfg.get_long("scan.ny", 100));
    s.pitch_nm = cfg.get_double("scan.pitch_nm", 100.0);
    s.dwell_s = cfg.get_double("scan.dwell_ms", 1.0) * 1e-3;
    s.line_overhead_s = cfg.get_double("scan.line_overhead_ms", 80.0) * 1e-3;
    s.shift_cm1 = cfg.get_double("scan.shift_cm1", 2850.0);
    s.squeezer_on = cfg.get_bool("scan.squeezer", true);
    s.resonant_stage = cfg.get_bool("scan.resonant", true);
    s.threads = static_cast<int>(cfg.get_long("scan.threads", 1));
    s.allow_damage_override = cfg.get_bool("scan.damage_override", false);
    s.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));
    return s;
}

void write_kv(const fs::path& path,
              const std::vector<std::pair<std::string, std::string>>& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    io::atomic_write_text(path.string(), out);
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// fit-opa
// ---------------------------------------------------------------------------
int cmd_fit_opa(const GlobalArgs& g, const std::string& input, bool demo,
                double demo_noise) {
    auto cfg = load_config(g);
    const auto dir = make_out_dir("fit-opa", g, cfg);

    std::vector<double> r, intensity;
    if (demo) {
        const auto model = model_from(cfg);
        const auto grid = util::linspace(0.0, 3.0, 61);
        auto data = optics::seed_relative_profile(model, grid);
        if (demo_noise > 0) {
            util::Rng rng(static_cast<std::uint64_t>(cfg.get_long("seed", 1)));
            for (auto& v : data) v = std::max(0.0, v * (1.0 + demo_noise * rng.normal()));
        }
        r = grid;
        intensity = data;
        io::CsvTable t;
        t.header = {"r", "intensity"};
        t.columns = {r, intensity};
        io::write_csv((dir / "profile.csv").string(), t);
    } else {
        if (input.empty()) {
            std::cerr << "fit-opa: need --input profile.csv or --demo\n";
            return kExitUsage;
        }
        io::CsvTable t;
        try {
            t = io::read_csv(input);
        } catch (const std::exception& e) {
            std::cerr << "fit-opa: " << e.what() << "\n";
            return kExitUsage;
        }
        const int cr = t.column_index("r");
        const int ci = t.column_index("intensity");
        if (cr < 0 || ci < 0) {
            std::cerr << "fit-opa: " << input << ": expected columns r,intensity\n";
            return kExitUsage;
        }
        r = t.columns[cr];
        intensity = t.columns[ci];
    }

    optics::OpaFit fit;
    try {
        fit = optics::fit_opa(r, intensity);
    } catch (const std::invalid_argument& e) {
        std::cerr << "fit-opa: " << e.what() << "\n";
        return kExitUsage;
    }

    write_kv(dir / "model.txt",
             {{"w0", fmt(fit.model.w0)},
              {"a00", fmt(fit.model.a00)},
              {"a01", fmt(fit.model.a01)},
              {"residual_norm", fmt(fit.residual_norm)},
              {"converged", fit.converged ? "1" : "0"},
              {"evaluations", std::to_string(fit.evaluations)}});
    write_resolved_config(dir, cfg);

    std::cout << "fit-opa: [w0, a00, a01] = [" << fmt(fit.model.w0) << ", "
              << fmt(fit.model.a00) << ", " << fmt(fit.model.a01)
              << "]  residual = " << fmt(fit.residual_norm) << "  " << fit.message << "\n"
              << "outputs: " << dir.string() << "\n";
    return fit.converged ? kExitOk : kExitFitFailure;
}

// ---------------------------------------------------------------------------
// squeeze-sweep
// ---------------------------------------------------------------------------
int cmd_squeeze_sweep(const GlobalArgs& g) {
    auto cfg = load_config(g);
    const auto model = model_from(cfg);
    const double eta = cfg.get_double("model.eta", 0.55);
    const auto radii = util::linspace(cfg.get_double("sweep.rap_min", 0.2),
                                      cfg.get_double("sweep.rap_max", 4.0),
                                      static_cast<int>(cfg.get_long("sweep.rap_n", 96)));
    const auto dir = make_out_dir("squeeze-sweep", g, cfg);

    const auto curve = optics::sweep_aperture(model, eta, radii);
    io::CsvTable t;
    t.header = {"r_ap", "variance", "squeezing_db"};
    t.columns.resize(3);
    for (const auto& p : curve.points) {
        t.columns[0].push_back(p.r_ap);
        t.columns[1].push_back(p.variance);
        t.columns[2].push_back(p.squeezing_db);
    }
    io::write_csv((dir / "squeeze_curve.csv").string(), t);
    write_resolved_config(dir, cfg);

    const double r_opt = optics::optimal_aperture(curve);
    const double v_opt = optics::detected_variance(model, eta, r_opt);
    const double v_none = curve.no_aperture_variance;
    std::cout << "squeeze-sweep: no aperture: V = " << fmt(v_none) << " ("
              << fmt(util::variance_to_squeezing_db(v_none)) << " dB)\n"
              << "optimum: r_ap = " << fmt(r_opt) << " seed radii, V = " << fmt(v_opt)
              << " (" << fmt(util::variance_to_squeezing_db(v_opt)) << " dB)\n"
              << "outputs: " << dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// snr-sweep
// ---------------------------------------------------------------------------
int cmd_snr_sweep(const GlobalArgs& g) {
    auto cfg = load_config(g);
    const double lo = cfg.get_double("sweep.ratio_min", 0.07);
    const double hi = cfg.get_double("sweep.ratio_max", 10.0);
    const int n = static_cast<int>(cfg.get_long("sweep.ratio_n", 201));
    const auto dir = make_out_dir("snr-sweep", g, cfg);

    const auto ratios = util::logspace(lo, hi, n);
    io::CsvTable t;
    t.header = {"ratio", "snr", "snr_db"};
    t.columns.resize(3);
    double best_r = ratios[0], best_s = -1.0;
    for (double r : ratios) {
        const double s = srs::snr_vs_ratio(r);
        t.columns[0].push_back(r);
        t.columns[1].push_back(s);
        t.columns[2].push_back(util::to_db(s));
        if (s > best_s) {
            best_s = s;
            best_r = r;
        }
    }
    io::write_csv((dir / "snr_sweep.csv").string(), t);

    io::CsvTable sp;
    sp.header = {"shift_cm1", "dna", "protein", "lipid"};
    sp.columns.resize(4);
    for (double s = 2800.0; s <= 3100.0; s += 1.0) {
        sp.columns[0].push_back(s);
        sp.columns[1].push_back(srs::spectrum_value(srs::Chemical::dna, s));
        sp.columns[2].push_back(srs::spectrum_value(srs::Chemical::protein, s));
        sp.columns[3].push_back(srs::spectrum_value(srs::Chemical::lipid, s));
    }
    io::write_csv((dir / "raman_spectra.csv").string(), sp);
    write_resolved_config(dir, cfg);

    std::cout << "snr-sweep: argmax at ratio = " << fmt(best_r)
              << " (analytic optimum = " << fmt(srs::optimal_ratio())
              << "); S(0.5)/S(0.1) = "
              << fmt(srs::snr_vs_ratio(0.5) / srs::snr_vs_ratio(0.1)) << " ("
              << fmt(util::to_db(srs::snr_vs_ratio(0.5) / srs::snr_vs_ratio(0.1)))
              << " dB)\noutputs: " << dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// lockin-demo
// ---------------------------------------------------------------------------
int cmd_lockin_demo(const GlobalArgs& g, double amplitude, double duration_s) {
    auto cfg = load_config(g);
    const auto noise = noise_from(cfg);
    chain::DetectorModel det;
    det.quantum_efficiency = cfg.get_double("detector.qe", det.quantum_efficiency);
    det.max_linear_power_mw = cfg.get_double("detector.max_mw", det.max_linear_power_mw);
    det.center_freq_hz = cfg.get_double("detector.center_mhz", 20.0) * 1e6;
    det.bandwidth_hz = cfg.get_double("detector.bandwidth_mhz", 0.5) * 1e6;
    const double rate = cfg.get_double("lockin.rate_msps", 250.0) * 1e6;
    chain::LockinConfig lock;
    lock.lowpass_hz = cfg.get_double("lockin.lowpass_hz", lock.lowpass_hz);
    lock.lowpass_order = static_cast<int>(cfg.get_long("lockin.order", lock.lowpass_order));
    lock.decimation = static_cast<int>(cfg.get_long("lockin.decimation", lock.decimation));
    const auto dir = make_out_dir("lockin-demo", g, cfg);

    const auto raw = chain::synthesize_photocurrent(amplitude, noise, det, duration_s,
                                                    noise.seed, rate);
    const auto filtered = chain::resonant_detector(raw, det);
    const double phase = chain::optimize_phase(filtered, lock.lo_freq_hz);
    lock.lo_phase_rad = phase;
    const auto res = chain::lockin_demodulate(filtered, lock);
    const auto cmp = chain::compare_lockin_to_direct(raw, 20e6);

    chain::write_trace_csv((dir / "trace.csv").string(), raw);
    chain::write_trace_bin((dir / "trace.bin").string(), raw);

    io::CsvTable iq;
    iq.header = {"t_s", "i", "q"};
    iq.columns.resize(3);
    for (std::size_t i = 0; i < res.i_samples.size(); ++i) {
        iq.columns[0].push_back(static_cast<double>(i) / res.output_rate_hz);
        iq.columns[1].push_back(res.i_samples[i]);
        iq.columns[2].push_back(res.q_samples[i]);
    }
    io::write_csv((dir / "iq.csv").string(), iq);

    const auto psd = util::welch_psd(raw.samples, raw.sample_rate_hz, 4096);
    io::CsvTable pt;
    pt.header = {"f_hz", "psd_db"};
    pt.columns.resize(2);
    for (std::size_t k = 1; k < psd.freq_hz.size(); ++k) {
        pt.columns[0].push_back(psd.freq_hz[k]);
        pt.columns[1].push_back(util::to_db(psd.psd[k]));
    }
    io::write_csv((dir / "psd.csv").string(), pt);

    write_kv(dir / "summary.txt",
             {{"lo_phase_rad", fmt(phase)},
              {"dc", fmt(res.dc)},
              {"snr_lockin_db", fmt(cmp.lockin_db)},
              {"snr_direct_db", fmt(cmp.direct_db)},
              {"lockin_gain_db", fmt(cmp.gain_db)}});
    write_resolved_config(dir, cfg);

    std::cout << "lockin-demo: dc = " << fmt(res.dc) << ", phase = " << fmt(phase)
              << " rad, lock-in gain over direct detection = " << fmt(cmp.gain_db)
              << " dB\noutputs: " << dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// phantom-gen / image
// ---------------------------------------------------------------------------
imaging::PhantomSpec phantom_spec_from(const io::RunConfig& cfg) {
    const std::string file = cfg.get_string("phantom.file", "");
    imaging::PhantomSpec spec;
    if (file.empty()) {
        spec = imaging::default_yeast_spec(
            static_cast<std::uint64_t>(cfg.get_long("seed", 1)));
    } else {
        std::ifstream in(file);
        if (!in) throw std::runtime_error("cannot open phantom spec: " + file);
        std::stringstream ss;
        ss << in.rdbuf();
        spec = imaging::parse_phantom_spec(ss.str());
    }
    if (cfg.has("phantom.blur_nm"))
        spec.psf_radius_nm = cfg.get_double("phantom.blur_nm", spec.psf_radius_nm);
    return spec;
}

int cmd_phantom_gen(const GlobalArgs& g) {
    auto cfg = load_config(g);
    const auto spec = phantom_spec_from(cfg);
    const auto scan = scan_from(cfg);
    const auto dir = make_out_dir("phantom-gen", g, cfg);

    const auto ph = imaging::build_phantom(spec, scan.nx, scan.ny, scan.pitch_nm);
    io::atomic_write_text((dir / "phantom_spec.txt").string(),
                          imaging::phantom_spec_text(spec));
    for (int c = 0; c < 3; ++c) {
        const auto& m = ph.concentration[c];
        double peak = 0.0;
        for (double v : m) peak = std::max(peak, v);
        std::vector<double> norm(m.size(), 0.0);
        if (peak > 0)
            for (std::size_t i = 0; i < m.size(); ++i) norm[i] = m[i] / peak;
        const std::string name =
            std::string("conc_") + srs::chemical_name(srs::kChemicals[c]) + ".pgm";
        io::write_pgm16((dir / name).string(), ph.nx, ph.ny, norm);
    }
    std::vector<double> sup(ph.support.begin(), ph.support.end());
    io::write_pgm16((dir / "support.pgm").string(), ph.nx, ph.ny, sup);
    write_resolved_config(dir, cfg);
    std::cout << "phantom-gen: " << spec.shapes.size() << " shapes, "
              << ph.bright_organelles << " bright organelles\noutputs: " << dir.string()
              << "\n";
    return kExitOk;
}

int cmd_image(const GlobalArgs& g, double shift_override, const std::string& squeeze,
              bool multispectral, const std::string& enhance_region) {
    auto cfg = load_config(g);
    const auto spec = phantom_spec_from(cfg);
    auto scan = scan_from(cfg);
    if (shift_override > 0) scan.shift_cm1 = shift_override;
    if (squeeze == "on") scan.squeezer_on = true;
    if (squeeze == "off") scan.squeezer_on = false;
    const auto illum = illum_from(cfg);
    const auto noise = noise_from(cfg);
    const auto dir = make_out_dir("image", g, cfg);

    bool have_region = false;
    imaging::Region region;
    if (!enhance_region.empty()) {
        if (std::sscanf(enhance_region.c_str(), "%d,%d,%d,%d", &region.x0, &region.y0,
                        &region.x1, &region.y1) != 4) {
            std::cerr << "image: bad --enhance-region (want x0,y0,x1,y1)\n";
            return kExitUsage;
        }
        have_region = true;
    }

    const auto ph = imaging::build_phantom(spec, scan.nx, scan.ny, scan.pitch_nm);

    auto acquire_pair = [&](double shift, std::uint64_t salt)
        -> std::pair<imaging::ScanImage, std::optional<imaging::ScanImage>> {
        auto s = scan;
        s.shift_cm1 = shift;
        s.seed = util::splitmix64(scan.seed ^ salt);
        auto img = imaging::acquire_image(ph, s, illum, noise);
        std::optional<imaging::ScanImage> ref;
        if (have_region) {
            auto rs = s;
            rs.squeezer_on = false;
            rs.pump_on = false;
            rs.seed = util::splitmix64(s.seed ^ 0x5e1fCafeull);
            ref = imaging::acquire_image(ph, rs, illum, noise);
        }
        return {std::move(img), std::move(ref)};
    };

    auto dump = [&](const imaging::ScanImage& img, const std::string& stem) {
        std::vector<double> norm(img.dc.size());
        double mn = img.dc[0], mx = img.dc[0];
        for (double v : img.dc) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        for (std::size_t i = 0; i < img.dc.size(); ++i)
            norm[i] = mx > mn ? (img.dc[i] - mn) / (mx - mn) : 0.0;
        io::write_pgm16((dir / (stem + "_dc.pgm")).string(), img.nx, img.ny, norm);
        imaging::write_image_csv((dir / (stem + ".csv")).string(), img);
    };

    std::vector<std::pair<std::string, std::string>> summary;
    if (multispectral) {
        const std::array<double, 3> shifts{srs::kDnaShift, srs::kProteinShift,
                                           srs::kLipidShift};
        const std::array<std::string, 3> stems{"image_dna_2967", "image_protein_2926",
                                               "image_lipid_2850"};
        std::vector<imaging::ScanImage> imgs;
        for (int i = 0; i < 3; ++i) {
            auto [img, ref] = acquire_pair(shifts[i], 0x100 + i);
            dump(img, stems[i]);
            if (ref) {
                const double db = imaging::measure_enhancement_db(img, *ref, region);
                summary.emplace_back(
                    "enhancement_db_" + std::to_string(static_cast<int>(shifts[i])),
                    fmt(db));
            }
            imgs.push_back(std::move(img));
        }
        const auto rgb = imaging::compose_rgb(imgs[0], imgs[1], imgs[2]);
        io::write_ppm16((dir / "composite_rgb.ppm").string(), rgb.nx, rgb.ny, rgb.r, rgb.g,
                        rgb.b);
        summary.emplace_back("wall_time_s", fmt(imgs[0].wall_time_s));
    } else {
        auto [img, ref] = acquire_pair(scan.shift_cm1, 0);
        dump(img, "image");
        std::vector<double> snr_norm(img.snr_db.size());
        for (std::size_t i = 0; i < img.snr_db.size(); ++i)
            snr_norm[i] = std::clamp(img.snr_db[i] / 20.0, 0.0, 1.0);
        io::write_pgm16((dir / "image_snr.pgm").string(), img.nx, img.ny, snr_norm);
        double peak = -std::numeric_limits<double>::infinity();
        for (double v : img.snr_db) peak = std::max(peak, v);
        summary.emplace_back("shift_cm1", fmt(scan.shift_cm1));
        summary.emplace_back("peak_snr_db", fmt(peak));
        summary.emplace_back("wall_time_s", fmt(img.wall_time_s));
        summary.emplace_back("calibration_k", fmt(img.calibration_k));
        if (ref) {
            const double db = imaging::measure_enhancement_db(img, *ref, region);
            summary.emplace_back("enhancement_db", fmt(db));
        }
    }
    write_kv(dir / "summary.txt", summary);
    write_resolved_config(dir, cfg);
    std::cout << "image: done\noutputs: " << dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// dwell
// ---------------------------------------------------------------------------
int cmd_dwell(const GlobalArgs& g, const std::string& input, bool demo) {
    auto cfg = load_config(g);
    const double squeeze_db = cfg.get_double("dwell.squeeze_db", 1.1);
    dwell::SegmentSnrOptions opts;
    opts.first_segment_numerator = !cfg.get_bool("dwell.all_segments", false);
    const int n_tau = static_cast<int>(cfg.get_long("dwell.n_tau", 16));
    const auto dir = make_out_dir("dwell", g, cfg);

    std::vector<double> trace;
    double dt = 0.5e-6;
    std::optional<std::vector<double>> shot_trace;
    if (demo) {
        dwell::DwellTraceSpec spec;
        spec.snr_at_1ms = cfg.get_double("dwell.snr_1ms", 328.0);
        const auto seed = static_cast<std::uint64_t>(cfg.get_long("seed", 9));
        trace = dwell::make_dwell_trace(spec, seed);
        auto shot = spec;
        shot.noise_power_scale = util::from_db(squeeze_db);
        shot_trace = dwell::make_dwell_trace(shot, seed);
        dt = spec.dt_s;
        io::CsvTable t;
        t.header = {"t_s", "dc"};
        t.columns.resize(2);
        for (std::size_t i = 0; i < trace.size(); ++i) {
            t.columns[0].push_back(static_cast<double>(i) * dt);
            t.columns[1].push_back(trace[i]);
        }
        io::write_csv((dir / "pixel_trace.csv").string(), t);
    } else {
        if (input.empty()) {
            std::cerr << "dwell: need --input trace.csv or --demo\n";
            return kExitUsage;
        }
        io::CsvTable t;
        try {
            t = io::read_csv(input);
        } catch (const std::exception& e) {
            std::cerr << "dwell: " << e.what() << "\n";
            return kExitUsage;
        }
        const int ct = t.column_index("t_s");
        const int cv = t.column_index("dc");
        if (ct < 0 || cv < 0 || t.rows() < 2) {
            std::cerr << "dwell: " << input << ": expected columns t_s,dc\n";
            return kExitUsage;
        }
        dt = t.columns[ct][1] - t.columns[ct][0];
        trace = t.columns[cv];
    }

    const auto curve = dwell::min_dwell(trace, dt, opts, n_tau);
    io::CsvTable t;
    t.header = {"tau_s", "snr"};
    t.columns.resize(2);
    for (const auto& p : curve.points) {
        t.columns[0].push_back(p.tau_s);
        t.columns[1].push_back(p.snr);
    }
    io::write_csv((dir / "dwell_curve.csv").string(), t);

    std::vector<std::pair<std::string, std::string>> summary{
        {"tau_min_s", fmt(curve.tau_min_s)},
        {"fit_rms_log10", fmt(curve.fit_rms_log10)},
        {"slope_unconstrained", fmt(curve.slope_unconstrained)},
        {"poor_fit", curve.poor_fit ? "1" : "0"},
        {"numerator", opts.first_segment_numerator ? "first-segment" : "all-segments"},
        {"speedup_ratio", fmt(dwell::quantum_speedup_ratio(squeeze_db))},
        {"speedup_percent", fmt(100.0 * dwell::quantum_speedup_fraction(squeeze_db))},
    };
    if (shot_trace) {
        const auto shot = dwell::min_dwell(*shot_trace, dt, opts, n_tau);
        io::CsvTable ts;
        ts.header = {"tau_s", "snr"};
        ts.columns.resize(2);
        for (const auto& p : shot.points) {
            ts.columns[0].push_back(p.tau_s);
            ts.columns[1].push_back(p.snr);
        }
        io::write_csv((dir / "dwell_curve_shot.csv").string(), ts);
        summary.emplace_back("tau_min_shot_s", fmt(shot.tau_min_s));
        summary.emplace_back("measured_ratio", fmt(shot.tau_min_s / curve.tau_min_s));
        summary.emplace_back(
            "video_50hz_side_shot",
            std::to_string(dwell::video_rate_budget(50.0, shot.tau_min_s).side_pixels));
    }
    summary.emplace_back(
        "video_50hz_side",
        std::to_string(dwell::video_rate_budget(50.0, curve.tau_min_s).side_pixels));
    write_kv(dir / "summary.txt", summary);
    write_resolved_config(dir, cfg);

    std::cout << "dwell: tau_min = " << fmt(curve.tau_min_s * 1e6)
              << " us, slope = " << fmt(curve.slope_unconstrained) << ", speedup at "
              << fmt(squeeze_db) << " dB = "
              << fmt(100.0 * dwell::quantum_speedup_fraction(squeeze_db))
              << "%\noutputs: " << dir.string() << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale quantum-enhanced SRS microscopy simulator"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "key=value run configuration file");
    app.add_option("--out", g.out_dir, "output directory (default: auto-named)");
    std::uint64_t seed_val = 0;
    auto* seed_opt = app.add_option("--seed", seed_val, "master RNG seed");

    auto* fit =
        app.add_subcommand("fit-opa", "fit the two-mode OPA model to a radial profile");
    std::string fit_input;
    bool fit_demo = false;
    double fit_demo_noise = 0.0;
    fit->add_option("--input", fit_input, "profile CSV with columns r,intensity");
    fit->add_flag("--demo", fit_demo, "generate and fit the bundled synthetic profile");
    fit->add_option("--demo-noise", fit_demo_noise, "multiplicative noise sigma for --demo");

    auto* sweep = app.add_subcommand("squeeze-sweep", "squeezing level vs aperture radius");
    auto* snr = app.add_subcommand("snr-sweep", "SRS SNR vs Stokes-to-pump ratio");

    auto* lockin = app.add_subcommand("lockin-demo", "synthesize a pixel and demodulate it");
    double li_amp = 0.05, li_dur = 1e-3;
    lockin->add_option("--amplitude", li_amp, "20 MHz signal amplitude (a.u.)");
    lockin->add_option("--duration", li_dur, "trace duration in seconds");

    auto* pg = app.add_subcommand("phantom-gen", "rasterize a phantom to concentration maps");

    auto* image =
        app.add_subcommand("image", "raster-scan a phantom through the signal chain");
    double img_shift = 0.0;
    std::string img_squeeze, img_region;
    bool img_multi = false;
    image->add_option("--shift", img_shift, "Raman shift in cm^-1");
    image->add_option("--squeeze", img_squeeze, "on|off")
        ->check(CLI::IsMember({"on", "off"}));
    image->add_flag("--multispectral", img_multi, "acquire 2967/2926/2850 and compose RGB");
    image->add_option("--enhance-region", img_region,
                      "background region x0,y0,x1,y1 for the enhancement report");

    auto* dw = app.add_subcommand("dwell", "minimum pixel dwell time from a DC trace");
    std::string dw_input;
    bool dw_demo = false;
    dw->add_option("--input", dw_input, "trace CSV with columns t_s,dc");
    dw->add_flag("--demo", dw_demo, "analyze the bundled calibrated pixel trace");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);
    if (seed_opt->count() > 0) g.seed = seed_val;

    try {
        if (fit->parsed()) return cmd_fit_opa(g, fit_input, fit_demo, fit_demo_noise);
        if (sweep->parsed()) return cmd_squeeze_sweep(g);
        if (snr->parsed()) return cmd_snr_sweep(g);
        if (lockin->parsed()) return cmd_lockin_demo(g, li_amp, li_dur);
        if (pg->parsed()) return cmd_phantom_gen(g);
        if (image->parsed())
            return cmd_image(g, img_shift, img_squeeze, img_multi, img_region);
        if (dw->parsed()) return cmd_dwell(g, dw_input, dw_demo);
    } catch (const saturation_error& e) {
        std::cerr << "error: detector saturation: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << "\n";
        if (what.find("config") != std::string::npos ||
            what.find("unknown") != std::string::npos)
            return kExitUsage;
        return 1;
    }
    return kExitOk;
}
