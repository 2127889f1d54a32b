#include "srsim/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace srsim::io {

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys = {
        // illumination
        "illum.stokes_nm", "illum.pump_nm", "illum.stokes_mw", "illum.pump_mw",
        "illum.intensity_w_um2", "illum.damage_threshold_w_um2",
        // noise / trace synthesis
        "noise.detected_power_mw", "noise.squeeze_db", "noise.electronic_db",
        "noise.spurious_amp", "noise.spurious_phase_rad", "noise.pulse_depth",
        "noise.signal_phase_rad",
        // detector
        "detector.qe", "detector.max_mw", "detector.center_mhz", "detector.bandwidth_mhz",
        // lock-in
        "lockin.lowpass_hz", "lockin.order", "lockin.decimation", "lockin.rate_msps",
        // scan
        "scan.nx", "scan.ny", "scan.pitch_nm", "scan.dwell_ms", "scan.line_overhead_ms",
        "scan.shift_cm1", "scan.squeezer", "scan.threads", "scan.damage_override",
        "scan.resonant",
        // squeeze-optics model
        "model.w0", "model.a00", "model.a01", "model.eta",
        // sweeps
        "sweep.ratio_min", "sweep.ratio_max", "sweep.ratio_n", "sweep.rap_min",
        "sweep.rap_max", "sweep.rap_n",
        // phantom
        "phantom.file", "phantom.blur_nm",
        // dwell analysis
        "dwell.snr_1ms", "dwell.squeeze_db", "dwell.n_tau", "dwell.all_segments",
        // misc
        "seed", "out.root",
    };
    return keys;
}

static bool key_known(const std::string& key) {
    const auto& keys = RunConfig::known_keys();
    return std::find(keys.begin(), keys.end(), key) != keys.end();
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped;
        for (char c : line) {
            if (c == '#') break;
            stripped.push_back(c);
        }
        while (!stripped.empty() && (stripped.back() == ' ' || stripped.back() == '\t'))
            stripped.pop_back();
        std::size_t start = stripped.find_first_not_of(" \t");
        if (start == std::string::npos) continue;
        stripped = stripped.substr(start);
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        cfg.set(stripped.substr(0, eq), stripped.substr(eq + 1));
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    if (!key_known(key)) throw std::runtime_error("unknown config key: " + key);
    values_[key] = value;
    resolved_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return values_.count(key) > 0; }

double RunConfig::get_double(const std::string& key, double def) const {
    if (!key_known(key)) throw std::runtime_error("unknown config key: " + key);
    const auto it = values_.find(key);
    double v = def;
    if (it != values_.end()) {
        char* end = nullptr;
        v = std::strtod(it->second.c_str(), &end);
        if (end == it->second.c_str() || (end && *end != '\0'))
            throw std::runtime_error("config key " + key + ": bad number '" + it->second +
                                     "'");
    }
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    resolved_[key] = buf;
    return v;
}

long RunConfig::get_long(const std::string& key, long def) const {
    const double v = get_double(key, static_cast<double>(def));
    resolved_[key] = std::to_string(static_cast<long>(v));
    return static_cast<long>(v);
}

bool RunConfig::get_bool(const std::string& key, bool def) const {
    if (!key_known(key)) throw std::runtime_error("unknown config key: " + key);
    const auto it = values_.find(key);
    bool v = def;
    if (it != values_.end()) {
        const std::string& s = it->second;
        if (s == "on" || s == "true" || s == "1")
            v = true;
        else if (s == "off" || s == "false" || s == "0")
            v = false;
        else
            throw std::runtime_error("config key " + key + ": bad boolean '" + s + "'");
    }
    resolved_[key] = v ? "on" : "off";
    return v;
}

std::string RunConfig::get_string(const std::string& key, const std::string& def) const {
    if (!key_known(key)) throw std::runtime_error("unknown config key: " + key);
    const auto it = values_.find(key);
    const std::string v = it != values_.end() ? it->second : def;
    resolved_[key] = v;
    return v;
}

std::string RunConfig::resolved_text() const {
    std::string out;
    for (const auto& [k, v] : resolved_) {  // std::map iterates sorted
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

std::uint64_t RunConfig::resolved_hash() const { return fnv1a64(resolved_text()); }

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace srsim::io
