#pragma once

#include <stdexcept>
#include <string>

namespace srsim {

// Detected optical power beyond the linear range of the photodetector.
struct saturation_error : std::runtime_error {
    explicit saturation_error(const std::string& what) : std::runtime_error(what) {}
};

// Phase optimization found no coherent component above the noise.
struct indeterminate_phase_error : std::runtime_error {
    explicit indeterminate_phase_error(const std::string& what)
        : std::runtime_error(what) {}
};

// Background region overlaps the phantom support.
struct invalid_region_error : std::runtime_error {
    explicit invalid_region_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace srsim
