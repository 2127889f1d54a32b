#include "srsim/squeeze_optics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "srsim/math_util.hpp"

namespace srsim::optics {

namespace {
constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw std::domain_error(std::string(name) + " must be finite");
}
}  // namespace

double lg_radial_amplitude(int p, double r, double w0) {
    check_finite(r, "r");
    check_finite(w0, "w0");
    if (r < 0) throw std::domain_error("lg_radial_amplitude: r must be >= 0");
    if (w0 <= 0) throw std::domain_error("lg_radial_amplitude: w0 must be > 0");
    if (p != 0 && p != 1) throw std::domain_error("lg_radial_amplitude: p must be 0 or 1");
    const double x = r * r / (w0 * w0);
    const double g = kSqrt2OverPi / w0 * std::exp(-x);
    return p == 0 ? g : g * (1.0 - 2.0 * x);
}

double mode_power_within(int p, double w0, double r_ap) {
    check_finite(r_ap, "r_ap");
    check_finite(w0, "w0");
    if (w0 <= 0) throw std::domain_error("mode_power_within: w0 must be > 0");
    if (r_ap < 0) throw std::domain_error("mode_power_within: r_ap must be >= 0");
    if (p != 0 && p != 1) throw std::domain_error("mode_power_within: p must be 0 or 1");
    const double x = 2.0 * r_ap * r_ap / (w0 * w0);
    if (p == 0) return -std::expm1(-x);
    return 1.0 - (1.0 + x * x) * std::exp(-x);
}

ModeDecomposition decompose_seed(double w, double w0) {
    if (!(w > 0) || !(w0 > 0))
        throw std::domain_error("decompose_seed: widths must be > 0");
    const double s = w * w + w0 * w0;
    ModeDecomposition d;
    d.c00 = 2.0 * w * w0 / s;
    d.c01 = 2.0 * w * w0 * (w0 * w0 - w * w) / (s * s);
    d.residual = 1.0 - d.c00 * d.c00 - d.c01 * d.c01;
    return d;
}

void OpaModel::validate() const {
    if (!(w0 > 0) || !(a00 > 0) || !(a01 > 0) || !std::isfinite(w0) ||
        !std::isfinite(a00) || !std::isfinite(a01))
        throw std::domain_error("OpaModel: w0, a00, a01 must be positive and finite");
}

double seed_intensity(double r) {
    const double a = lg_radial_amplitude(0, r, kSeedWidth);
    return a * a;
}

double pumped_intensity(const OpaModel& model, double r) {
    model.validate();
    const ModeDecomposition d = decompose_seed(kSeedWidth, model.w0);
    const double amp = std::sqrt(model.a00) * d.c00 * lg_radial_amplitude(0, r, model.w0) +
                       std::sqrt(model.a01) * d.c01 * lg_radial_amplitude(1, r, model.w0);
    return amp * amp;
}

std::vector<double> pumped_profile(const OpaModel& model, std::span<const double> r) {
    std::vector<double> out(r.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        out[i] = pumped_intensity(model, r[i]);
        peak = std::max(peak, out[i]);
    }
    if (peak > 0) {
        for (auto& v : out) v /= peak;
    }
    return out;
}

std::vector<double> seed_relative_profile(const OpaModel& model, std::span<const double> r) {
    const double peak = seed_intensity(0.0);
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        out[i] = pumped_intensity(model, r[i]) / peak;
    return out;
}

std::vector<double> deamplification_map(const OpaModel& model, std::span<const double> r) {
    std::vector<double> pumped(r.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        pumped[i] = pumped_intensity(model, r[i]);
        peak = std::max(peak, pumped[i]);
    }
    std::vector<double> out(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (pumped[i] < 1e-12 * peak) {
            out[i] = std::numeric_limits<double>::quiet_NaN();
        } else {
            out[i] = seed_intensity(r[i]) / pumped[i];
        }
    }
    return out;
}

double detected_variance(const OpaModel& model, double eta, std::optional<double> r_ap) {
    model.validate();
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::domain_error("detected_variance: eta must be in [0, 1]");
    const ModeDecomposition d = decompose_seed(kSeedWidth, model.w0);
    double t0 = 1.0, t1 = 1.0;
    if (r_ap) {
        t0 = mode_power_within(0, model.w0, *r_ap);
        t1 = mode_power_within(1, model.w0, *r_ap);
    }
    const double p0 = d.c00 * d.c00 * t0;
    const double p1 = d.c01 * d.c01 * t1;
    const double v = model.a00 * p0 + model.a01 * p1 + (1.0 - p0 - p1);
    return eta * v + (1.0 - eta);
}

SqueezeCurve sweep_aperture(const OpaModel& model, double eta,
                            std::span<const double> radii) {
    if (radii.empty())
        throw std::invalid_argument("sweep_aperture: radii list must not be empty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0))
            throw std::invalid_argument("sweep_aperture: radii must be > 0");
        if (i > 0 && radii[i] < radii[i - 1])
            throw std::invalid_argument("sweep_aperture: radii must be sorted ascending");
    }
    SqueezeCurve curve;
    curve.eta = eta;
    curve.no_aperture_variance = detected_variance(model, eta, std::nullopt);
    curve.points.reserve(radii.size());
    for (double r : radii) {
        const double v = detected_variance(model, eta, r);
        curve.points.push_back({r, v, srsim::util::variance_to_squeezing_db(v)});
    }
    return curve;
}

double optimal_aperture(const SqueezeCurve& curve) {
    if (curve.points.empty()) throw std::invalid_argument("optimal_aperture: empty curve");
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].variance <= curve.points[best].variance) best = i;
    }
    return curve.points[best].r_ap;
}

// ---------------------------------------------------------------------------
// fit_opa: multi-start Levenberg-Marquardt on log-parameters
// ---------------------------------------------------------------------------
namespace {

struct FitProblem {
    std::span<const double> r;
    std::span<const double> y;
    int evaluations = 0;

    // p = (log w0, log a00, log a01); log-space keeps the parameters positive.
    void residuals(const double p[3], std::vector<double>& res) {
        OpaModel m{std::exp(p[0]), std::exp(p[1]), std::exp(p[2])};
        const auto model = seed_relative_profile(m, r);
        ++evaluations;
        res.resize(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) res[i] = model[i] - y[i];
    }

    double cost(const std::vector<double>& res) const {
        double s = 0.0;
        for (double v : res) s += v * v;
        return 0.5 * s;
    }
};

// Dense 3x3 solve, partial pivoting.
bool solve3(double a[3][3], double b[3], double x[3]) {
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(a[idx[row]][col]) > std::abs(a[idx[piv]][col])) piv = row;
        std::swap(idx[col], idx[piv]);
        const double d = a[idx[col]][col];
        if (std::abs(d) < 1e-300) return false;
        for (int row = col + 1; row < 3; ++row) {
            const double f = a[idx[row]][col] / d;
            for (int k = col; k < 3; ++k) a[idx[row]][k] -= f * a[idx[col]][k];
            b[idx[row]] -= f * b[idx[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double s = b[idx[col]];
        for (int k = col + 1; k < 3; ++k) s -= a[idx[col]][k] * x[k];
        x[col] = s / a[idx[col]][col];
    }
    return true;
}

double levmar(FitProblem& prob, double p[3], int max_iter) {
    std::vector<double> res, res_try, res_pert;
    prob.residuals(p, res);
    double cost = prob.cost(res);
    double lambda = 1e-3;
    const std::size_t n = res.size();
    std::vector<std::array<double, 3>> jac(n);

    for (int iter = 0; iter < max_iter; ++iter) {
        // forward-difference Jacobian
        for (int j = 0; j < 3; ++j) {
            const double h = 1e-6;
            double pp[3] = {p[0], p[1], p[2]};
            pp[j] += h;
            prob.residuals(pp, res_pert);
            for (std::size_t i = 0; i < n; ++i) jac[i][j] = (res_pert[i] - res[i]) / h;
        }
        double jtj[3][3] = {};
        double jtr[3] = {};
        for (std::size_t i = 0; i < n; ++i) {
            for (int a = 0; a < 3; ++a) {
                jtr[a] += jac[i][a] * res[i];
                for (int b = 0; b < 3; ++b) jtj[a][b] += jac[i][a] * jac[i][b];
            }
        }
        bool stepped = false;
        for (int attempt = 0; attempt < 10 && !stepped; ++attempt) {
            double a[3][3];
            double b[3], dp[3];
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) a[i][j] = jtj[i][j];
                a[i][i] += lambda * (jtj[i][i] > 1e-12 ? jtj[i][i] : 1.0);
                b[i] = -jtr[i];
            }
            if (!solve3(a, b, dp)) {
                lambda *= 10.0;
                continue;
            }
            double pt[3] = {p[0] + dp[0], p[1] + dp[1], p[2] + dp[2]};
            // keep the search inside a sane region; exp(9) overflows the model
            for (int i = 0; i < 3; ++i) pt[i] = std::clamp(pt[i], -9.0, 3.0);
            prob.residuals(pt, res_try);
            const double cost_try = prob.cost(res_try);
            if (cost_try < cost) {
                const double rel = (cost - cost_try) / std::max(cost, 1e-300);
                p[0] = pt[0];
                p[1] = pt[1];
                p[2] = pt[2];
                res = res_try;
                cost = cost_try;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel < 1e-14) return cost;
            } else {
                lambda *= 10.0;
            }
        }
        if (!stepped) break;  // stalled
    }
    return cost;
}

}  // namespace

OpaFit fit_opa(std::span<const double> r, std::span<const double> intensity) {
    if (r.size() != intensity.size())
        throw std::invalid_argument("fit_opa: r and intensity sizes differ");
    if (r.size() < 20)
        throw std::invalid_argument("fit_opa: need at least 20 radial samples");
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] >= 0) || !std::isfinite(intensity[i]) || intensity[i] < 0)
            throw std::invalid_argument("fit_opa: samples must be finite and nonnegative");
    }

    FitProblem prob{r, intensity};

    // Coarse deterministic start grid.
    static constexpr double kW0[] = {0.5, 0.75, 1.0, 1.25, 1.5};
    static constexpr double kA00[] = {0.2, 0.6, 1.0, 1.4};
    static constexpr double kA01[] = {0.5, 2.0, 4.0, 6.0};

    struct Candidate {
        double p[3];
        double cost;
    };
    std::vector<Candidate> starts;
    std::vector<double> res;
    for (double w0 : kW0) {
        for (double a00 : kA00) {
            for (double a01 : kA01) {
                Candidate c{{std::log(w0), std::log(a00), std::log(a01)}, 0.0};
                prob.residuals(c.p, res);
                c.cost = prob.cost(res);
                starts.push_back(c);
            }
        }
    }
    std::sort(starts.begin(), starts.end(),
              [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });

    double best_p[3] = {starts[0].p[0], starts[0].p[1], starts[0].p[2]};
    double best_cost = starts[0].cost;

    // Refine the most promising starts; several are kept because the cost
    // surface has local minima when a01 trades against w0.
    const std::size_t n_refine = std::min<std::size_t>(8, starts.size());
    for (std::size_t i = 0; i < n_refine; ++i) {
        double p[3] = {starts[i].p[0], starts[i].p[1], starts[i].p[2]};
        const double c = levmar(prob, p, 80);
        if (c < best_cost) {
            best_cost = c;
            std::copy(p, p + 3, best_p);
        }
    }

    OpaFit fit;
    fit.model = OpaModel{std::exp(best_p[0]), std::exp(best_p[1]), std::exp(best_p[2])};
    fit.residual_norm = std::sqrt(2.0 * best_cost / static_cast<double>(r.size()));
    fit.evaluations = prob.evaluations;
    fit.converged = fit.residual_norm <= kFitResidualThreshold;
    fit.message = fit.converged ? "converged"
                                : "residual above threshold; returning best candidate";
    return fit;
}

}  // namespace srsim::optics
