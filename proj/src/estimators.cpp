#include "kernrates/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "kernrates/numerics.hpp"

namespace kernrates {

BandwidthGrid bandwidth_grid(double a_n, double b_n, int count) {
    if (!(a_n > 0.0) || !std::isfinite(a_n) || !std::isfinite(b_n))
        fail(Errc::invalid_input, "bandwidth_grid: bounds must be finite and positive");
    if (b_n < a_n) fail(Errc::invalid_input, "bandwidth_grid: requires a_n <= b_n");
    if (count < 1) fail(Errc::invalid_input, "bandwidth_grid: count must be >= 1");
    if (count == 1 && a_n != b_n)
        fail(Errc::invalid_input, "bandwidth_grid: count == 1 requires a_n == b_n");

    BandwidthGrid g;
    g.lower = a_n;
    g.upper = b_n;
    g.values.resize(count);
    if (count == 1) {
        g.values[0] = a_n;
        return g;
    }
    const double log_ratio = std::log(b_n / a_n);
    for (int i = 0; i < count; ++i)
        g.values[i] = a_n * std::exp(log_ratio * static_cast<double>(i) / (count - 1));
    g.values.front() = a_n;
    g.values.back() = b_n;
    for (int i = 1; i < count; ++i)
        if (!(g.values[i] > g.values[i - 1]))
            fail(Errc::invalid_input, "bandwidth_grid: grid not strictly increasing");
    return g;
}

EvalGrid line_grid(double radius, std::size_t count) {
    if (!(radius >= 0.0) || count == 0)
        fail(Errc::invalid_input, "line_grid: need radius >= 0 and count >= 1");
    EvalGrid g;
    g.dim = 1;
    g.radius = radius;
    g.points.resize(count);
    if (count == 1) {
        g.points[0] = 0.0;
        return g;
    }
    for (std::size_t i = 0; i < count; ++i)
        g.points[i] = -radius + 2.0 * radius * static_cast<double>(i) / (count - 1);
    return g;
}

EvalGrid make_eval_grid(std::size_t dim, double radius, std::vector<double> points) {
    if (dim == 0 || points.empty() || points.size() % dim != 0)
        fail(Errc::invalid_input, "make_eval_grid: bad dimensions");
    EvalGrid g;
    g.dim = dim;
    g.radius = radius;
    g.points = std::move(points);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double norm2 = 0.0;
        for (double v : g.point(i)) {
            if (!std::isfinite(v)) fail(Errc::invalid_input, "make_eval_grid: non-finite point");
            norm2 += v * v;
        }
        if (std::sqrt(norm2) > radius * (1.0 + 1e-12))
            fail(Errc::invalid_input, "make_eval_grid: point outside |w| <= radius");
    }
    return g;
}

namespace {

void check_bandwidth(double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        fail(Errc::invalid_bandwidth, "bandwidth must be positive and finite");
    if (h < min_bandwidth)
        fail(Errc::invalid_bandwidth, "bandwidth below 1e-8 guard");
}

void check_point(std::span<const double> w) {
    for (double v : w)
        if (!std::isfinite(v)) fail(Errc::invalid_input, "evaluation point must be finite");
}

// Kernel-weighted sum core: sum_t phi_t * prod_l k((w_l - wx_{t,l})/h),
// over precomputed projections wx (n x d) and phi values (empty == 1).
// Fixed t order with compensated accumulation keeps results identical
// across runs and worker counts.
double weighted_kernel_sum(std::span<const double> phivals, std::span<const double> wx,
                           std::size_t n, std::size_t d, const Kernel& kernel, double h,
                           std::span<const double> w) {
    CompensatedSum acc;
    const double inv_h = 1.0 / h;
    const bool truncated = kernel.support.has_value();
    const double L = truncated ? *kernel.support : 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double* row = wx.data() + t * d;
        double weight = 1.0;
        for (std::size_t l = 0; l < d; ++l) {
            const double u = (w[l] - row[l]) * inv_h;
            if (truncated && std::fabs(u) > L) {
                weight = 0.0;
                break;
            }
            weight *= kernel(u);
            if (weight == 0.0) break;
        }
        if (weight == 0.0) continue;
        acc.add(phivals.empty() ? weight : phivals[t] * weight);
    }
    return acc.value();
}

struct ProjectedSample {
    std::size_t n = 0;
    std::size_t d = 1;
    std::vector<double> wx;       // n x d projections W(X_t)
    std::vector<double> phivals;  // empty means phi == 1
};

ProjectedSample project(const Sample& sample, const WSpec& w_map, const PhiSpec* phi) {
    ProjectedSample ps;
    ps.n = sample.n();
    ps.d = w_output_dim(w_map, sample.p());
    ps.wx.resize(ps.n * ps.d);
    for (std::size_t t = 0; t < ps.n; ++t)
        w_eval_into(w_map, sample.x_row(t), {ps.wx.data() + t * ps.d, ps.d});
    if (phi != nullptr) {
        ps.phivals.resize(ps.n);
        for (std::size_t t = 0; t < ps.n; ++t)
            ps.phivals[t] = phi_eval(*phi, sample.y_row(t), sample.x_row(t));
    }
    return ps;
}

double scale(double n, double h, std::size_t d) {
    return 1.0 / (n * std::pow(h, static_cast<double>(d)));
}

}  // namespace

double estimate_T(const Sample& sample, const PsiIndex& psi, const Kernel& kernel, double h,
                  std::span<const double> w) {
    check_bandwidth(h);
    check_point(w);
    ProjectedSample ps = project(sample, psi.w_map, &psi.phi);
    if (w.size() != ps.d) fail(Errc::invalid_input, "estimate_T: w has wrong dimension");
    return scale(static_cast<double>(ps.n), h, ps.d) *
           weighted_kernel_sum(ps.phivals, ps.wx, ps.n, ps.d, kernel, h, w);
}

double estimate_f(const Sample& sample, const WSpec& w_map, const Kernel& kernel, double h,
                  std::span<const double> w) {
    check_bandwidth(h);
    check_point(w);
    ProjectedSample ps = project(sample, w_map, nullptr);
    if (w.size() != ps.d) fail(Errc::invalid_input, "estimate_f: w has wrong dimension");
    return scale(static_cast<double>(ps.n), h, ps.d) *
           weighted_kernel_sum({}, ps.wx, ps.n, ps.d, kernel, h, w);
}

std::optional<double> estimate_m(const Sample& sample, const PsiIndex& psi, const Kernel& kernel,
                                 double h, std::span<const double> w, double trim_tau) {
    if (!(trim_tau > 0.0)) fail(Errc::invalid_input, "estimate_m: trim_tau must be > 0");
    check_bandwidth(h);
    check_point(w);
    ProjectedSample ps = project(sample, psi.w_map, &psi.phi);
    if (w.size() != ps.d) fail(Errc::invalid_input, "estimate_m: w has wrong dimension");
    const double s = scale(static_cast<double>(ps.n), h, ps.d);
    const double fhat = s * weighted_kernel_sum({}, ps.wx, ps.n, ps.d, kernel, h, w);
    if (!(fhat >= trim_tau)) return std::nullopt;
    const double that = s * weighted_kernel_sum(ps.phivals, ps.wx, ps.n, ps.d, kernel, h, w);
    return that / fhat;
}

EstimateSurface estimate_surface(const Sample& sample, std::span<const PsiIndex> psi_grid,
                                 const Kernel& kernel, std::span<const double> h_values,
                                 const EvalGrid& grid, SurfaceStat stat, double trim_tau,
                                 int workers) {
    if (psi_grid.empty() || h_values.empty() || grid.size() == 0)
        fail(Errc::invalid_input, "estimate_surface: empty grid");
    if (stat == SurfaceStat::ratio_m && !(trim_tau > 0.0))
        fail(Errc::invalid_input, "estimate_surface: ratio needs trim_tau > 0");
    for (double h : h_values) check_bandwidth(h);

    EstimateSurface out;
    out.kernel_name = kernel.name;
    out.n = sample.n();
    out.stat = stat;
    out.trim_tau = trim_tau;
    out.h_values.assign(h_values.begin(), h_values.end());
    out.psi_count = psi_grid.size();
    out.grid = grid;

    // Project once per psi; every (h, w) cell reuses the projections.
    std::vector<ProjectedSample> projected;
    projected.reserve(psi_grid.size());
    for (const PsiIndex& psi : psi_grid) {
        const bool need_phi = stat != SurfaceStat::density_f;
        projected.push_back(project(sample, psi.w_map, need_phi ? &psi.phi : nullptr));
        if (projected.back().d != grid.dim)
            fail(Errc::invalid_input, "estimate_surface: psi output dimension != grid dimension");
    }

    const std::size_t cells = h_values.size() * psi_grid.size() * grid.size();
    out.values.assign(cells, 0.0);
    out.defined.assign(cells, 1);

    const std::size_t nw = grid.size();
    const std::size_t npsi = psi_grid.size();
    parallel_for(cells, workers, [&](std::size_t cell) {
        const std::size_t hi = cell / (npsi * nw);
        const std::size_t pi = (cell / nw) % npsi;
        const std::size_t wi = cell % nw;
        const ProjectedSample& ps = projected[pi];
        const double h = out.h_values[hi];
        const double s = scale(static_cast<double>(ps.n), h, ps.d);
        const auto w = grid.point(wi);
        switch (stat) {
            case SurfaceStat::numerator_T:
                out.values[cell] =
                    s * weighted_kernel_sum(ps.phivals, ps.wx, ps.n, ps.d, kernel, h, w);
                break;
            case SurfaceStat::density_f:
                out.values[cell] = s * weighted_kernel_sum({}, ps.wx, ps.n, ps.d, kernel, h, w);
                break;
            case SurfaceStat::ratio_m: {
                const double fhat =
                    s * weighted_kernel_sum({}, ps.wx, ps.n, ps.d, kernel, h, w);
                if (!(fhat >= trim_tau)) {
                    out.defined[cell] = 0;
                } else {
                    out.values[cell] =
                        s * weighted_kernel_sum(ps.phivals, ps.wx, ps.n, ps.d, kernel, h, w) /
                        fhat;
                }
                break;
            }
        }
    });
    return out;
}

SupDeviation sup_deviation(
    const EstimateSurface& surface,
    const std::function<double(std::size_t, std::span<const double>)>& truth) {
    SupDeviation best;
    bool any = false;
    for (std::size_t hi = 0; hi < surface.h_values.size(); ++hi) {
        for (std::size_t pi = 0; pi < surface.psi_count; ++pi) {
            for (std::size_t wi = 0; wi < surface.grid.size(); ++wi) {
                const std::size_t cell = surface.index(hi, pi, wi);
                if (!surface.defined[cell]) {
                    ++best.skipped;
                    continue;
                }
                const double tv = truth(pi, surface.grid.point(wi));
                if (!std::isfinite(tv))
                    fail(Errc::invalid_input, "sup_deviation: truth not defined at a grid point");
                const double dev = std::fabs(surface.values[cell] - tv);
                if (!any || dev > best.value) {
                    best.value = dev;
                    best.h_index = hi;
                    best.psi_index = pi;
                    best.w_index = wi;
                    any = true;
                }
            }
        }
    }
    if (!any) fail(Errc::empty_supremum, "sup_deviation: every cell is undefined");
    return best;
}

namespace {

const char* stat_name(SurfaceStat s) {
    switch (s) {
        case SurfaceStat::numerator_T: return "T";
        case SurfaceStat::density_f: return "f";
        case SurfaceStat::ratio_m: return "m";
    }
    return "?";
}

}  // namespace

Json EstimateSurface::to_json() const {
    Json j = Json::object();
    j["kernel"] = kernel_name;
    j["n"] = n;
    j["dim"] = grid.dim;
    j["statistic"] = stat_name(stat);
    j["trim_tau"] = trim_tau;
    j["h_grid"] = Json::array_of(h_values);
    j["psi_count"] = psi_count;
    j["w_grid"] = Json::array_of(grid.points);
    j["w_radius"] = grid.radius;
    j["values"] = Json::array_of(values);
    Json mask = Json::array();
    for (std::uint8_t d : defined) mask.push_back(static_cast<std::int64_t>(d));
    j["defined"] = std::move(mask);
    return j;
}

}  // namespace kernrates
