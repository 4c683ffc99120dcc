#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kernrates/json_writer.hpp"
#include "kernrates/kernel.hpp"
#include "kernrates/model.hpp"

namespace kernrates {

/// Bandwidths below this would blow up 1/(n h^d) beyond any sane experiment.
inline constexpr double min_bandwidth = 1e-8;

/// Default trimming threshold for ratio estimators, on the (nh^d)-normalized
/// denominator scale.
inline constexpr double default_trim_tau = 1e-3;

/// Geometric grid of bandwidths spanning [a_n, b_n].
struct BandwidthGrid {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> values;  // strictly increasing, endpoints exact
};

BandwidthGrid bandwidth_grid(double a_n, double b_n, int count);

/// Evaluation points w with |w| <= radius, stored row-major (count x dim).
struct EvalGrid {
    std::size_t dim = 1;
    double radius = 0.0;
    std::vector<double> points;

    std::size_t size() const { return dim == 0 ? 0 : points.size() / dim; }
    std::span<const double> point(std::size_t i) const { return {points.data() + i * dim, dim}; }
};

/// Equally spaced scalar grid on [-radius, radius].
EvalGrid line_grid(double radius, std::size_t count);

/// General grid; validates the |w| <= radius invariant and finiteness.
EvalGrid make_eval_grid(std::size_t dim, double radius, std::vector<double> points);

/// T-hat_{psi,h}(w) = (1/(n h^d)) sum_t phi(Z_t) K((w - W(X_t))/h).
double estimate_T(const Sample& sample, const PsiIndex& psi, const Kernel& kernel, double h,
                  std::span<const double> w);

/// Density estimator f-hat_{W,h}(w); equals estimate_T with phi == 1.
double estimate_f(const Sample& sample, const WSpec& w_map, const Kernel& kernel, double h,
                  std::span<const double> w);

/// Ratio estimator m-hat = T-hat / f-hat. Returns nullopt (flagged, not an
/// error) where f-hat < trim_tau, mirroring the tau_n restriction.
std::optional<double> estimate_m(const Sample& sample, const PsiIndex& psi, const Kernel& kernel,
                                 double h, std::span<const double> w, double trim_tau);

enum class SurfaceStat { numerator_T, density_f, ratio_m };

/// Dense estimate table over (h-grid) x (psi-grid) x (w-grid). Cells where a
/// ratio was trimmed carry defined == 0 and value 0.
struct EstimateSurface {
    std::string kernel_name;
    std::size_t n = 0;
    std::size_t dim = 1;
    SurfaceStat stat = SurfaceStat::numerator_T;
    double trim_tau = 0.0;
    std::vector<double> h_values;
    std::size_t psi_count = 1;
    EvalGrid grid;
    std::vector<double> values;
    std::vector<std::uint8_t> defined;

    std::size_t index(std::size_t hi, std::size_t pi, std::size_t wi) const {
        return (hi * psi_count + pi) * grid.size() + wi;
    }
    Json to_json() const;
};

/// Evaluates one statistic over the full grid. Cells are independent pure
/// computations over the shared sample; the result does not depend on the
/// worker count.
EstimateSurface estimate_surface(const Sample& sample, std::span<const PsiIndex> psi_grid,
                                 const Kernel& kernel, std::span<const double> h_values,
                                 const EvalGrid& grid, SurfaceStat stat, double trim_tau,
                                 int workers);

struct SupDeviation {
    double value = 0.0;
    std::size_t h_index = 0;
    std::size_t psi_index = 0;
    std::size_t w_index = 0;
    std::size_t skipped = 0;  // undefined (trimmed) cells, excluded but counted
};

/// max over defined cells of |estimate - truth(psi, w)|, with the attaining
/// coordinates. Throws empty-supremum if every cell is undefined.
SupDeviation sup_deviation(
    const EstimateSurface& surface,
    const std::function<double(std::size_t psi_index, std::span<const double> w)>& truth);

}  // namespace kernrates
