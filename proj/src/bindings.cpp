#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kernrates/estimators.hpp"
#include "kernrates/kernel.hpp"
#include "kernrates/model.hpp"
#include "kernrates/processes.hpp"
#include "kernrates/risk.hpp"
#include "kernrates/verification.hpp"

namespace py = pybind11;
using namespace kernrates;

namespace {

Sample sample_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> y,
                          py::array_t<double, py::array::c_style | py::array::forcecast> x) {
    if (y.ndim() != 2 || x.ndim() != 2)
        throw py::value_error("y and x must be 2-d arrays (n x q, n x p)");
    if (y.shape(0) != x.shape(0)) throw py::value_error("y and x must have equal row counts");
    Sample s(static_cast<std::size_t>(y.shape(0)), static_cast<std::size_t>(y.shape(1)),
             static_cast<std::size_t>(x.shape(1)));
    auto yv = y.unchecked<2>();
    auto xv = x.unchecked<2>();
    for (std::size_t t = 0; t < s.n(); ++t) {
        for (std::size_t j = 0; j < s.q(); ++j) s.set_y(t, j, yv(t, j));
        for (std::size_t j = 0; j < s.p(); ++j) s.set_x(t, j, xv(t, j));
    }
    s.check_finite();
    return s;
}

py::array_t<double> sample_y(const Sample& s) {
    py::array_t<double> out({s.n(), s.q()});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t t = 0; t < s.n(); ++t)
        for (std::size_t j = 0; j < s.q(); ++j) v(t, j) = s.y(t, j);
    return out;
}

py::array_t<double> sample_x(const Sample& s) {
    py::array_t<double> out({s.n(), s.p()});
    auto v = out.mutable_unchecked<2>();
    for (std::size_t t = 0; t < s.n(); ++t)
        for (std::size_t j = 0; j < s.p(); ++j) v(t, j) = s.x(t, j);
    return out;
}

py::dict validation_dict(const KernelValidation& v) {
    py::dict d;
    d["kernel"] = v.kernel_name;
    d["order"] = v.order;
    d["all_passed"] = v.all_passed();
    py::list checks;
    for (const auto& c : v.checks) {
        py::dict cd;
        cd["check"] = c.label;
        cd["value"] = c.value;
        cd["target"] = c.target;
        cd["residual"] = c.residual;
        cd["passed"] = c.passed;
        checks.append(cd);
    }
    d["checks"] = checks;
    return d;
}

py::dict rate_report_dict(const RateReport& r) {
    py::dict d;
    d["model"] = r.model;
    d["target"] = r.target;
    d["kernel"] = r.kernel_name;
    d["n_grid"] = r.n_grid;
    d["sup_errors"] = r.sup_errors;
    d["undefined_by_n"] = r.undefined_by_n;
    d["fitted_slope"] = r.fitted_slope;
    d["theoretical_slope"] = r.theoretical_slope;
    d["slope_ci"] = py::make_tuple(r.slope_ci_lo, r.slope_ci_hi);
    d["replications"] = r.replications;
    d["weighted_average_bound_ok"] = r.weighted_average_bound_ok;
    d["quantile_consistent_all"] = r.quantile_consistent_all;
    d["canonical_json"] = r.to_json().dump();
    return d;
}

}  // namespace

PYBIND11_MODULE(_kernrates, m) {
    m.doc() = "kernel estimators for weakly dependent time series";

    py::register_exception<Error>(m, "KernratesError");

    // ---------------------------------------------------------------- kernels
    py::class_<Kernel>(m, "Kernel")
        .def_readonly("name", &Kernel::name)
        .def_readonly("order", &Kernel::order)
        .def_property_readonly("support",
                               [](const Kernel& k) -> py::object {
                                   if (k.support) return py::float_(*k.support);
                                   return py::none();
                               })
        .def_readonly("bound", &Kernel::bound)
        .def("__call__", [](const Kernel& k, double t) { return kernel_eval(k, t); })
        .def("__repr__", [](const Kernel& k) { return "<Kernel " + k.name + ">"; });

    m.def("make_epanechnikov", &make_epanechnikov);
    m.def("make_gaussian_kernel", &make_gaussian_kernel, py::arg("order"));
    m.def("kernel_eval", &kernel_eval, py::arg("kernel"), py::arg("t"));
    m.def(
        "product_kernel_eval",
        [](const Kernel& k, const std::vector<double>& w) {
            return product_kernel_eval(k, w);
        },
        py::arg("kernel"), py::arg("w"));
    m.def(
        "validate_kernel",
        [](const Kernel& k, double tol) { return validation_dict(validate_kernel(k, tol)); },
        py::arg("kernel"), py::arg("quad_tol") = 1e-8);

    // ----------------------------------------------------------------- sample
    py::class_<Sample>(m, "Sample")
        .def(py::init(&sample_from_arrays), py::arg("y"), py::arg("x"))
        .def_property_readonly("n", &Sample::n)
        .def_property_readonly("q", &Sample::q)
        .def_property_readonly("p", &Sample::p)
        .def_property_readonly("y", &sample_y)
        .def_property_readonly("x", &sample_x);

    m.def("load_sample", &load_sample, py::arg("path"), py::arg("q"), py::arg("p"));
    m.def("save_sample_csv", &save_sample_csv, py::arg("sample"), py::arg("path"));

    // ------------------------------------------------------------ index specs
    py::class_<ConstantThreshold>(m, "ConstantThreshold").def(py::init<double>());
    py::class_<AffineThreshold>(m, "AffineThreshold")
        .def(py::init<std::vector<double>, double>(), py::arg("slope"), py::arg("intercept"));
    py::class_<PluggedVar>(m, "PluggedVar").def(py::init<double>(), py::arg("p_level"));

    py::class_<RawComponent>(m, "RawComponent").def(py::init<std::size_t>());
    py::class_<ConstantPhi>(m, "ConstantPhi").def(py::init<double>());
    py::class_<ShortfallNumerator>(m, "ShortfallNumerator")
        .def(py::init([](std::vector<double> a, ThresholdFn c) {
                 return std::get<ShortfallNumerator>(make_shortfall_numerator(std::move(a), c));
             }),
             py::arg("a"), py::arg("threshold"));
    py::class_<ShortfallIndicator>(m, "ShortfallIndicator")
        .def(py::init([](std::vector<double> a, ThresholdFn c) {
                 return std::get<ShortfallIndicator>(make_shortfall_indicator(std::move(a), c));
             }),
             py::arg("a"), py::arg("threshold"));

    py::class_<IdentityMap>(m, "IdentityMap").def(py::init<std::size_t>(), py::arg("dim"));
    py::class_<SingleIndex>(m, "SingleIndex").def(py::init<std::vector<double>>(), py::arg("b"));
    py::class_<CoordinateSubset>(m, "CoordinateSubset")
        .def(py::init<std::vector<std::size_t>>(), py::arg("indices"));

    py::class_<PsiIndex>(m, "PsiIndex")
        .def(py::init([](PhiSpec phi, WSpec w) { return PsiIndex{std::move(phi), std::move(w)}; }),
             py::arg("phi"), py::arg("w_map"));

    m.def(
        "phi_eval",
        [](const PhiSpec& phi, const std::vector<double>& y, const std::vector<double>& x) {
            return phi_eval(phi, y, x);
        },
        py::arg("phi"), py::arg("y"), py::arg("x"));
    m.def(
        "w_eval",
        [](const WSpec& w, const std::vector<double>& x) { return w_eval(w, x); },
        py::arg("w_map"), py::arg("x"));

    // ------------------------------------------------------------- estimators
    m.def("bandwidth_grid",
          [](double a_n, double b_n, int count) { return bandwidth_grid(a_n, b_n, count).values; },
          py::arg("a_n"), py::arg("b_n"), py::arg("count"));
    m.def(
        "estimate_T",
        [](const Sample& s, const PsiIndex& psi, const Kernel& k, double h,
           const std::vector<double>& w) { return estimate_T(s, psi, k, h, w); },
        py::arg("sample"), py::arg("psi"), py::arg("kernel"), py::arg("h"), py::arg("w"));
    m.def(
        "estimate_f",
        [](const Sample& s, const WSpec& wm, const Kernel& k, double h,
           const std::vector<double>& w) { return estimate_f(s, wm, k, h, w); },
        py::arg("sample"), py::arg("w_map"), py::arg("kernel"), py::arg("h"), py::arg("w"));
    m.def(
        "estimate_m",
        [](const Sample& s, const PsiIndex& psi, const Kernel& k, double h,
           const std::vector<double>& w, double trim) -> py::object {
            const auto v = estimate_m(s, psi, k, h, w, trim);
            if (!v) return py::none();
            return py::float_(*v);
        },
        py::arg("sample"), py::arg("psi"), py::arg("kernel"), py::arg("h"), py::arg("w"),
        py::arg("trim_tau") = default_trim_tau);

    // ------------------------------------------------------------------- risk
    m.def(
        "estimate_conditional_var",
        [](const Sample& s, const std::vector<double>& a, const std::vector<double>& b, double p,
           const Kernel& k, double h, double w) {
            return estimate_conditional_var(s, a, b, p, k, h, w);
        },
        py::arg("sample"), py::arg("a"), py::arg("b"), py::arg("p_level"), py::arg("kernel"),
        py::arg("h"), py::arg("w"));
    m.def(
        "estimate_ces",
        [](const Sample& s, const std::vector<double>& a, const std::vector<double>& b,
           const ThresholdFn& threshold, const Kernel& k, double h, double w,
           double trim) -> py::object {
            CesIndex index{a, b, threshold};
            const auto v = estimate_ces(s, index, k, h, w, trim);
            if (!v) return py::none();
            return py::float_(*v);
        },
        py::arg("sample"), py::arg("a"), py::arg("b"), py::arg("threshold"), py::arg("kernel"),
        py::arg("h"), py::arg("w"), py::arg("trim_tau") = default_trim_tau);
    m.def(
        "ces_truth_gaussian",
        [](const std::function<double(double)>& mu_fn, double sigma, double p, double w) {
            const GaussianTailTruth t = ces_truth_gaussian(mu_fn, sigma, p, w);
            return py::make_tuple(t.var, t.ces);
        },
        py::arg("mu_fn"), py::arg("sigma"), py::arg("p_level"), py::arg("w"));

    // -------------------------------------------------------------- processes
    py::class_<IidMixing>(m, "IidMixing").def(py::init<double>(), py::arg("delta") = 3.0);
    py::class_<GeometricMixing>(m, "GeometricMixing")
        .def(py::init<double, double>(), py::arg("rho"), py::arg("delta") = 3.0);
    py::class_<PolynomialMixing>(m, "PolynomialMixing")
        .def(py::init<double, double, double>(), py::arg("exponent"), py::arg("scale") = 1.0,
             py::arg("delta") = 3.0);
    m.def(
        "mixing_beta",
        [](const MixingSpec& spec, std::size_t j) { return mixing_beta(spec, j); },
        py::arg("spec"), py::arg("j"));

    py::class_<Ar1Density>(m, "Ar1Density")
        .def(py::init<double, double>(), py::arg("rho"), py::arg("sigma"));
    py::class_<RegressionOnAr1>(m, "RegressionOnAr1")
        .def(py::init([](double rho, double sigma_x, const std::string& m_fn, double sigma_u) {
                 return RegressionOnAr1{rho, sigma_x, mean_fn_from_name(m_fn), sigma_u};
             }),
             py::arg("rho"), py::arg("sigma_x"), py::arg("m_fn"), py::arg("sigma_u"));
    py::class_<GaussianCes>(m, "GaussianCes")
        .def(py::init([](double rho, double sigma_x, const std::string& mu_fn, double sigma_l) {
                 return GaussianCes{rho, sigma_x, mean_fn_from_name(mu_fn), sigma_l};
             }),
             py::arg("rho"), py::arg("sigma_x"), py::arg("mu_fn"), py::arg("sigma_l"));

    m.def(
        "simulate",
        [](const ModelSpec& model, std::size_t n, std::uint64_t seed, std::size_t burnin) {
            return simulate(model, n, seed, burnin);
        },
        py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("burnin") = 0);
    m.def(
        "true_density",
        [](const ModelSpec& model, double w) { return true_density(model, w); },
        py::arg("model"), py::arg("w"));
    m.def(
        "true_index_density",
        [](const ModelSpec& model, double b, double w) { return true_index_density(model, b, w); },
        py::arg("model"), py::arg("b"), py::arg("w"));
    m.def(
        "true_regression",
        [](const ModelSpec& model, double w) { return true_regression(model, w); },
        py::arg("model"), py::arg("w"));

    // ------------------------------------------------------------ verification
    m.def(
        "beta_inverse",
        [](const MixingSpec& spec, double u) { return beta_inverse(spec, u); },
        py::arg("spec"), py::arg("u"));
    m.def(
        "beta_norm_sq",
        [](const MixingSpec& spec, const std::function<double(double)>& q) {
            const BetaNormResult r = beta_norm_sq(spec, q);
            py::dict d;
            d["value"] = r.value;
            d["error_estimate"] = r.error_estimate;
            d["diverged"] = r.diverged;
            d["levels_used"] = r.levels_used;
            return d;
        },
        py::arg("spec"), py::arg("quantile_fn"));
    m.def(
        "smoothing_bias",
        [](const std::function<double(double)>& target, const Kernel& k, double h, double w,
           double tol) { return smoothing_bias(target, k, h, w, tol); },
        py::arg("target"), py::arg("kernel"), py::arg("h"), py::arg("w"),
        py::arg("quad_tol") = 1e-12);
    m.def(
        "kernel_class_norm_check",
        [](const MixingSpec& spec, const Kernel& k, double density_bound,
           const std::vector<double>& h_grid) {
            const NormCheckReport r = kernel_class_norm_check(spec, k, density_bound, h_grid);
            py::dict d;
            d["h_grid"] = r.h_grid;
            d["norm_sq"] = r.norm_sq;
            d["ratio"] = r.ratio;
            d["bound_constant"] = r.bound_constant;
            d["max_over_min_ratio"] = r.max_over_min_ratio;
            d["ratio_monotone_increasing"] = r.ratio_monotone_increasing;
            d["canonical_json"] = r.to_json().dump();
            return d;
        },
        py::arg("spec"), py::arg("kernel"), py::arg("density_bound"), py::arg("h_grid"));
    m.def("theoretical_rate_slope", &theoretical_rate_slope, py::arg("order_r"), py::arg("dim"));

    py::class_<RateConfig>(m, "RateConfig")
        .def(py::init<>())
        .def_readwrite("model", &RateConfig::model)
        .def_readwrite("kernel", &RateConfig::kernel)
        .def_readwrite("n_grid", &RateConfig::n_grid)
        .def_readwrite("replications", &RateConfig::replications)
        .def_readwrite("bandwidth_exponent", &RateConfig::bandwidth_exponent)
        .def_readwrite("bandwidth_c_lo", &RateConfig::bandwidth_c_lo)
        .def_readwrite("bandwidth_c_hi", &RateConfig::bandwidth_c_hi)
        .def_readwrite("bandwidth_count", &RateConfig::bandwidth_count)
        .def_readwrite("eval_radius", &RateConfig::eval_radius)
        .def_readwrite("eval_points", &RateConfig::eval_points)
        .def_readwrite("trim_tau", &RateConfig::trim_tau)
        .def_readwrite("seed", &RateConfig::seed)
        .def_readwrite("workers", &RateConfig::workers)
        .def_property(
            "target",
            [](const RateConfig& c) {
                switch (c.target) {
                    case RateTarget::density: return "density";
                    case RateTarget::regression: return "regression";
                    case RateTarget::ces: return "ces";
                }
                return "density";
            },
            [](RateConfig& c, const std::string& t) {
                if (t == "density")
                    c.target = RateTarget::density;
                else if (t == "regression")
                    c.target = RateTarget::regression;
                else if (t == "ces")
                    c.target = RateTarget::ces;
                else
                    throw py::value_error("target must be density, regression or ces");
            })
        .def_readwrite("ces", &RateConfig::ces);
    py::class_<CesGrids>(m, "CesGrids")
        .def(py::init<>())
        .def_readwrite("a_angles", &CesGrids::a_angles)
        .def_readwrite("b_values", &CesGrids::b_values)
        .def_readwrite("p_levels", &CesGrids::p_levels);
    m.def(
        "rate_experiment",
        [](const RateConfig& cfg) { return rate_report_dict(rate_experiment(cfg)); },
        py::arg("config"));
}
