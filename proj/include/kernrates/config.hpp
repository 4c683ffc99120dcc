#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kernrates/json_writer.hpp"
#include "kernrates/kernel.hpp"
#include "kernrates/verification.hpp"

namespace kernrates {

/// Flat sectioned key = value text. Parsing and validation collect every
/// failure rather than stopping at the first; unknown keys are rejected.
class IniFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };

    static IniFile parse(const std::string& path, std::vector<std::string>& errors);
    static IniFile parse_text(const std::string& text, std::vector<std::string>& errors);

    const Entry* find(const std::string& section, const std::string& key) const;
    void report_unconsumed(std::vector<std::string>& errors) const;

private:
    std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Typed view over an IniFile; getters record consumption and push
/// validation failures into a shared list.
class ConfigReader {
public:
    ConfigReader(const IniFile& file, std::vector<std::string>& errors)
        : file_(file), errors_(errors) {}

    std::optional<std::string> get_string(const std::string& sec, const std::string& key);
    std::string get_string_or(const std::string& sec, const std::string& key,
                              const std::string& def);
    std::optional<double> get_double(const std::string& sec, const std::string& key);
    double get_double_or(const std::string& sec, const std::string& key, double def);
    std::optional<long long> get_int(const std::string& sec, const std::string& key);
    long long get_int_or(const std::string& sec, const std::string& key, long long def);
    std::vector<double> get_doubles(const std::string& sec, const std::string& key);
    std::vector<std::size_t> get_sizes(const std::string& sec, const std::string& key);

    void error(const std::string& sec, const std::string& key, const std::string& message);
    void require(bool ok, const std::string& sec, const std::string& key,
                 const std::string& message);

private:
    const IniFile& file_;
    std::vector<std::string>& errors_;
};

// --------------------------------------------------------------------- jobs

struct SimulateJob {
    ModelSpec model = Ar1Density{};
    std::size_t n = 0;
    std::uint64_t seed = 42;
    std::size_t burnin = 0;
    std::string output;
    Json echo;
};

struct ValidateKernelJob {
    Kernel kernel;
    double tol = 1e-8;
    std::string output;
    Json echo;
};

struct EstimateJob {
    std::string data_path;
    std::size_t q = 1, p = 1;
    Kernel kernel;
    double h_lo = 0.0, h_hi = 0.0;
    int h_count = 1;
    double radius = 2.0;
    std::size_t points = 41;
    PsiIndex psi;
    SurfaceStat stat = SurfaceStat::ratio_m;
    double trim_tau = default_trim_tau;
    std::string output;
    Json echo;
};

struct CesJob {
    std::string data_path;
    std::size_t q = 2, p = 1;
    Kernel kernel;
    double h_lo = 0.0, h_hi = 0.0;
    int h_count = 1;
    double radius = 1.0;
    std::size_t points = 21;
    std::vector<double> a_angles;
    std::vector<double> b_grid;
    std::vector<double> p_levels;
    /// Empty means plug-in VaR thresholds; otherwise fixed constants.
    std::vector<double> c_constants;
    double trim_tau = default_trim_tau;
    std::string output;
    Json echo;
};

struct TheoryJob {
    MixingSpec mixing = GeometricMixing{};
    Kernel norm_kernel;
    double density_bound = 0.4;
    std::vector<double> norm_h_grid;
    double bias_sigma = 1.0;  // Gaussian density target N(0, sigma^2)
    double bias_w = 0.0;
    std::vector<double> bias_h_grid;
    double quad_tol = 1e-12;
    std::string output;
    Json echo;
};

struct RateJob {
    RateConfig config;
    std::string output;
};

/// Loaders return the job and append any validation failures (all of them)
/// to `errors`; the job is usable only when `errors` stays empty.
SimulateJob load_simulate_job(const std::string& path, std::vector<std::string>& errors);
ValidateKernelJob load_validate_kernel_job(const std::string& path,
                                           std::vector<std::string>& errors);
EstimateJob load_estimate_job(const std::string& path, std::vector<std::string>& errors);
CesJob load_ces_job(const std::string& path, std::vector<std::string>& errors);
TheoryJob load_theory_job(const std::string& path, std::vector<std::string>& errors);
RateJob load_rate_job(const std::string& path, std::vector<std::string>& errors);

/// Shared helpers used by the loaders.
ModelSpec read_model(ConfigReader& reader, std::vector<std::string>& errors);
Kernel read_kernel(ConfigReader& reader, const std::string& section,
                   std::vector<std::string>& errors);

}  // namespace kernrates
