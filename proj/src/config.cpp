#include "kernrates/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kernrates/numerics.hpp"

namespace kernrates {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
        if (pos != s.size()) return std::nullopt;
        return v;
    } catch (...) {
        return std::nullopt;
    }
}

std::optional<long long> parse_int(const std::string& s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

}  // namespace

IniFile IniFile::parse_text(const std::string& text, std::vector<std::string>& errors) {
    IniFile file;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                errors.push_back("line " + std::to_string(line_no) + ": unterminated section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                errors.push_back("line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": empty key");
            continue;
        }
        if (section.empty()) {
            errors.push_back("line " + std::to_string(line_no) + ": key outside any section");
            continue;
        }
        auto [it, inserted] = file.sections_[section].emplace(key, Entry{value, line_no, false});
        if (!inserted)
            errors.push_back("line " + std::to_string(line_no) + ": duplicate key [" + section +
                             "] " + key);
    }
    return file;
}

IniFile IniFile::parse(const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path);
    if (!in) {
        errors.push_back("cannot open config file: " + path);
        return {};
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_text(buf.str(), errors);
}

const IniFile::Entry* IniFile::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.consumed = true;
    return &k->second;
}

void IniFile::report_unconsumed(std::vector<std::string>& errors) const {
    for (const auto& [sec, entries] : sections_)
        for (const auto& [key, entry] : entries)
            if (!entry.consumed)
                errors.push_back("[" + sec + "] " + key + ": unknown key (line " +
                                 std::to_string(entry.line) + ")");
}

void ConfigReader::error(const std::string& sec, const std::string& key,
                         const std::string& message) {
    errors_.push_back("[" + sec + "] " + key + ": " + message);
}

void ConfigReader::require(bool ok, const std::string& sec, const std::string& key,
                           const std::string& message) {
    if (!ok) error(sec, key, message);
}

std::optional<std::string> ConfigReader::get_string(const std::string& sec,
                                                    const std::string& key) {
    const IniFile::Entry* e = file_.find(sec, key);
    if (!e) return std::nullopt;
    return e->value;
}

std::string ConfigReader::get_string_or(const std::string& sec, const std::string& key,
                                        const std::string& def) {
    auto v = get_string(sec, key);
    return v ? *v : def;
}

std::optional<double> ConfigReader::get_double(const std::string& sec, const std::string& key) {
    const IniFile::Entry* e = file_.find(sec, key);
    if (!e) return std::nullopt;
    auto v = parse_double(e->value);
    if (!v || !std::isfinite(*v)) {
        error(sec, key, "expected a finite number, got '" + e->value + "'");
        return std::nullopt;
    }
    return v;
}

double ConfigReader::get_double_or(const std::string& sec, const std::string& key, double def) {
    auto v = get_double(sec, key);
    return v ? *v : def;
}

std::optional<long long> ConfigReader::get_int(const std::string& sec, const std::string& key) {
    const IniFile::Entry* e = file_.find(sec, key);
    if (!e) return std::nullopt;
    auto v = parse_int(e->value);
    if (!v) {
        error(sec, key, "expected an integer, got '" + e->value + "'");
        return std::nullopt;
    }
    return v;
}

long long ConfigReader::get_int_or(const std::string& sec, const std::string& key,
                                   long long def) {
    auto v = get_int(sec, key);
    return v ? *v : def;
}

std::vector<double> ConfigReader::get_doubles(const std::string& sec, const std::string& key) {
    const IniFile::Entry* e = file_.find(sec, key);
    std::vector<double> out;
    if (!e) return out;
    for (const std::string& tok : split_ws(e->value)) {
        auto v = parse_double(tok);
        if (!v || !std::isfinite(*v)) {
            error(sec, key, "expected numbers, got '" + tok + "'");
            return {};
        }
        out.push_back(*v);
    }
    return out;
}

std::vector<std::size_t> ConfigReader::get_sizes(const std::string& sec, const std::string& key) {
    const IniFile::Entry* e = file_.find(sec, key);
    std::vector<std::size_t> out;
    if (!e) return out;
    for (const std::string& tok : split_ws(e->value)) {
        auto v = parse_int(tok);
        if (!v || *v < 0) {
            error(sec, key, "expected nonnegative integers, got '" + tok + "'");
            return {};
        }
        out.push_back(static_cast<std::size_t>(*v));
    }
    return out;
}

// --------------------------------------------------------------- shared parts

ModelSpec read_model(ConfigReader& reader, std::vector<std::string>& errors) {
    const std::string kind = reader.get_string_or("model", "kind", "ar1-density");
    const double rho = reader.get_double_or("model", "rho", 0.5);
    if (!(std::fabs(rho) < 1.0)) reader.error("model", "rho", "nonstationary: |rho| must be < 1");

    if (kind == "ar1-density") {
        const double sigma = reader.get_double_or("model", "sigma", 1.0);
        if (!(sigma > 0.0)) reader.error("model", "sigma", "must be positive");
        return Ar1Density{rho, sigma};
    }
    const double sigma_x = reader.get_double_or("model", "sigma_x", 1.0);
    if (!(sigma_x > 0.0)) reader.error("model", "sigma_x", "must be positive");
    if (kind == "regression-on-ar1") {
        RegressionOnAr1 m;
        m.rho = rho;
        m.sigma_x = sigma_x;
        const std::string fn = reader.get_string_or("model", "m_fn", "sin");
        try {
            m.m = mean_fn_from_name(fn);
        } catch (const Error&) {
            reader.error("model", "m_fn", "unknown mean function '" + fn + "'");
        }
        m.sigma_u = reader.get_double_or("model", "sigma_u", 0.5);
        if (!(m.sigma_u > 0.0)) reader.error("model", "sigma_u", "must be positive");
        return m;
    }
    if (kind == "gaussian-ces") {
        GaussianCes g;
        g.rho = rho;
        g.sigma_x = sigma_x;
        const std::string fn = reader.get_string_or("model", "mu_fn", "sin");
        try {
            g.mu = mean_fn_from_name(fn);
        } catch (const Error&) {
            reader.error("model", "mu_fn", "unknown mean function '" + fn + "'");
        }
        g.sigma_l = reader.get_double_or("model", "sigma_l", 1.0);
        if (!(g.sigma_l > 0.0)) reader.error("model", "sigma_l", "must be positive");
        return g;
    }
    errors.push_back("[model] kind: unknown model '" + kind + "'");
    return Ar1Density{};
}

Kernel read_kernel(ConfigReader& reader, const std::string& section,
                   std::vector<std::string>& errors) {
    const std::string family = reader.get_string_or(section, "family", "epanechnikov");
    const long long order = reader.get_int_or(section, "order", 2);
    if (family == "epanechnikov") {
        if (order != 2)
            errors.push_back("[" + section + "] order: epanechnikov kernel has order 2");
        return make_epanechnikov();
    }
    if (family == "gaussian") {
        if (order != 2 && order != 4 && order != 6) {
            errors.push_back("[" + section + "] order: unsupported-order " +
                             std::to_string(order) + " (only 2, 4, 6 are shipped)");
            return make_gaussian_kernel(2);
        }
        return make_gaussian_kernel(static_cast<int>(order));
    }
    errors.push_back("[" + section + "] family: unknown kernel family '" + family + "'");
    return make_epanechnikov();
}

namespace {

Json kernel_echo(const Kernel& k) {
    Json j = Json::object();
    j["name"] = k.name;
    j["order"] = k.order;
    return j;
}

Json model_echo_json(const ModelSpec& model) {
    Json j = Json::object();
    j["kind"] = model_name(model);
    j["rho"] = model_rho(model);
    if (std::holds_alternative<Ar1Density>(model)) {
        j["sigma"] = model_sigma_x(model);
    } else {
        j["sigma_x"] = model_sigma_x(model);
    }
    if (const auto* r = std::get_if<RegressionOnAr1>(&model)) {
        j["m_fn"] = mean_fn_name(r->m);
        j["sigma_u"] = r->sigma_u;
    } else if (const auto* g = std::get_if<GaussianCes>(&model)) {
        j["mu_fn"] = mean_fn_name(g->mu);
        j["sigma_l"] = g->sigma_l;
    }
    return j;
}

std::string require_output(ConfigReader& reader, const std::string& def) {
    return reader.get_string_or("output", "path", def);
}

}  // namespace

SimulateJob load_simulate_job(const std::string& path, std::vector<std::string>& errors) {
    IniFile file = IniFile::parse(path, errors);
    ConfigReader reader(file, errors);
    SimulateJob job;
    job.model = read_model(reader, errors);
    const long long n = reader.get_int_or("simulate", "n", 0);
    if (n < 1) reader.error("simulate", "n", "must be >= 1");
    job.n = n < 1 ? 1 : static_cast<std::size_t>(n);
    job.seed = static_cast<std::uint64_t>(reader.get_int_or("simulate", "seed", 42));
    const long long burnin = reader.get_int_or("simulate", "burnin", 0);
    if (burnin < 0) reader.error("simulate", "burnin", "must be >= 0");
    job.burnin = burnin < 0 ? 0 : static_cast<std::size_t>(burnin);
    job.output = require_output(reader, "sample.csv");
    file.report_unconsumed(errors);

    job.echo = Json::object();
    job.echo["model"] = model_echo_json(job.model);
    job.echo["n"] = static_cast<long long>(job.n);
    job.echo["seed"] = static_cast<long long>(job.seed);
    job.echo["burnin"] = static_cast<long long>(job.burnin);
    return job;
}

ValidateKernelJob load_validate_kernel_job(const std::string& path,
                                           std::vector<std::string>& errors) {
    IniFile file = IniFile::parse(path, errors);
    ConfigReader reader(file, errors);
    ValidateKernelJob job;
    job.kernel = read_kernel(reader, "kernel", errors);
    job.tol = reader.get_double_or("validate", "tol", 1e-8);
    if (!(job.tol > 0.0)) reader.error("validate", "tol", "must be positive");
    job.output = require_output(reader, "kernel_validation.json");
    file.report_unconsumed(errors);
    job.echo = Json::object();
    job.echo["kernel"] = kernel_echo(job.kernel);
    job.echo["tol"] = job.tol;
    return job;
}

namespace {

void read_bandwidth_interval(ConfigReader& reader, double& lo, double& hi, int& count) {
    lo = reader.get_double_or("bandwidth", "h_lo", 0.1);
    hi = reader.get_double_or("bandwidth", "h_hi", lo);
    count = static_cast<int>(reader.get_int_or("bandwidth", "count", 1));
    if (!(lo > 0.0)) reader.error("bandwidth", "h_lo", "must be positive");
    if (!(hi >= lo)) reader.error("bandwidth", "h_hi", "must be >= h_lo");
    if (count < 1) reader.error("bandwidth", "count", "must be >= 1");
    if (count == 1 && hi != lo)
        reader.error("bandwidth", "count", "count = 1 requires h_lo == h_hi");
}

PsiIndex read_psi(ConfigReader& reader, std::size_t q, std::size_t p,
                  std::vector<std::string>& errors) {
    PsiIndex psi{ConstantPhi{1.0}, IdentityMap{p}};
    const std::string phi = reader.get_string_or("index", "phi", "constant");
    if (phi == "constant") {
        psi.phi = ConstantPhi{reader.get_double_or("index", "value", 1.0)};
    } else if (phi == "raw") {
        const long long c = reader.get_int_or("index", "component", 0);
        if (c < 0 || static_cast<std::size_t>(c) >= q)
            reader.error("index", "component", "must lie in [0, q)");
        else
            psi.phi = RawComponent{static_cast<std::size_t>(c)};
    } else if (phi == "shortfall-numerator" || phi == "shortfall-indicator") {
        std::vector<double> a = reader.get_doubles("index", "a");
        if (a.size() != q) {
            reader.error("index", "a", "needs q components");
        } else {
            const double c = reader.get_double_or("index", "threshold", 0.0);
            try {
                psi.phi = phi == "shortfall-numerator"
                              ? make_shortfall_numerator(a, ConstantThreshold{c})
                              : make_shortfall_indicator(a, ConstantThreshold{c});
            } catch (const Error& e) {
                reader.error("index", "a", e.what());
            }
        }
    } else {
        errors.push_back("[index] phi: unknown variant '" + phi + "'");
    }

    const std::string w = reader.get_string_or("index", "w", "identity");
    if (w == "identity") {
        psi.w_map = IdentityMap{p};
    } else if (w == "single-index") {
        std::vector<double> b = reader.get_doubles("index", "b");
        if (b.size() != p)
            reader.error("index", "b", "needs p components");
        else
            psi.w_map = SingleIndex{std::move(b)};
    } else if (w == "coordinates") {
        std::vector<std::size_t> coords = reader.get_sizes("index", "coords");
        if (coords.empty())
            reader.error("index", "coords", "needs at least one coordinate");
        else {
            for (std::size_t c : coords)
                if (c >= p) reader.error("index", "coords", "index out of range");
            psi.w_map = CoordinateSubset{std::move(coords)};
        }
    } else {
        errors.push_back("[index] w: unknown variant '" + w + "'");
    }
    return psi;
}

}  // namespace

EstimateJob load_estimate_job(const std::string& path, std::vector<std::string>& errors) {
    IniFile file = IniFile::parse(path, errors);
    ConfigReader reader(file, errors);
    EstimateJob job;
    job.data_path = reader.get_string_or("data", "path", "");
    if (job.data_path.empty()) reader.error("data", "path", "required");
    const long long q = reader.get_int_or("data", "q", 1);
    const long long p = reader.get_int_or("data", "p", 1);
    if (q < 1) reader.error("data", "q", "must be >= 1");
    if (p < 1) reader.error("data", "p", "must be >= 1");
    job.q = q < 1 ? 1 : static_cast<std::size_t>(q);
    job.p = p < 1 ? 1 : static_cast<std::size_t>(p);
    job.kernel = read_kernel(reader, "kernel", errors);
    read_bandwidth_interval(reader, job.h_lo, job.h_hi, job.h_count);
    job.radius = reader.get_double_or("eval", "radius", 2.0);
    const long long pts = reader.get_int_or("eval", "points", 41);
    if (pts < 1) reader.error("eval", "points", "must be >= 1");
    job.points = pts < 1 ? 1 : static_cast<std::size_t>(pts);
    if (!(job.radius > 0.0)) reader.error("eval", "radius", "must be positive");
    job.psi = read_psi(reader, job.q, job.p, errors);
    const std::string stat = reader.get_string_or("index", "statistic", "m");
    if (stat == "T")
        job.stat = SurfaceStat::numerator_T;
    else if (stat == "f")
        job.stat = SurfaceStat::density_f;
    else if (stat == "m")
        job.stat = SurfaceStat::ratio_m;
    else
        errors.push_back("[index] statistic: expected T, f or m");
    job.trim_tau = reader.get_double_or("index", "trim_tau", default_trim_tau);
    if (!(job.trim_tau > 0.0)) reader.error("index", "trim_tau", "must be positive");
    job.output = require_output(reader, "estimate.json");
    file.report_unconsumed(errors);

    job.echo = Json::object();
    job.echo["data"] = job.data_path;
    job.echo["q"] = static_cast<long long>(job.q);
    job.echo["p"] = static_cast<long long>(job.p);
    job.echo["kernel"] = kernel_echo(job.kernel);
    Json bw = Json::object();
    bw["h_lo"] = job.h_lo;
    bw["h_hi"] = job.h_hi;
    bw["count"] = job.h_count;
    job.echo["bandwidth"] = std::move(bw);
    Json ev = Json::object();
    ev["radius"] = job.radius;
    ev["points"] = static_cast<long long>(job.points);
    job.echo["eval"] = std::move(ev);
    job.echo["statistic"] = stat;
    job.echo["trim_tau"] = job.trim_tau;
    return job;
}

CesJob load_ces_job(const std::string& path, std::vector<std::string>& errors) {
    IniFile file = IniFile::parse(path, errors);
    ConfigReader reader(file, errors);
    CesJob job;
    job.data_path = reader.get_string_or("data", "path", "");
    if (job.data_path.empty()) reader.error("data", "path", "required");
    const long long q = reader.get_int_or("data", "q", 2);
    const long long p = reader.get_int_or("data", "p", 1);
    if (q != 2) reader.error("data", "q", "the ces subcommand ships the q = 2 angle grid");
    if (p != 1) reader.error("data", "p", "the ces subcommand uses scalar single indices (p = 1)");
    job.kernel = read_kernel(reader, "kernel", errors);
    if (job.kernel.order != 2)
        errors.push_back("[kernel] order: ces plug-in quantiles need a nonnegative order-2 kernel");
    read_bandwidth_interval(reader, job.h_lo, job.h_hi, job.h_count);
    job.radius = reader.get_double_or("eval", "radius", 1.0);
    if (!(job.radius > 0.0)) reader.error("eval", "radius", "must be positive");
    const long long pts = reader.get_int_or("eval", "points", 21);
    if (pts < 1) reader.error("eval", "points", "must be >= 1");
    job.points = pts < 1 ? 1 : static_cast<std::size_t>(pts);
    job.a_angles = reader.get_doubles("ces", "a_angles");
    if (job.a_angles.empty()) reader.error("ces", "a_angles", "required (radians, q = 2)");
    job.b_grid = reader.get_doubles("ces", "b_grid");
    if (job.b_grid.empty()) reader.error("ces", "b_grid", "required");
    for (double b : job.b_grid)
        if (b == 0.0) reader.error("ces", "b_grid", "b = 0 is degenerate");
    job.p_levels = reader.get_doubles("ces", "p_levels");
    if (job.p_levels.empty()) reader.error("ces", "p_levels", "required");
    for (double pl : job.p_levels)
        if (!(pl > 0.0 && pl < 1.0)) reader.error("ces", "p_levels", "levels must lie in (0,1)");
    job.c_constants = reader.get_doubles("ces", "c_constants");
    job.trim_tau = reader.get_double_or("ces", "trim_tau", default_trim_tau);
    if (!(job.trim_tau > 0.0)) reader.error("ces", "trim_tau", "must be positive");
    job.output = require_output(reader, "ces.json");
    file.report_unconsumed(errors);

    job.echo = Json::object();
    job.echo["data"] = job.data_path;
    job.echo["kernel"] = kernel_echo(job.kernel);
    Json bw = Json::object();
    bw["h_lo"] = job.h_lo;
    bw["h_hi"] = job.h_hi;
    bw["count"] = job.h_count;
    job.echo["bandwidth"] = std::move(bw);
    Json ev = Json::object();
    ev["radius"] = job.radius;
    ev["points"] = static_cast<long long>(job.points);
    job.echo["eval"] = std::move(ev);
    job.echo["a_angles"] = Json::array_of(job.a_angles);
    job.echo["b_grid"] = Json::array_of(job.b_grid);
    job.echo["p_levels"] = Json::array_of(job.p_levels);
    job.echo["thresholds"] =
        job.c_constants.empty() ? Json("plugged-var") : Json::array_of(job.c_constants);
    job.echo["trim_tau"] = job.trim_tau;
    return job;
}

TheoryJob load_theory_job(const std::string& path, std::vector<std::string>& errors) {
    IniFile file = IniFile::parse(path, errors);
    ConfigReader reader(file, errors);
    TheoryJob job;
    const std::string mixing = reader.get_string_or("mixing", "kind", "geometric");
    const double delta = reader.get_double_or("mixing", "delta", 3.0);
    if (mixing == "iid") {
        job.mixing = IidMixing{delta};
    } else if (mixing == "geometric") {
        job.mixing = GeometricMixing{reader.get_double_or("mixing", "rho", 0.5), delta};
    } else if (mixing == "polynomial") {
        job.mixing = PolynomialMixing{reader.get_double_or("mixing", "exponent", 4.0),
                                      reader.get_double_or("mixing", "scale", 1.0), delta};
    } else {
        errors.push_back("[mixing] kind: unknown mixing spec '" + mixing + "'");
    }
    try {
        validate_mixing(job.mixing);
    } catch (const Error& e) {
        errors.push_back(std::string("[mixing] ") + e.what());
    }
    job.norm_kernel = read_kernel(reader, "kernel", errors);
    job.density_bound = reader.get_double_or("norm", "density_bound", 0.4);
    if (!(job.density_bound > 0.0)) reader.error("norm", "density_bound", "must be positive");
    job.norm_h_grid = reader.get_doubles("norm", "h_grid");
    if (job.norm_h_grid.empty()) job.norm_h_grid = {0.4, 0.2, 0.1, 0.05, 0.02};
    for (double h : job.norm_h_grid)
        if (!(h > 0.0)) reader.error("norm", "h_grid", "bandwidths must be positive");
    job.bias_sigma = reader.get_double_or("bias", "sigma", 1.0);
    if (!(job.bias_sigma > 0.0)) reader.error("bias", "sigma", "must be positive");
    job.bias_w = reader.get_double_or("bias", "w", 0.0);
    job.bias_h_grid = reader.get_doubles("bias", "h_grid");
    if (job.bias_h_grid.empty()) job.bias_h_grid = {0.4, 0.2, 0.1, 0.05};
    for (double h : job.bias_h_grid)
        if (!(h > 0.0)) reader.error("bias", "h_grid", "bandwidths must be positive");
    job.quad_tol = reader.get_double_or("bias", "quad_tol", 1e-12);
    if (!(job.quad_tol > 0.0)) reader.error("bias", "quad_tol", "must be positive");
    job.output = require_output(reader, "theory.json");
    file.report_unconsumed(errors);

    job.echo = Json::object();
    Json mj = Json::object();
    mj["kind"] = mixing_name(job.mixing);
    mj["delta"] = delta;
    if (const auto* g = std::get_if<GeometricMixing>(&job.mixing)) mj["rho"] = g->rho;
    if (const auto* pm = std::get_if<PolynomialMixing>(&job.mixing)) {
        mj["exponent"] = pm->exponent;
        mj["scale"] = pm->scale;
    }
    job.echo["mixing"] = std::move(mj);
    job.echo["kernel"] = kernel_echo(job.norm_kernel);
    Json nj = Json::object();
    nj["density_bound"] = job.density_bound;
    nj["h_grid"] = Json::array_of(job.norm_h_grid);
    job.echo["norm"] = std::move(nj);
    Json bj = Json::object();
    bj["sigma"] = job.bias_sigma;
    bj["w"] = job.bias_w;
    bj["h_grid"] = Json::array_of(job.bias_h_grid);
    bj["quad_tol"] = job.quad_tol;
    job.echo["bias"] = std::move(bj);
    return job;
}

RateJob load_rate_job(const std::string& path, std::vector<std::string>& errors) {
    IniFile file = IniFile::parse(path, errors);
    ConfigReader reader(file, errors);
    RateJob job;
    RateConfig& cfg = job.config;
    cfg.model = read_model(reader, errors);

    const std::string target = reader.get_string_or("experiment", "target", "density");
    if (target == "density")
        cfg.target = RateTarget::density;
    else if (target == "regression")
        cfg.target = RateTarget::regression;
    else if (target == "ces")
        cfg.target = RateTarget::ces;
    else
        errors.push_back("[experiment] target: expected density, regression or ces");

    cfg.n_grid = reader.get_sizes("experiment", "n_grid");
    if (cfg.n_grid.empty()) reader.error("experiment", "n_grid", "required");
    cfg.replications = static_cast<int>(reader.get_int_or("experiment", "replications", 20));
    cfg.seed = static_cast<std::uint64_t>(reader.get_int_or("experiment", "seed", 42));
    cfg.trim_tau = reader.get_double_or("experiment", "trim_tau", default_trim_tau);

    cfg.kernel = read_kernel(reader, "kernel", errors);
    cfg.bandwidth_exponent = reader.get_double_or("bandwidth", "exponent", 0.2);
    cfg.bandwidth_c_lo = reader.get_double_or("bandwidth", "c_lo", 0.5);
    cfg.bandwidth_c_hi = reader.get_double_or("bandwidth", "c_hi", 2.0);
    cfg.bandwidth_count = static_cast<int>(reader.get_int_or("bandwidth", "count", 7));
    cfg.eval_radius = reader.get_double_or("eval", "radius", 2.0);
    const long long pts = reader.get_int_or("eval", "points", 41);
    cfg.eval_points = pts < 1 ? 1 : static_cast<std::size_t>(pts);
    if (cfg.target == RateTarget::ces) {
        cfg.ces.a_angles = reader.get_doubles("ces", "a_angles");
        cfg.ces.b_values = reader.get_doubles("ces", "b_grid");
        cfg.ces.p_levels = reader.get_doubles("ces", "p_levels");
    }
    job.output = require_output(reader, "rate_report.json");
    file.report_unconsumed(errors);

    if (errors.empty()) {
        try {
            validate_rate_config(cfg);
        } catch (const Error& e) {
            errors.push_back(e.what());
        }
    }
    return job;
}

}  // namespace kernrates
