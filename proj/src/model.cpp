#include "kernrates/model.hpp"

#include <cmath>
#include <charconv>
#include <fstream>

#include "kernrates/numerics.hpp"

namespace kernrates {

Sample::Sample(std::size_t n, std::size_t q, std::size_t p)
    : n_(n), q_(q), p_(p), y_(n * q, 0.0), x_(n * p, 0.0) {
    if (n == 0 || q == 0 || p == 0)
        fail(Errc::invalid_input, "Sample dimensions must be positive");
}

void Sample::check_finite() const {
    for (std::size_t t = 0; t < n_; ++t) {
        for (std::size_t j = 0; j < q_; ++j)
            if (!std::isfinite(y(t, j)))
                fail(Errc::invalid_input, "non-finite y entry at row " + std::to_string(t + 1));
        for (std::size_t j = 0; j < p_; ++j)
            if (!std::isfinite(x(t, j)))
                fail(Errc::invalid_input, "non-finite x entry at row " + std::to_string(t + 1));
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_field(const std::string& field, std::size_t row, std::size_t col) {
    const char* b = field.data();
    const char* e = b + field.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e)
        fail(Errc::parse_error, "row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                                    ": cannot parse '" + field + "' as a number");
    if (!std::isfinite(v))
        fail(Errc::parse_error,
             "row " + std::to_string(row) + ", column " + std::to_string(col + 1) +
                 ": non-finite value");
    return v;
}

}  // namespace

Sample load_sample(const std::string& path, std::size_t q, std::size_t p) {
    std::ifstream in(path);
    if (!in) fail(Errc::parse_error, "cannot open sample file: " + path);
    std::string line;
    if (!std::getline(in, line)) fail(Errc::parse_error, path + ": empty file (missing header)");
    const std::size_t cols = q + p;
    if (split_csv_line(line).size() != cols)
        fail(Errc::parse_error, path + ": header has " +
                                    std::to_string(split_csv_line(line).size()) +
                                    " columns, expected " + std::to_string(cols));

    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != cols)
            fail(Errc::parse_error, path + ": row " + std::to_string(row_no) + " has " +
                                        std::to_string(fields.size()) + " columns, expected " +
                                        std::to_string(cols));
        std::vector<double> vals(cols);
        for (std::size_t c = 0; c < cols; ++c) vals[c] = parse_field(fields[c], row_no, c);
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) fail(Errc::parse_error, path + ": no data rows");

    Sample s(rows.size(), q, p);
    for (std::size_t t = 0; t < rows.size(); ++t) {
        for (std::size_t j = 0; j < q; ++j) s.set_y(t, j, rows[t][j]);
        for (std::size_t j = 0; j < p; ++j) s.set_x(t, j, rows[t][q + j]);
    }
    return s;
}

void save_sample_csv(const Sample& sample, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(Errc::parse_error, "cannot open output file: " + path);
    for (std::size_t j = 0; j < sample.q(); ++j) out << (j ? "," : "") << "y" << (j + 1);
    for (std::size_t j = 0; j < sample.p(); ++j) out << ",x" << (j + 1);
    out << "\n";
    for (std::size_t t = 0; t < sample.n(); ++t) {
        for (std::size_t j = 0; j < sample.q(); ++j)
            out << (j ? "," : "") << format_double(sample.y(t, j));
        for (std::size_t j = 0; j < sample.p(); ++j) out << "," << format_double(sample.x(t, j));
        out << "\n";
    }
}

double threshold_eval(const ThresholdFn& c, std::span<const double> x) {
    if (const auto* k = std::get_if<ConstantThreshold>(&c)) return k->value;
    if (const auto* a = std::get_if<AffineThreshold>(&c)) {
        if (a->slope.size() != x.size())
            fail(Errc::invalid_input, "affine threshold dimension mismatch");
        double s = a->intercept;
        for (std::size_t j = 0; j < x.size(); ++j) s += a->slope[j] * x[j];
        if (!std::isfinite(s)) fail(Errc::invalid_input, "threshold evaluated non-finite");
        return s;
    }
    fail(Errc::invalid_input,
         "plug-in VaR threshold must be resolved by the risk module before evaluation");
}

namespace {

double portfolio_loss(std::span<const double> a, std::span<const double> y) {
    if (a.size() != y.size()) fail(Errc::invalid_input, "portfolio weight dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * y[j];
    return -s;
}

void require_unit(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a) {
        if (!std::isfinite(v)) fail(Errc::invalid_input, "portfolio weights must be finite");
        s += v * v;
    }
    if (std::fabs(std::sqrt(s) - 1.0) > 1e-8)
        fail(Errc::invalid_input, "portfolio weights must have unit norm");
}

}  // namespace

double phi_eval(const PhiSpec& phi, std::span<const double> y, std::span<const double> x) {
    if (const auto* raw = std::get_if<RawComponent>(&phi)) {
        if (raw->component >= y.size())
            fail(Errc::invalid_input, "raw component index out of range");
        return y[raw->component];
    }
    if (const auto* c = std::get_if<ConstantPhi>(&phi)) return c->value;
    if (const auto* num = std::get_if<ShortfallNumerator>(&phi)) {
        const double loss = portfolio_loss(num->a, y);
        return loss > threshold_eval(num->threshold, x) ? loss : 0.0;
    }
    const auto& ind = std::get<ShortfallIndicator>(phi);
    const double loss = portfolio_loss(ind.a, y);
    return loss > threshold_eval(ind.threshold, x) ? 1.0 : 0.0;
}

PhiSpec make_shortfall_numerator(std::vector<double> a, ThresholdFn c) {
    require_unit(a);
    return ShortfallNumerator{std::move(a), std::move(c)};
}

PhiSpec make_shortfall_indicator(std::vector<double> a, ThresholdFn c) {
    require_unit(a);
    return ShortfallIndicator{std::move(a), std::move(c)};
}

std::size_t w_output_dim(const WSpec& w_map, std::size_t p) {
    if (const auto* id = std::get_if<IdentityMap>(&w_map)) {
        if (id->dim != p) fail(Errc::invalid_input, "identity map dimension must equal p");
        return p;
    }
    if (const auto* si = std::get_if<SingleIndex>(&w_map)) {
        if (si->b.size() != p) fail(Errc::invalid_input, "single-index vector dimension mismatch");
        return 1;
    }
    const auto& cs = std::get<CoordinateSubset>(w_map);
    if (cs.indices.empty()) fail(Errc::invalid_input, "coordinate subset must be nonempty");
    for (std::size_t i : cs.indices)
        if (i >= p) fail(Errc::invalid_input, "coordinate subset index out of range");
    return cs.indices.size();
}

void w_eval_into(const WSpec& w_map, std::span<const double> x, std::span<double> out) {
    if (const auto* id = std::get_if<IdentityMap>(&w_map)) {
        if (id->dim != x.size() || out.size() != x.size())
            fail(Errc::invalid_input, "identity map dimension mismatch");
        std::copy(x.begin(), x.end(), out.begin());
        return;
    }
    if (const auto* si = std::get_if<SingleIndex>(&w_map)) {
        if (si->b.size() != x.size() || out.size() != 1)
            fail(Errc::invalid_input, "single-index dimension mismatch");
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += si->b[j] * x[j];
        out[0] = s;
        return;
    }
    const auto& cs = std::get<CoordinateSubset>(w_map);
    if (out.size() != cs.indices.size())
        fail(Errc::invalid_input, "coordinate subset dimension mismatch");
    for (std::size_t j = 0; j < cs.indices.size(); ++j) {
        if (cs.indices[j] >= x.size())
            fail(Errc::invalid_input, "coordinate subset index out of range");
        out[j] = x[cs.indices[j]];
    }
}

std::vector<double> w_eval(const WSpec& w_map, std::span<const double> x) {
    std::vector<double> out(w_output_dim(w_map, x.size()));
    w_eval_into(w_map, x, out);
    return out;
}

}  // namespace kernrates
