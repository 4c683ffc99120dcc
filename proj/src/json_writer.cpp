#include "kernrates/json_writer.hpp"

#include <cmath>

#include "kernrates/errors.hpp"
#include "kernrates/numerics.hpp"

namespace kernrates {

Json& Json::operator[](const std::string& key) {
    if (std::holds_alternative<std::nullptr_t>(value_)) value_ = Object{};
    if (!is_object()) fail(Errc::invalid_input, "Json::operator[] on non-object");
    return std::get<Object>(value_)[key];
}

void Json::push_back(Json v) {
    if (std::holds_alternative<std::nullptr_t>(value_)) value_ = Array{};
    if (!is_array()) fail(Errc::invalid_input, "Json::push_back on non-array");
    std::get<Array>(value_).push_back(std::move(v));
}

namespace {

void write_escaped(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

}  // namespace

void Json::write(std::string& out) const {
    if (std::holds_alternative<std::nullptr_t>(value_)) {
        out += "null";
    } else if (const bool* b = std::get_if<bool>(&value_)) {
        out += *b ? "true" : "false";
    } else if (const std::int64_t* i = std::get_if<std::int64_t>(&value_)) {
        out += std::to_string(*i);
    } else if (const double* d = std::get_if<double>(&value_)) {
        if (!std::isfinite(*d))
            fail(Errc::invalid_input, "canonical JSON cannot hold non-finite numbers");
        out += format_double(*d);
    } else if (const std::string* s = std::get_if<std::string>(&value_)) {
        write_escaped(*s, out);
    } else if (const Array* a = std::get_if<Array>(&value_)) {
        out += '[';
        for (std::size_t k = 0; k < a->size(); ++k) {
            if (k) out += ',';
            (*a)[k].write(out);
        }
        out += ']';
    } else {
        const Object& o = std::get<Object>(value_);
        out += '{';
        bool first = true;
        for (const auto& [key, val] : o) {
            if (!first) out += ',';
            first = false;
            write_escaped(key, out);
            out += ':';
            val.write(out);
        }
        out += '}';
    }
}

std::string Json::dump() const {
    std::string out;
    write(out);
    return out;
}

}  // namespace kernrates
