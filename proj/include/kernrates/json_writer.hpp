#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace kernrates {

/// Minimal JSON value used for report emission. Objects keep their keys in a
/// sorted map and doubles render via format_double, so serializing the same
/// report twice produces byte-identical output (the determinism contract for
/// reports). Not a parser; configs use the INI reader instead.
class Json {
public:
    using Array = std::vector<Json>;
    using Object = std::map<std::string, Json>;

    Json() : value_(nullptr) {}
    Json(std::nullptr_t) : value_(nullptr) {}
    Json(bool b) : value_(b) {}
    Json(double d) : value_(d) {}
    Json(int v) : value_(static_cast<std::int64_t>(v)) {}
    Json(unsigned v) : value_(static_cast<std::int64_t>(v)) {}
    Json(long v) : value_(static_cast<std::int64_t>(v)) {}
    Json(unsigned long v) : value_(static_cast<std::int64_t>(v)) {}
    Json(long long v) : value_(static_cast<std::int64_t>(v)) {}
    Json(unsigned long long v) : value_(static_cast<std::int64_t>(v)) {}
    Json(const char* s) : value_(std::string(s)) {}
    Json(std::string s) : value_(std::move(s)) {}
    Json(Array a) : value_(std::move(a)) {}
    Json(Object o) : value_(std::move(o)) {}

    static Json array() { return Json(Array{}); }
    static Json object() { return Json(Object{}); }

    template <class T>
    static Json array_of(const std::vector<T>& xs) {
        Array a;
        a.reserve(xs.size());
        for (const auto& x : xs) a.emplace_back(x);
        return Json(std::move(a));
    }

    Json& operator[](const std::string& key);
    void push_back(Json v);

    bool is_object() const { return std::holds_alternative<Object>(value_); }
    bool is_array() const { return std::holds_alternative<Array>(value_); }

    /// Canonical serialization: sorted keys, no whitespace, %.17g doubles.
    std::string dump() const;

private:
    std::variant<std::nullptr_t, bool, std::int64_t, double, std::string, Array, Object> value_;
    void write(std::string& out) const;
};

}  // namespace kernrates
