#pragma once

// Tabular results rendered as an aligned text table, CSV or JSON.

#include <collide/logspace.hpp>
#include <collide/switch_model.hpp>

#include <json.hpp>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace collide {

enum class Format { table, csv, json };

struct OutputSpec {
    Format format = Format::table;
    int significant_digits = 3;

    OutputSpec() = default;
    OutputSpec(Format f, int digits) : format(f), significant_digits(digits) {
        if (digits < 1 || digits > 17)
            throw std::invalid_argument("significant digits must be in [1, 17]");
    }
};

/// Real printed with a fixed number of decimals (= significant_digits).
struct Fixed {
    double value;
};
/// Real printed in scientific notation.
struct Sci {
    double value;
};

using Cell = std::variant<std::uint64_t, std::string, Fixed, Sci, LogReal, Rational>;

struct Column {
    std::string name;
    bool in_table = true; ///< false: csv/json only
};

struct Output {
    std::string command;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
    std::vector<Column> columns;
    std::vector<std::vector<Cell>> rows;
    std::optional<std::uint64_t> seed;
};

namespace detail {

// "3.33e-2": mantissa with `digits` significant digits, unpadded exponent.
inline std::string join_scientific(const std::string& mantissa, long exponent) {
    return mantissa + "e" + std::to_string(exponent);
}

inline std::string fixed_mantissa(double m, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits - 1) << m;
    return os.str();
}

} // namespace detail

inline std::string format_scientific(double value, int digits) {
    if (value == 0.0) return "0";
    if (!std::isfinite(value)) return value > 0 ? "inf" : (value < 0 ? "-inf" : "nan");
    std::ostringstream os;
    os << std::scientific << std::setprecision(digits - 1) << value;
    const std::string s = os.str();
    const auto epos = s.find('e');
    return detail::join_scientific(s.substr(0, epos), std::strtol(s.c_str() + epos + 1, nullptr, 10));
}

/// Scientific rendering straight from the logarithm, so magnitudes far
/// outside the double range still print.
inline std::string format_scientific(LogReal p, int digits) {
    if (p.is_zero()) return "0";
    const double ln = p.log_value();
    if (ln > -700.0 && ln < 700.0) return format_scientific(std::exp(ln), digits);
    const double l10 = ln / std::log(10.0);
    auto exponent = static_cast<long>(std::floor(l10));
    std::string mant = detail::fixed_mantissa(std::pow(10.0, l10 - static_cast<double>(exponent)), digits);
    if (mant.rfind("10", 0) == 0) {
        ++exponent;
        mant = detail::fixed_mantissa(1.0, digits);
    }
    return detail::join_scientific(mant, exponent);
}

inline std::string format_fixed(double value, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << value;
    return os.str();
}

inline std::string render_cell(const Cell& cell, const OutputSpec& spec, bool for_table) {
    const int d = spec.significant_digits;
    return std::visit(
        [&](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::uint64_t>) return std::to_string(v);
            else if constexpr (std::is_same_v<T, std::string>) return v;
            else if constexpr (std::is_same_v<T, Fixed>) return format_fixed(v.value, d);
            else if constexpr (std::is_same_v<T, Sci>) return format_scientific(v.value, d);
            else if constexpr (std::is_same_v<T, LogReal>) return format_scientific(v, d);
            else {
                std::string s = to_string(v);
                if (for_table) s += " ≈ " + format_scientific(to_double(v), d);
                return s;
            }
        },
        cell);
}

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

// Display width in code points (the table uses a non-ASCII approx sign).
inline std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
}

inline nlohmann::ordered_json json_cell(const Cell& cell, const OutputSpec& spec) {
    if (const auto* u = std::get_if<std::uint64_t>(&cell)) return *u;
    if (const auto* s = std::get_if<std::string>(&cell)) return *s;
    if (std::holds_alternative<Rational>(cell)) return render_cell(cell, spec, false);
    // Reals go out as JSON numbers carrying exactly the rendered precision.
    const std::string text = render_cell(cell, spec, false);
    errno = 0;
    const double v = std::strtod(text.c_str(), nullptr);
    if (errno == ERANGE || !std::isfinite(v)) return text;
    return v;
}

} // namespace detail

inline void render(const Output& out, const OutputSpec& spec, std::ostream& os) {
    switch (spec.format) {
    case Format::csv: {
        for (std::size_t c = 0; c < out.columns.size(); ++c)
            os << (c ? "," : "") << out.columns[c].name;
        os << '\n';
        for (const auto& row : out.rows) {
            for (std::size_t c = 0; c < row.size(); ++c)
                os << (c ? "," : "") << detail::csv_escape(render_cell(row[c], spec, false));
            os << '\n';
        }
        break;
    }
    case Format::json: {
        nlohmann::ordered_json doc;
        doc["command"] = out.command;
        doc["inputs"] = out.inputs;
        auto results = nlohmann::ordered_json::array();
        for (const auto& row : out.rows) {
            nlohmann::ordered_json obj = nlohmann::ordered_json::object();
            for (std::size_t c = 0; c < row.size(); ++c)
                obj[out.columns[c].name] = detail::json_cell(row[c], spec);
            results.push_back(std::move(obj));
        }
        doc["results"] = std::move(results);
        doc["seed"] = out.seed ? nlohmann::ordered_json(*out.seed) : nlohmann::ordered_json(nullptr);
        os << doc.dump(2) << '\n';
        break;
    }
    case Format::table: {
        std::vector<std::size_t> shown;
        for (std::size_t c = 0; c < out.columns.size(); ++c)
            if (out.columns[c].in_table) shown.push_back(c);
        std::vector<std::vector<std::string>> text;
        text.emplace_back();
        for (auto c : shown) text.back().push_back(out.columns[c].name);
        for (const auto& row : out.rows) {
            text.emplace_back();
            for (auto c : shown) text.back().push_back(render_cell(row[c], spec, true));
        }
        std::vector<std::size_t> width(shown.size(), 0);
        for (const auto& line : text)
            for (std::size_t i = 0; i < line.size(); ++i)
                width[i] = std::max(width[i], detail::display_width(line[i]));
        for (const auto& line : text) {
            for (std::size_t i = 0; i < line.size(); ++i) {
                const std::size_t pad = width[i] - detail::display_width(line[i]);
                if (i) os << "  ";
                // Left-align the first column, right-align the rest.
                if (i == 0) os << line[i] << (line.size() > 1 ? std::string(pad, ' ') : "");
                else os << std::string(pad, ' ') << line[i];
            }
            os << '\n';
        }
        break;
    }
    }
}

} // namespace collide
