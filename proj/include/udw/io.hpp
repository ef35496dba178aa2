#pragma once

// Output layer: an insertion-ordered JSON document with %.17g number
// formatting (payloads must be byte-identical across runs and worker
// counts), CSV emission, and gnuplot script generation for response curves.

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "udw/numeric.hpp"

namespace udw {

class JsonValue {
   public:
    enum class Kind { null, boolean, number, integer, text, array, object };

    JsonValue() = default;
    static JsonValue null() { return JsonValue{}; }
    static JsonValue boolean(bool b) {
        JsonValue v;
        v.kind_ = Kind::boolean;
        v.bool_ = b;
        return v;
    }
    static JsonValue number(double d) {
        JsonValue v;
        v.kind_ = Kind::number;
        v.num_ = d;
        return v;
    }
    static JsonValue integer(long long i) {
        JsonValue v;
        v.kind_ = Kind::integer;
        v.int_ = i;
        return v;
    }
    static JsonValue text(std::string s) {
        JsonValue v;
        v.kind_ = Kind::text;
        v.text_ = std::move(s);
        return v;
    }
    static JsonValue array() {
        JsonValue v;
        v.kind_ = Kind::array;
        return v;
    }
    static JsonValue object() {
        JsonValue v;
        v.kind_ = Kind::object;
        return v;
    }

    JsonValue& push(JsonValue v) {
        require(Kind::array);
        items_.push_back(std::move(v));
        return *this;
    }
    JsonValue& set(const std::string& key, JsonValue v) {
        require(Kind::object);
        fields_.emplace_back(key, std::move(v));
        return *this;
    }
    JsonValue& set(const std::string& key, const char* s) {
        return set(key, JsonValue::text(s));
    }
    JsonValue& set(const std::string& key, const std::string& s) {
        return set(key, JsonValue::text(s));
    }
    JsonValue& set(const std::string& key, double d) { return set(key, JsonValue::number(d)); }
    JsonValue& set(const std::string& key, int i) {
        return set(key, JsonValue::integer(i));
    }
    JsonValue& set(const std::string& key, long long i) {
        return set(key, JsonValue::integer(i));
    }
    JsonValue& set(const std::string& key, std::size_t i) {
        return set(key, JsonValue::integer(static_cast<long long>(i)));
    }
    JsonValue& set(const std::string& key, bool b) { return set(key, JsonValue::boolean(b)); }

    [[nodiscard]] std::string dump(int indent = 2) const {
        std::ostringstream os;
        write(os, indent, 0);
        os << "\n";
        return os.str();
    }

   private:
    void require(Kind k) {
        if (kind_ == Kind::null) kind_ = k;
        if (kind_ != k) throw std::logic_error("JsonValue: kind mismatch");
    }

    static void write_escaped(std::ostream& os, const std::string& s) {
        os << '"';
        for (char c : s) {
            switch (c) {
                case '"': os << "\\\""; break;
                case '\\': os << "\\\\"; break;
                case '\n': os << "\\n"; break;
                case '\r': os << "\\r"; break;
                case '\t': os << "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        os << buf;
                    } else {
                        os << c;
                    }
            }
        }
        os << '"';
    }

    void write(std::ostream& os, int indent, int depth) const {
        const std::string pad(static_cast<std::size_t>(indent) * (depth + 1), ' ');
        const std::string closepad(static_cast<std::size_t>(indent) * depth, ' ');
        switch (kind_) {
            case Kind::null: os << "null"; break;
            case Kind::boolean: os << (bool_ ? "true" : "false"); break;
            case Kind::number:
                // JSON has no non-finite literals; emit null instead.
                os << (std::isfinite(num_) ? format_g17(num_) : "null");
                break;
            case Kind::integer: os << int_; break;
            case Kind::text: write_escaped(os, text_); break;
            case Kind::array:
                if (items_.empty()) {
                    os << "[]";
                    break;
                }
                os << "[\n";
                for (std::size_t i = 0; i < items_.size(); ++i) {
                    os << pad;
                    items_[i].write(os, indent, depth + 1);
                    os << (i + 1 < items_.size() ? ",\n" : "\n");
                }
                os << closepad << "]";
                break;
            case Kind::object:
                if (fields_.empty()) {
                    os << "{}";
                    break;
                }
                os << "{\n";
                for (std::size_t i = 0; i < fields_.size(); ++i) {
                    os << pad;
                    write_escaped(os, fields_[i].first);
                    os << ": ";
                    fields_[i].second.write(os, indent, depth + 1);
                    os << (i + 1 < fields_.size() ? ",\n" : "\n");
                }
                os << closepad << "}";
                break;
        }
    }

    Kind kind_ = Kind::null;
    bool bool_ = false;
    double num_ = 0.0;
    long long int_ = 0;
    std::string text_;
    std::vector<JsonValue> items_;
    std::vector<std::pair<std::string, JsonValue>> fields_;
};

// ---------------------------------------------------------------------------
// file helpers

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

[[nodiscard]] inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path.string());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// ---------------------------------------------------------------------------
// CSV: RFC-style quoting, %.17g numbers

[[nodiscard]] inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

struct CsvWriter {
    std::ostringstream os;
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) os << ',';
            os << csv_field(fields[i]);
        }
        os << '\n';
    }
    [[nodiscard]] std::string str() const { return os.str(); }
};

// ---------------------------------------------------------------------------
// gnuplot script for a response curve written as a two-or-more-column .dat

[[nodiscard]] inline std::string gnuplot_script(const std::string& dat_name,
                                                const std::string& title,
                                                const std::string& xlabel,
                                                const std::string& ylabel) {
    std::ostringstream os;
    os << "set terminal pngcairo size 900,600\n"
       << "set output '" << dat_name << ".png'\n"
       << "set title '" << title << "'\n"
       << "set xlabel '" << xlabel << "'\n"
       << "set ylabel '" << ylabel << "'\n"
       << "set grid\n"
       << "plot '" << dat_name << "' using 1:2 with linespoints title 'value', \\\n"
       << "     '" << dat_name << "' using 1:2:3 with yerrorbars title 'error'\n";
    return os.str();
}

}  // namespace udw
