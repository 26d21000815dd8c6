#include "lsi/format.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>
#include <unistd.h>

namespace lsi {

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", x);
    std::string s(buf);
    const auto e = s.find('e');
    std::string mantissa = s.substr(0, e);
    std::string exponent = s.substr(e + 1);
    bool negative = exponent[0] == '-';
    std::size_t start = (exponent[0] == '-' || exponent[0] == '+') ? 1 : 0;
    while (start + 1 < exponent.size() && exponent[start] == '0') ++start;
    return mantissa + "e" + (negative ? "-" : "") + exponent.substr(start);
}

namespace {

void dump(const Json& j, int indent, int depth, std::string& out) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::number_float: {
            const double x = j.get<double>();
            out += std::isfinite(x) ? format_real(x) : "null";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            // Scalars and arrays of scalars stay on one line.
            auto scalar_row = [](const Json& v) {
                return !v.is_structured() ||
                       (v.is_array() && std::none_of(v.begin(), v.end(), [](const Json& w) { return w.is_structured(); }));
            };
            const bool flat = std::all_of(j.begin(), j.end(), scalar_row);
            if (flat || indent == 0) {
                out += "[";
                bool first = true;
                for (const Json& v : j) {
                    if (!first) out += indent > 0 ? ", " : ",";
                    first = false;
                    dump(v, 0, 0, out);
                }
                out += "]";
                return;
            }
            out += "[";
            out += nl;
            bool first = true;
            for (const Json& v : j) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad;
                dump(v, indent, depth + 1, out);
            }
            out += nl + close + "]";
            return;
        }
        case Json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad + Json(it.key()).dump() + (indent > 0 ? ": " : ":");
                dump(it.value(), indent, depth + 1, out);
            }
            out += nl + close + "}";
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const Json& doc, int indent) {
    std::string out;
    dump(doc, indent, 0, out);
    out += "\n";
    return out;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const Json& doc) {
    if (!doc.is_array() || doc.empty()) throw std::invalid_argument("matrix must be a nonempty array of rows");
    const auto n = static_cast<Index>(doc.size());
    const auto cols = static_cast<Index>(doc[0].size());
    Matrix m(n, cols);
    for (Index i = 0; i < n; ++i) {
        const Json& row = doc[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Index>(row.size()) != cols)
            throw std::invalid_argument("matrix row " + std::to_string(i) + " has the wrong length");
        for (Index j = 0; j < cols; ++j) {
            const Json& z = row[static_cast<std::size_t>(j)];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                throw std::invalid_argument("matrix entry must be [re, im]");
            m(i, j) = cplx(z[0].get<double>(), z[1].get<double>());
        }
    }
    return m;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path + ": " + ec.message());
    }
}

}  // namespace lsi
