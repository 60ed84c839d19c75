#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "abstain/environment.hpp"
#include "abstain/errors.hpp"
#include "abstain/point.hpp"

namespace abstain {

// Line-delimited record formats, UTF-8, tab-separated fields. Floats print
// with 17 significant digits so a round trip is value-exact.
//
//   trace row:   t \t c \t instance \t prediction \t label \t observed
//   script row:  t \t c \t instance-or-dash
//
// Instance encodings: "s:<float>" scalar, "v:<float>,...," vector,
// "n:<i>.<i>..." tree path ("n:" alone is the root).

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string encode_point(const Point& p) {
    if (p.is_scalar()) return "s:" + format_double(p.scalar());
    if (p.is_vector()) {
        std::string out = "v:";
        const auto& v = p.vec();
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) out += ',';
            out += format_double(v[i]);
        }
        return out;
    }
    std::string out = "n:";
    const auto& path = p.node().path;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += '.';
        out += std::to_string(path[i]);
    }
    return out;
}

inline Point decode_point(std::string_view s) {
    if (s.size() < 2 || s[1] != ':') throw input_error("decode_point: malformed encoding");
    const std::string_view body = s.substr(2);
    if (s[0] == 's') {
        return Point::scalar(std::strtod(std::string(body).c_str(), nullptr));
    }
    if (s[0] == 'v') {
        std::vector<double> vals;
        std::size_t pos = 0;
        while (pos <= body.size()) {
            const std::size_t comma = body.find(',', pos);
            const std::string_view item =
                body.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
            if (item.empty()) throw input_error("decode_point: empty vector component");
            vals.push_back(std::strtod(std::string(item).c_str(), nullptr));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        return Point::vector(std::move(vals));
    }
    if (s[0] == 'n') {
        TreeNode node;
        std::size_t pos = 0;
        while (pos < body.size()) {
            const std::size_t dot = body.find('.', pos);
            const std::string_view item =
                body.substr(pos, dot == std::string_view::npos ? dot : dot - pos);
            int value = 0;
            const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
            if (ec != std::errc() || ptr != item.data() + item.size())
                throw input_error("decode_point: malformed tree path");
            node.path.push_back(value);
            if (dot == std::string_view::npos) break;
            pos = dot + 1;
        }
        return Point::node(std::move(node));
    }
    throw input_error("decode_point: unknown point kind");
}

inline char encode_prediction(Prediction p) {
    if (p == Prediction::Abstain) return 'A';
    return label_value(p) == 1 ? '1' : '0';
}

inline Prediction decode_prediction(char c) {
    if (c == 'A') return Prediction::Abstain;
    if (c == '0') return Prediction::Zero;
    if (c == '1') return Prediction::One;
    throw input_error("decode_prediction: unknown symbol");
}

inline std::string format_trace(const RunResult& result) {
    std::string out;
    for (const auto& row : result.trace) {
        out += std::to_string(row.t);
        out += '\t';
        out += row.corrupted ? '1' : '0';
        out += '\t';
        out += encode_point(row.x);
        out += '\t';
        out += encode_prediction(row.prediction);
        out += '\t';
        out += row.label ? '1' : '0';
        out += '\t';
        out += row.observed ? '1' : '0';
        out += '\n';
    }
    return out;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        fields.push_back(line.substr(pos, next == std::string_view::npos ? next : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return fields;
}

inline std::vector<TraceRow> parse_trace(std::string_view text) {
    std::vector<TraceRow> rows;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        if (!line.empty() && line[0] != '#') {
            const auto fields = split_fields(line, '\t');
            if (fields.size() != 6) throw input_error("parse_trace: field count mismatch");
            TraceRow row;
            row.t = std::stoi(std::string(fields[0]));
            row.corrupted = fields[1] == "1";
            row.x = decode_point(fields[2]);
            row.prediction = decode_prediction(fields[3][0]);
            row.label = fields[4] == "1" ? 1 : 0;
            row.observed = fields[5] == "1";
            rows.push_back(std::move(row));
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return rows;
}

inline std::string format_script(const AdversaryScript& script) {
    std::string out;
    for (int t = 1; t <= script.horizon; ++t) {
        out += std::to_string(t);
        out += '\t';
        out += script.corrupt[t - 1] ? '1' : '0';
        out += '\t';
        out += script.instance[t - 1] ? encode_point(*script.instance[t - 1]) : std::string("-");
        out += '\n';
    }
    return out;
}

inline AdversaryScript parse_script(std::string_view text) {
    AdversaryScript script;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t eol = text.find('\n', pos);
        const std::string_view line =
            text.substr(pos, eol == std::string_view::npos ? eol : eol - pos);
        if (!line.empty()) {
            const auto fields = split_fields(line, '\t');
            if (fields.size() != 3) throw input_error("parse_script: field count mismatch");
            const bool corrupted = fields[1] == "1";
            script.corrupt.push_back(corrupted ? 1 : 0);
            script.instance.push_back(corrupted ? std::optional<Point>(decode_point(fields[2]))
                                                : std::nullopt);
            ++script.horizon;
        }
        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    script.validate();
    return script;
}

} // namespace abstain
