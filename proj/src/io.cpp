#include "gareg/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "gareg/errors.hpp"

namespace gareg {

namespace {

struct Token {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i >= line.size()) break;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        tokens.push_back({line.substr(start, i - start), start + 1});
    }
    return tokens;
}

double parse_coordinate(const Token& token, const std::string& name, int line_no) {
    double value = 0.0;
    const char* begin = token.text.data();
    const char* end = begin + token.text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(name + ":" + std::to_string(line_no) + ":" +
                         std::to_string(token.column) + ": not a number: '" +
                         std::string(token.text) + "'");
    if (!std::isfinite(value))
        throw NonFiniteCoordinateError(name + ":" + std::to_string(line_no) +
                                       ": non-finite coordinate '" + std::string(token.text) +
                                       "'");
    return value;
}

std::string_view strip_comment_and_cr(std::string_view line) {
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
        line.remove_suffix(1);
    return line;
}

PointCloud parse_xyz(const std::string& text, const std::string& name) {
    PointCloud cloud;
    cloud.source_id = name;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto fields = parse_decimal_fields(strip_comment_and_cr(raw), name, line_no);
        if (fields.empty()) continue;
        if (fields.size() != 3)
            throw ParseError(name + ":" + std::to_string(line_no) +
                             ": expected 3 coordinates, got " + std::to_string(fields.size()));
        cloud.points.push_back({fields[0], fields[1], fields[2]});
    }
    return cloud;
}

struct PlyElement {
    std::string name;
    long count = 0;
    std::vector<std::string> properties;  // scalar property names, in order
    bool has_list = false;
};

PointCloud parse_ply(const std::string& text, const std::string& name) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    auto next_line = [&](std::string& out) {
        if (!std::getline(in, raw)) return false;
        ++line_no;
        std::string_view v = raw;
        while (!v.empty() && (v.back() == '\r' || v.back() == '\n')) v.remove_suffix(1);
        out.assign(v);
        return true;
    };
    auto fail = [&](const std::string& what) -> ParseError {
        return ParseError(name + ":" + std::to_string(line_no) + ": " + what);
    };

    std::string line;
    if (!next_line(line) || line != "ply") throw fail("not a PLY file (missing 'ply' magic)");

    std::vector<PlyElement> elements;
    bool format_seen = false;
    bool header_done = false;
    while (next_line(line)) {
        const auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        const std::string_view kw = tokens[0].text;
        if (kw == "comment" || kw == "obj_info") continue;
        if (kw == "format") {
            if (tokens.size() != 3 || tokens[1].text != "ascii" || tokens[2].text != "1.0")
                throw fail("only 'format ascii 1.0' is supported");
            format_seen = true;
        } else if (kw == "element") {
            if (tokens.size() != 3) throw fail("malformed element line");
            PlyElement element;
            element.name = std::string(tokens[1].text);
            const auto count_token = tokens[2];
            long count = 0;
            const auto [ptr, ec] = std::from_chars(
                count_token.text.data(), count_token.text.data() + count_token.text.size(), count);
            if (ec != std::errc{} || ptr != count_token.text.data() + count_token.text.size() ||
                count < 0)
                throw fail("bad element count");
            element.count = count;
            elements.push_back(element);
        } else if (kw == "property") {
            if (elements.empty()) throw fail("property before any element");
            if (tokens.size() >= 2 && tokens[1].text == "list") {
                elements.back().has_list = true;
            } else if (tokens.size() == 3) {
                elements.back().properties.push_back(std::string(tokens[2].text));
            } else {
                throw fail("malformed property line");
            }
        } else if (kw == "end_header") {
            header_done = true;
            break;
        } else {
            throw fail("unknown header keyword '" + std::string(kw) + "'");
        }
    }
    if (!header_done) throw fail("missing end_header");
    if (!format_seen) throw fail("missing format line");

    const auto vertex_it =
        std::find_if(elements.begin(), elements.end(),
                     [](const PlyElement& e) { return e.name == "vertex"; });
    if (vertex_it == elements.end()) throw fail("no 'element vertex' in header");
    if (vertex_it->has_list) throw fail("list properties on the vertex element are unsupported");

    int xi = -1, yi = -1, zi = -1;
    for (std::size_t i = 0; i < vertex_it->properties.size(); ++i) {
        if (vertex_it->properties[i] == "x") xi = static_cast<int>(i);
        if (vertex_it->properties[i] == "y") yi = static_cast<int>(i);
        if (vertex_it->properties[i] == "z") zi = static_cast<int>(i);
    }
    if (xi < 0 || yi < 0 || zi < 0) throw fail("vertex element lacks x/y/z properties");

    PointCloud cloud;
    cloud.source_id = name;
    for (const PlyElement& element : elements) {
        if (&element == &*vertex_it) {
            cloud.points.reserve(static_cast<std::size_t>(element.count));
            for (long i = 0; i < element.count; ++i) {
                if (!next_line(line)) throw fail("unexpected end of vertex data");
                const auto tokens = tokenize(line);
                if (tokens.size() != element.properties.size())
                    throw fail("vertex line has " + std::to_string(tokens.size()) +
                               " values, header declares " +
                               std::to_string(element.properties.size()));
                cloud.points.push_back({parse_coordinate(tokens[xi], name, line_no),
                                        parse_coordinate(tokens[yi], name, line_no),
                                        parse_coordinate(tokens[zi], name, line_no)});
            }
        } else {
            for (long i = 0; i < element.count; ++i) {
                if (!next_line(line)) throw fail("unexpected end of element '" + element.name + "'");
            }
        }
    }
    return cloud;
}

void append_point(std::string& out, const Point3& p) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x, p.y, p.z);
    out += buf;
}

}  // namespace

std::vector<double> parse_decimal_fields(std::string_view line, const std::string& name,
                                         int line_no) {
    std::vector<double> fields;
    for (const Token& token : tokenize(line))
        fields.push_back(parse_coordinate(token, name, line_no));
    return fields;
}

CloudFormat format_for_path(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return CloudFormat::Xyz;
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == "ply" ? CloudFormat::PlyAscii : CloudFormat::Xyz;
}

PointCloud parse_cloud(const std::string& text, CloudFormat format, const std::string& name) {
    return format == CloudFormat::Xyz ? parse_xyz(text, name) : parse_ply(text, name);
}

std::string serialize_cloud(const PointCloud& cloud, CloudFormat format) {
    std::string out;
    if (format == CloudFormat::Xyz) {
        out.reserve(cloud.size() * 60);
        for (const Point3& p : cloud.points) append_point(out, p);
        return out;
    }
    out += "ply\nformat ascii 1.0\n";
    out += "element vertex " + std::to_string(cloud.size()) + "\n";
    out += "property float x\nproperty float y\nproperty float z\nend_header\n";
    for (const Point3& p : cloud.points) append_point(out, p);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return buffer.str();
}

PointCloud load_cloud(const std::string& path, CloudFormat format) {
    return parse_cloud(read_file(path), format, path);
}

void save_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    atomic_write(path, serialize_cloud(cloud, format));
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("rename failed: " + tmp + " -> " + path);
}

std::string content_hash_hex(const std::string& bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 0x100000001B3ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string file_hash_hex(const std::string& path) { return content_hash_hex(read_file(path)); }

}  // namespace gareg
