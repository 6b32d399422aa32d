#include "topoeval/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace topoeval {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

// Reads one whitespace-delimited PGM header token, skipping '#' comments.
std::string next_pgm_token(const std::string& data, std::size_t& pos) {
    while (pos < data.size()) {
        if (std::isspace(static_cast<unsigned char>(data[pos]))) {
            ++pos;
        } else if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    const std::size_t start = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(start, pos - start);
}

int parse_int(const std::string& tok, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw FormatError("malformed PGM header: bad " + what + " '" + tok + "'");
    }
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    std::size_t pos = 0;
    if (next_pgm_token(data, pos) != "P5")
        throw FormatError(path.string() + ": not a P5 PGM file");
    PgmImage img;
    img.width = parse_int(next_pgm_token(data, pos), "width");
    img.height = parse_int(next_pgm_token(data, pos), "height");
    const int maxval = parse_int(next_pgm_token(data, pos), "maxval");
    if (img.width <= 0 || img.height <= 0)
        throw FormatError(path.string() + ": non-positive dimensions " +
                          std::to_string(img.width) + "x" + std::to_string(img.height));
    if (maxval != 255)
        throw FormatError(path.string() + ": unsupported maxval " + std::to_string(maxval));
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
        throw FormatError(path.string() + ": missing whitespace before pixel payload");
    ++pos;
    const std::size_t expected =
        static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    const std::size_t actual = data.size() - pos;
    if (actual != expected)
        throw FormatError(path.string() + ": declared " + std::to_string(img.width) + "x" +
                          std::to_string(img.height) + " = " + std::to_string(expected) +
                          " pixels but payload holds " + std::to_string(actual) + " bytes");
    img.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
    return img;
}

void write_pgm(const PgmImage& img, const std::filesystem::path& path) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    out.append(img.pixels.begin(), img.pixels.end());
    write_file(path, out);
}

BinaryMask read_binary_mask(const std::filesystem::path& path) {
    const PgmImage img = read_pgm(path);
    BinaryMask m(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const std::uint8_t v = img.pixels[i];
        if (v != 0 && v != 255)
            throw DomainError(path.string() + ": pixel (" +
                              std::to_string(i % static_cast<std::size_t>(img.width)) + "," +
                              std::to_string(i / static_cast<std::size_t>(img.width)) +
                              ") has value " + std::to_string(v) +
                              ", expected 0 or 255 for a binary mask");
        m.bits[i] = v ? 1 : 0;
    }
    return m;
}

void write_binary_mask(const BinaryMask& m, const std::filesystem::path& path) {
    PgmImage img{m.width, m.height, {}};
    img.pixels.resize(m.bits.size());
    for (std::size_t i = 0; i < m.bits.size(); ++i) img.pixels[i] = m.bits[i] ? 255 : 0;
    write_pgm(img, path);
}

ProbabilityMap read_probability_map(const std::filesystem::path& path) {
    const PgmImage img = read_pgm(path);
    ProbabilityMap p(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) p.values[i] = img.pixels[i] / 255.0;
    return p;
}

void write_probability_map(const ProbabilityMap& p, const std::filesystem::path& path) {
    PgmImage img{p.width, p.height, {}};
    img.pixels.resize(p.values.size());
    for (std::size_t i = 0; i < p.values.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(p.values[i] * 255.0));
    write_pgm(img, path);
}

RoadGraph parse_graph(const std::string& text) {
    std::map<long, Point> node_records;
    std::vector<std::pair<long, long>> edge_records;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "N") {
            long id;
            double x, y;
            if (!(ls >> id >> x >> y))
                throw FormatError("line " + std::to_string(lineno) + ": malformed node record '" +
                                  line + "'");
            if (id < 0)
                throw FormatError("line " + std::to_string(lineno) + ": negative node id " +
                                  std::to_string(id));
            if (!node_records.emplace(id, Point{x, y}).second)
                throw FormatError("line " + std::to_string(lineno) + ": duplicate node id " +
                                  std::to_string(id));
        } else if (tag == "E") {
            long a, b;
            if (!(ls >> a >> b))
                throw FormatError("line " + std::to_string(lineno) + ": malformed edge record '" +
                                  line + "'");
            edge_records.emplace_back(a, b);
        } else {
            throw FormatError("line " + std::to_string(lineno) + ": unknown record type '" + tag +
                              "'");
        }
    }
    RoadGraph g;
    std::map<long, int> dense;
    for (const auto& [id, p] : node_records) dense[id] = g.add_node(p);
    for (const auto& [a, b] : edge_records) {
        const auto ia = dense.find(a), ib = dense.find(b);
        if (ia == dense.end())
            throw ReferenceError("edge references unknown node id " + std::to_string(a));
        if (ib == dense.end())
            throw ReferenceError("edge references unknown node id " + std::to_string(b));
        if (a == b) throw FormatError("edge joins node " + std::to_string(a) + " to itself");
        if (g.has_edge(ia->second, ib->second))
            throw FormatError("duplicate edge " + std::to_string(a) + "-" + std::to_string(b));
        g.add_edge(ia->second, ib->second);
    }
    return g;
}

RoadGraph read_graph_file(const std::filesystem::path& path) {
    try {
        return parse_graph(read_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    } catch (const ReferenceError& e) {
        throw ReferenceError(path.string() + ": " + e.what());
    }
}

std::string graph_to_string(const RoadGraph& g) {
    std::string out;
    for (int i = 0; i < g.node_count(); ++i) {
        const Point p = g.node(i);
        out += "N " + std::to_string(i) + " " + fmt_double(p.x) + " " + fmt_double(p.y) + "\n";
    }
    for (int a = 0; a < g.node_count(); ++a)
        for (const auto& e : g.neighbors(a))
            if (a < e.to) out += "E " + std::to_string(a) + " " + std::to_string(e.to) + "\n";
    return out;
}

void write_graph_file(const RoadGraph& g, const std::filesystem::path& path) {
    write_file(path, graph_to_string(g));
}

std::string label_pyramid_to_string(const LabelPyramid& p) {
    nlohmann::json doc;
    doc["levels"] = nlohmann::json::array();
    for (std::size_t k = 0; k < p.levels.size(); ++k) {
        const LabelLevel& lvl = p.levels[k];
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < lvl.matrix.rows; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < lvl.matrix.cols; ++c) row.push_back(int(lvl.matrix.at(r, c)));
            rows.push_back(std::move(row));
        }
        doc["levels"].push_back(
            {{"level", k}, {"patch_size", lvl.patch_size}, {"rows", std::move(rows)}});
    }
    return doc.dump(2) + "\n";
}

void write_label_pyramid(const LabelPyramid& p, const std::filesystem::path& path) {
    write_file(path, label_pyramid_to_string(p));
}

LabelPyramid parse_label_pyramid(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("label pyramid: invalid JSON: ") + e.what());
    }
    if (!doc.contains("levels") || !doc["levels"].is_array())
        throw FormatError("label pyramid: missing 'levels' array");
    LabelPyramid p;
    for (const auto& lvl : doc["levels"]) {
        LabelLevel out;
        out.patch_size = lvl.at("patch_size").get<int>();
        const auto& rows = lvl.at("rows");
        out.matrix.rows = static_cast<int>(rows.size());
        out.matrix.cols = out.matrix.rows > 0 ? static_cast<int>(rows[0].size()) : 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != out.matrix.cols)
                throw FormatError("label pyramid: ragged rows at patch size " +
                                  std::to_string(out.patch_size));
            for (const auto& v : row) {
                const int b = v.get<int>();
                if (b != 0 && b != 1)
                    throw FormatError("label pyramid: label " + std::to_string(b) +
                                      " is neither 0 nor 1");
                out.matrix.labels.push_back(static_cast<std::uint8_t>(b));
            }
        }
        p.levels.push_back(std::move(out));
    }
    return p;
}

LabelPyramid read_label_pyramid(const std::filesystem::path& path) {
    return parse_label_pyramid(read_file(path));
}

std::vector<std::vector<std::vector<double>>> read_real_pyramid(
    const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.contains("levels") || !doc["levels"].is_array())
        throw FormatError(path.string() + ": missing 'levels' array");
    std::vector<std::vector<std::vector<double>>> out;
    for (const auto& lvl : doc["levels"]) {
        std::vector<std::vector<double>> rows;
        for (const auto& row : lvl.at("rows")) rows.push_back(row.get<std::vector<double>>());
        out.push_back(std::move(rows));
    }
    return out;
}

std::string report_to_string(const Report& r) {
    nlohmann::json doc;
    doc["metrics"] = r.metrics;
    doc["params"] = r.params;
    doc["provenance"] = r.provenance;
    return doc.dump(2) + "\n";
}

void write_report(const Report& r, const std::filesystem::path& path) {
    write_file(path, report_to_string(r));
}

Report parse_report(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("report: invalid JSON: ") + e.what());
    }
    Report r;
    for (const auto& [k, v] : doc.at("metrics").items()) r.metrics[k] = v.get<double>();
    r.params = doc.value("params", nlohmann::json::object());
    r.provenance = doc.value("provenance", nlohmann::json::object());
    return r;
}

Report read_report(const std::filesystem::path& path) { return parse_report(read_file(path)); }

}  // namespace topoeval
