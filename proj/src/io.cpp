#include "coveq/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "coveq/errors.hpp"

namespace coveq {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("read failure on " + path);
    }
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            end = text.size();
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
        if (end == text.size()) {
            break;
        }
        start = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

// Tab wins over comma; otherwise any run of spaces separates fields.
char detect_delimiter(const std::string& line) {
    if (line.find('\t') != std::string::npos) {
        return '\t';
    }
    if (line.find(',') != std::string::npos) {
        return ',';
    }
    return ' ';
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> fields;
    if (delim == ' ') {
        std::istringstream in(line);
        std::string tok;
        while (in >> tok) {
            fields.push_back(tok);
        }
        return fields;
    }
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = line.find(delim, start);
        if (end == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    // Trim surrounding spaces so " 1.5,2" parses.
    for (std::string& f : fields) {
        const std::size_t a = f.find_first_not_of(" \t");
        if (a == std::string::npos) {
            f.clear();
            continue;
        }
        const std::size_t b = f.find_last_not_of(" \t");
        f = f.substr(a, b - a + 1);
    }
    return fields;
}

bool parse_double(const std::string& tok, double& out) {
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end && !tok.empty();
}

}  // namespace

SampleMatrix read_sample_matrix(const std::string& path) {
    const std::vector<std::string> lines = split_lines(read_file(path));
    std::vector<std::vector<double>> rows;
    std::vector<std::string> names;
    bool saw_first = false;
    std::size_t width = 0;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) {
            continue;
        }
        const char delim = detect_delimiter(lines[ln]);
        const std::vector<std::string> fields =
            split_fields(lines[ln], delim);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (!parse_double(fields[k], row[k])) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (!saw_first) {
                names = fields;
                saw_first = true;
                width = fields.size();
                continue;
            }
            throw ParseError(path + ": non-numeric value at line " +
                                 std::to_string(ln + 1),
                             static_cast<long>(ln + 1));
        }
        if (!saw_first) {
            saw_first = true;
            width = fields.size();
        } else if (fields.size() != width) {
            throw ParseError(path + ": expected " + std::to_string(width) +
                                 " fields at line " + std::to_string(ln + 1) +
                                 ", got " + std::to_string(fields.size()),
                             static_cast<long>(ln + 1));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError(path + ": no data rows");
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < width; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                rows[i][j];
        }
    }
    return SampleMatrix(std::move(m), std::move(names));
}

ExpressionData read_expression(const std::string& expr_path,
                               const std::string& labels_path,
                               bool log2_scale) {
    const std::vector<std::string> lines = split_lines(read_file(expr_path));
    std::size_t ln = 0;
    while (ln < lines.size() && blank(lines[ln])) {
        ++ln;
    }
    if (ln == lines.size()) {
        throw ParseError(expr_path + ": empty file");
    }
    const char delim = detect_delimiter(lines[ln]);
    const std::vector<std::string> header = split_fields(lines[ln], delim);
    if (header.size() < 2) {
        throw ParseError(expr_path + ": header needs at least one sample id",
                         static_cast<long>(ln + 1));
    }
    ExpressionData data;
    data.log2_scale = log2_scale;
    data.sample_ids.assign(header.begin() + 1, header.end());
    const std::size_t n_samples = data.sample_ids.size();
    {
        std::unordered_set<std::string> seen;
        for (const std::string& id : data.sample_ids) {
            if (!seen.insert(id).second) {
                throw ParseError(expr_path + ": duplicate sample id " + id,
                                 static_cast<long>(ln + 1));
            }
        }
    }

    std::vector<std::vector<double>> rows;
    for (++ln; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) {
            continue;
        }
        const std::vector<std::string> fields =
            split_fields(lines[ln], delim);
        if (fields.size() != n_samples + 1) {
            throw ParseError(expr_path + ": expected " +
                                 std::to_string(n_samples + 1) +
                                 " fields at line " + std::to_string(ln + 1) +
                                 ", got " + std::to_string(fields.size()),
                             static_cast<long>(ln + 1));
        }
        data.probe_ids.push_back(fields[0]);
        std::vector<double> row(n_samples);
        for (std::size_t k = 0; k < n_samples; ++k) {
            if (!parse_double(fields[k + 1], row[k])) {
                throw ParseError(expr_path + ": non-numeric value '" +
                                     fields[k + 1] + "' at line " +
                                     std::to_string(ln + 1),
                                 static_cast<long>(ln + 1));
            }
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw ParseError(expr_path + ": no probe rows");
    }
    data.matrix.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(n_samples));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < n_samples; ++j) {
            data.matrix(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }

    // Labels: sample id, group tag.
    const std::vector<std::string> label_lines =
        split_lines(read_file(labels_path));
    std::unordered_map<std::string, std::string> label_of;
    for (std::size_t k = 0; k < label_lines.size(); ++k) {
        if (blank(label_lines[k])) {
            continue;
        }
        const std::vector<std::string> fields =
            split_fields(label_lines[k], detect_delimiter(label_lines[k]));
        if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
            throw ParseError(labels_path +
                                 ": expected 'sample<TAB>group' at line " +
                                 std::to_string(k + 1),
                             static_cast<long>(k + 1));
        }
        if (!label_of.emplace(fields[0], fields[1]).second) {
            throw ParseError(labels_path + ": duplicate label for sample " +
                                 fields[0] + " at line " +
                                 std::to_string(k + 1),
                             static_cast<long>(k + 1));
        }
    }
    data.group_labels.reserve(n_samples);
    for (const std::string& id : data.sample_ids) {
        const auto it = label_of.find(id);
        if (it == label_of.end()) {
            throw ParseError(labels_path + ": no group label for sample " +
                             id);
        }
        data.group_labels.push_back(it->second);
    }
    return data;
}

GeneSetCollection read_gmt(const std::string& path) {
    const std::vector<std::string> lines = split_lines(read_file(path));
    GeneSetCollection out;
    std::unordered_set<std::string> names;
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        if (blank(lines[ln])) {
            continue;
        }
        const std::vector<std::string> fields =
            split_fields(lines[ln], '\t');
        if (fields.size() < 2 || fields[0].empty()) {
            throw ParseError(path +
                                 ": GMT line needs name<TAB>description at "
                                 "line " +
                                 std::to_string(ln + 1),
                             static_cast<long>(ln + 1));
        }
        if (!names.insert(fields[0]).second) {
            throw ParseError(path + ": duplicate set name " + fields[0] +
                                 " at line " + std::to_string(ln + 1),
                             static_cast<long>(ln + 1));
        }
        GeneSet set;
        set.name = fields[0];
        set.description = fields[1];
        for (std::size_t k = 2; k < fields.size(); ++k) {
            if (!fields[k].empty()) {
                set.members.push_back(fields[k]);
            }
        }
        out.sets.push_back(std::move(set));
    }
    if (out.sets.empty()) {
        throw ParseError(path + ": no gene sets");
    }
    return out;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp + " for writing");
        }
        out << content;
        out.flush();
        if (!out.good()) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failure on " + tmp);
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ec2;
        std::filesystem::remove(tmp, ec2);
        throw IoError("cannot rename " + tmp + " to " + path + ": " +
                      ec.message());
    }
}

}  // namespace coveq
