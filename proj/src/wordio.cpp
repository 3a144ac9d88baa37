#include "escape/wordio.hpp"

#include "escape/errors.hpp"

#include <fstream>
#include <limits>
#include <sstream>

namespace escape::wordio {

namespace {

// Strips a '#' comment and surrounding whitespace; empty result means the
// line carries no data.
std::string strip_line(const std::string& line) {
    std::string s = line.substr(0, line.find('#'));
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return {};
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<long long> parse_int_fields(const std::string& data,
                                        const std::string& context) {
    std::vector<long long> out;
    std::string field;
    std::stringstream ss(data);
    while (std::getline(ss, field, ',')) {
        try {
            size_t used = 0;
            long long v = std::stoll(field, &used);
            while (used < field.size() &&
                   (field[used] == ' ' || field[used] == '\t'))
                ++used;
            if (used != field.size())
                throw std::invalid_argument(field);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ParseError(context + ": bad integer field '" + field + "'");
        }
    }
    if (out.empty())
        throw ParseError(context + ": empty field list");
    return out;
}

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open file: " + path);
    return in;
}

} // namespace

std::vector<std::vector<uint8_t>> read_factor_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<std::vector<uint8_t>> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string data = strip_line(line);
        if (data.empty())
            continue;
        auto fields =
            parse_int_fields(data, path + ":" + std::to_string(lineno));
        std::vector<uint8_t> word;
        for (long long v : fields) {
            if (v < 0 || v > 255)
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": symbol out of range: " + std::to_string(v));
            word.push_back(static_cast<uint8_t>(v));
        }
        out.push_back(std::move(word));
    }
    return out;
}

std::vector<std::vector<uint32_t>> read_list_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<std::vector<uint32_t>> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string data = strip_line(line);
        if (data.empty())
            continue;
        auto fields =
            parse_int_fields(data, path + ":" + std::to_string(lineno));
        std::vector<uint32_t> row;
        for (long long v : fields) {
            if (v < 0 || v > std::numeric_limits<uint32_t>::max())
                throw ParseError(path + ":" + std::to_string(lineno) +
                                 ": symbol out of range: " + std::to_string(v));
            row.push_back(static_cast<uint32_t>(v));
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<uint64_t> read_denominator_file(const std::string& path) {
    auto in = open_or_throw(path);
    std::vector<uint64_t> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string data = strip_line(line);
        if (data.empty())
            continue;
        auto fields =
            parse_int_fields(data, path + ":" + std::to_string(lineno));
        if (fields.size() != 1)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": expected one integer per line");
        long long v = fields[0];
        if (v <= 0)
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": denominators must be positive");
        if (!out.empty() && static_cast<uint64_t>(v) <= out.back())
            throw ParseError(path + ":" + std::to_string(lineno) +
                             ": denominators must be strictly ascending");
        out.push_back(static_cast<uint64_t>(v));
    }
    return out;
}

template <typename T> static std::string render_word_impl(std::span<const T> symbols) {
    std::string out;
    for (size_t i = 0; i < symbols.size(); ++i) {
        if (i)
            out += ' ';
        out += std::to_string(static_cast<unsigned long>(symbols[i]));
    }
    return out;
}

std::string render_word(std::span<const uint32_t> symbols) {
    return render_word_impl(symbols);
}

std::string render_word(std::span<const uint8_t> symbols) {
    return render_word_impl(symbols);
}

std::string render_bits(std::span<const uint8_t> bits) {
    std::string out;
    out.reserve(bits.size());
    for (uint8_t b : bits)
        out += b ? '1' : '0';
    return out;
}

std::vector<uint32_t> parse_word(const std::string& text) {
    std::vector<uint32_t> out;
    std::stringstream ss(text);
    long long v;
    while (ss >> v) {
        if (v < 0 || v > std::numeric_limits<uint32_t>::max())
            throw ParseError("word symbol out of range: " + std::to_string(v));
        out.push_back(static_cast<uint32_t>(v));
    }
    if (!ss.eof()) {
        std::string rest;
        ss.clear();
        ss >> rest;
        throw ParseError("bad word symbol: '" + rest + "'");
    }
    return out;
}

std::vector<uint8_t> parse_bits(const std::string& text) {
    std::vector<uint8_t> out;
    for (char ch : text) {
        if (ch == '0')
            out.push_back(0);
        else if (ch == '1')
            out.push_back(1);
        else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n')
            continue;
        else
            throw ParseError(std::string("bad bit character: '") + ch + "'");
    }
    return out;
}

std::string read_stream(std::istream& in) {
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace escape::wordio
