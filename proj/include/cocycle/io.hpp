#pragma once

// Cocycle files: {"d": int, "k": int, "matrices": [[[row], ...], ...]}.

#include <cocycle/errors.hpp>
#include <cocycle/matrix_core.hpp>
#include <cocycle/shift_space.hpp>

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cocycle {

namespace detail {

inline std::string line_context(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t line_start = 0;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
            line_start = i + 1;
        } else {
            ++column;
        }
    }
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) {
        line_end = text.size();
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
           std::string(text.substr(line_start, line_end - line_start));
}

inline int read_positive(const nlohmann::json& doc, const char* key, const std::string& source) {
    if (!doc.contains(key)) {
        throw parse_error(source + ": missing field \"" + key + "\"");
    }
    const auto& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1) {
        throw parse_error(source + ": field \"" + key + "\" must be a positive integer");
    }
    return static_cast<int>(v.get<long long>());
}

} // namespace detail

inline OneStepCocycle parse_cocycle(std::string_view text, const std::string& source = "<input>") {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(source + ": malformed JSON at " + detail::line_context(text, e.byte));
    }
    if (!doc.is_object()) {
        throw parse_error(source + ": top level must be an object");
    }
    const int d = detail::read_positive(doc, "d", source);
    const int k = detail::read_positive(doc, "k", source);
    if (!doc.contains("matrices") || !doc.at("matrices").is_array()) {
        throw parse_error(source + ": missing array \"matrices\"");
    }
    const auto& list = doc.at("matrices");
    if (list.size() != static_cast<std::size_t>(k)) {
        throw parse_error(source + ": k = " + std::to_string(k) + " but " + std::to_string(list.size()) +
                          " matrices given");
    }
    std::vector<Matrix> generators;
    for (std::size_t s = 0; s < list.size(); ++s) {
        const std::string where = source + ": matrices[" + std::to_string(s) + "]";
        const auto& rows = list[s];
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(d)) {
            throw parse_error(where + " must have " + std::to_string(d) + " rows");
        }
        Matrix m(d, d);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) {
                throw parse_error(where + "[" + std::to_string(r) + "] must have " + std::to_string(d) + " entries");
            }
            for (std::size_t col = 0; col < row.size(); ++col) {
                if (!row[col].is_number()) {
                    throw parse_error(where + "[" + std::to_string(r) + "][" + std::to_string(col) +
                                      "] is not a number");
                }
                m(static_cast<Index>(r), static_cast<Index>(col)) = row[col].get<double>();
            }
        }
        generators.push_back(std::move(m));
    }
    return OneStepCocycle(std::move(generators));
}

inline OneStepCocycle load_cocycle(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw input_error("cannot open cocycle file " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_cocycle(buffer.str(), path);
}

inline nlohmann::json to_json(const OneStepCocycle& c) {
    nlohmann::json matrices = nlohmann::json::array();
    for (const Matrix& m : c.generators()) {
        nlohmann::json rows = nlohmann::json::array();
        for (Index r = 0; r < m.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Index col = 0; col < m.cols(); ++col) {
                row.push_back(m(r, col));
            }
            rows.push_back(std::move(row));
        }
        matrices.push_back(std::move(rows));
    }
    return {{"d", c.dim()}, {"k", c.alphabet_size()}, {"matrices", std::move(matrices)}};
}

} // namespace cocycle
