#ifndef MTMATCH_IO_HPP
#define MTMATCH_IO_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mtmatch/core.hpp"
#include "mtmatch/evaluation.hpp"

namespace mtmatch {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::io, "cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
    }
}

/// RFC 4180 records: comma separated, double-quote quoting with "" escapes,
/// LF or CRLF line ends. A leading UTF-8 BOM is skipped; blank lines are ignored.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    if (text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;

    auto end_record = [&] {
        if (field_started || !record.empty()) {
            record.push_back(std::move(field));
            records.push_back(std::move(record));
        }
        record.clear();
        field.clear();
        field_started = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            quoted = true;
            field_started = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            field_started = true;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            end_record();
            break;
        case '\n':
            end_record();
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) {
        throw Error(ErrorCode::parse, "unterminated quoted CSV field");
    }
    end_record();
    return records;
}

inline std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos && !field.empty()) {
        return std::string(field);
    }
    if (field.empty()) {
        return "\"\"";
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string format_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out.push_back(',');
            out += csv_escape(fields[i]);
        }
        out.push_back('\n');
    };
    line(header);
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

inline RawTable read_csv_table(const fs::path& path) {
    auto records = parse_csv(read_file(path));
    RawTable table;
    table.name = path.string();
    if (records.empty()) {
        throw Error(ErrorCode::schema_mismatch, "'" + path.string() + "' has no header row");
    }
    table.header = std::move(records.front());
    table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
    return table;
}

inline Dataset load_dataset(const std::vector<fs::path>& paths) {
    std::vector<RawTable> raw;
    raw.reserve(paths.size());
    for (const auto& p : paths) {
        raw.push_back(read_csv_table(p));
    }
    return validate_dataset(raw);
}

inline RawTable to_raw_table(const Dataset& dataset, std::size_t source) {
    RawTable raw;
    raw.name = "table_" + std::to_string(source);
    raw.header = dataset.schema();
    for (const auto& e : dataset.table(source)) {
        std::vector<std::string> row;
        row.reserve(e.values.size());
        for (const auto& a : e.values) {
            row.push_back(a.value);
        }
        raw.rows.push_back(std::move(row));
    }
    return raw;
}

/// Writes table_<i>.csv per source and returns the paths in source order.
inline std::vector<fs::path> save_dataset(const Dataset& dataset, const fs::path& dir) {
    std::vector<fs::path> paths;
    for (std::size_t s = 0; s < dataset.table_count(); ++s) {
        const auto raw = to_raw_table(dataset, s);
        auto path = dir / ("table_" + std::to_string(s) + ".csv");
        write_file(path, format_csv(raw.header, raw.rows));
        paths.push_back(std::move(path));
    }
    return paths;
}

inline std::vector<EntityRef> parse_ref_list(const nlohmann::json& value) {
    const nlohmann::json* list = &value;
    if (value.is_object()) {
        auto it = value.find("members");
        if (it == value.end()) {
            throw Error(ErrorCode::parse, "tuple object without \"members\"");
        }
        list = &*it;
    }
    if (!list->is_array()) {
        throw Error(ErrorCode::parse, "tuple must be a JSON list of \"source:row\" strings");
    }
    std::vector<EntityRef> refs;
    for (const auto& item : *list) {
        if (!item.is_string()) {
            throw Error(ErrorCode::parse, "tuple member must be a \"source:row\" string");
        }
        refs.push_back(EntityRef::parse(item.get<std::string>()));
    }
    return refs;
}

/// One tuple per non-blank line, either ["0:1", ...] or {"members": [...]}.
inline TupleList<EntityRef> parse_tuples_jsonl(std::string_view text) {
    TupleList<EntityRef> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        try {
            out.push_back(parse_ref_list(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::parse, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (end == text.size()) break;
    }
    return out;
}

inline TruthSet<EntityRef> load_truth(const fs::path& path) {
    return TruthSet<EntityRef>(parse_tuples_jsonl(read_file(path)));
}

inline std::string ref_list_json(const std::vector<EntityRef>& tuple) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : tuple) {
        list.push_back(r.to_string());
    }
    return list.dump();
}

/// Truth format: a bare JSON list per line.
inline std::string format_truth_jsonl(const TupleList<EntityRef>& tuples) {
    std::string out;
    for (const auto& t : canonical_tuples(tuples)) {
        out += ref_list_json(t);
        out.push_back('\n');
    }
    return out;
}

/// Prediction format: {"members": [...]} per line, members sorted within a
/// line and lines sorted, so equal results give identical bytes.
inline std::string format_tuples_jsonl(const TupleList<EntityRef>& tuples) {
    std::string out;
    for (const auto& t : canonical_tuples(tuples)) {
        out += "{\"members\":" + ref_list_json(t) + "}\n";
    }
    return out;
}

} // namespace mtmatch

#endif
