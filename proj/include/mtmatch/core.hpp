#ifndef MTMATCH_CORE_HPP
#define MTMATCH_CORE_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mtmatch {

enum class ErrorCode {
    schema_mismatch,
    empty_table,
    too_few_tables,
    remote_unavailable,
    dimension_mismatch,
    tuple_too_small,
    invalid_params,
    precondition,
    io,
    parse,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::schema_mismatch: return "SchemaMismatch";
    case ErrorCode::empty_table: return "EmptyTable";
    case ErrorCode::too_few_tables: return "TooFewTables";
    case ErrorCode::remote_unavailable: return "RemoteUnavailable";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::tuple_too_small: return "TupleTooSmall";
    case ErrorCode::invalid_params: return "InvalidParams";
    case ErrorCode::precondition: return "PreconditionViolation";
    case ErrorCode::io: return "IoError";
    case ErrorCode::parse: return "ParseError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Identifies one record: the table it came from and its row within that table.
struct EntityRef {
    std::uint32_t source = 0;
    std::uint32_t row = 0;

    auto operator<=>(const EntityRef&) const = default;

    std::string to_string() const {
        return std::to_string(source) + ":" + std::to_string(row);
    }

    /// Parses the "source:row" form used by the JSONL files.
    static EntityRef parse(std::string_view text) {
        auto colon = text.find(':');
        if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
            throw Error(ErrorCode::parse, "bad entity reference '" + std::string(text) + "'");
        }
        auto number = [&](std::string_view part) {
            std::uint64_t value = 0;
            for (char c : part) {
                if (c < '0' || c > '9') {
                    throw Error(ErrorCode::parse, "bad entity reference '" + std::string(text) + "'");
                }
                value = value * 10 + static_cast<std::uint64_t>(c - '0');
                if (value > UINT32_MAX) {
                    throw Error(ErrorCode::parse, "entity reference out of range '" + std::string(text) + "'");
                }
            }
            return static_cast<std::uint32_t>(value);
        };
        return EntityRef{number(text.substr(0, colon)), number(text.substr(colon + 1))};
    }
};

struct EntityRefHash {
    std::size_t operator()(const EntityRef& ref) const noexcept {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(ref.source) << 32) | ref.row);
    }
};

struct Attribute {
    std::string name;
    std::string value;

    bool operator==(const Attribute&) const = default;
};

struct Entity {
    EntityRef ref;
    std::vector<Attribute> values;

    bool operator==(const Entity&) const = default;

    const std::string& value(std::string_view name) const {
        for (const auto& attr : values) {
            if (attr.name == name) {
                return attr.value;
            }
        }
        throw Error(ErrorCode::precondition, "unknown attribute '" + std::string(name) + "'");
    }
};

/// A parsed but unvalidated table: header plus string rows.
struct RawTable {
    std::string name;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

using Table = std::vector<Entity>;

/// S >= 2 non-empty tables over one shared schema. Immutable once built.
class Dataset {
public:
    const std::vector<std::string>& schema() const noexcept { return schema_; }
    const std::vector<Table>& tables() const noexcept { return tables_; }
    const Table& table(std::size_t source) const { return tables_.at(source); }
    std::size_t table_count() const noexcept { return tables_.size(); }

    std::size_t entity_count() const noexcept {
        return std::accumulate(tables_.begin(), tables_.end(), std::size_t{0},
                               [](std::size_t acc, const Table& t) { return acc + t.size(); });
    }

    double mean_table_size() const noexcept {
        return tables_.empty() ? 0.0
                               : static_cast<double>(entity_count()) / static_cast<double>(tables_.size());
    }

    const Entity& entity(EntityRef ref) const { return tables_.at(ref.source).at(ref.row); }

    bool operator==(const Dataset&) const = default;

private:
    friend Dataset validate_dataset(const std::vector<RawTable>& raw_tables);

    std::vector<std::string> schema_;
    std::vector<Table> tables_;
};

/// Checks the multi-table invariants and assigns EntityRefs in row order.
///
/// The first table's header fixes the attribute order. Later tables may list the
/// same attributes in another order; their columns are permuted to match.
inline Dataset validate_dataset(const std::vector<RawTable>& raw_tables) {
    if (raw_tables.size() < 2) {
        throw Error(ErrorCode::too_few_tables,
                    "need at least 2 tables, got " + std::to_string(raw_tables.size()));
    }

    const auto& schema = raw_tables.front().header;
    if (schema.empty()) {
        throw Error(ErrorCode::schema_mismatch, "table '" + raw_tables.front().name + "' has no columns");
    }
    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (!position.emplace(schema[i], i).second) {
            throw Error(ErrorCode::schema_mismatch, "duplicate attribute '" + schema[i] + "'");
        }
    }

    Dataset out;
    out.schema_ = schema;
    out.tables_.reserve(raw_tables.size());

    for (std::size_t source = 0; source < raw_tables.size(); ++source) {
        const auto& raw = raw_tables[source];
        if (raw.header.size() != schema.size()) {
            throw Error(ErrorCode::schema_mismatch,
                        "table '" + raw.name + "' has " + std::to_string(raw.header.size()) +
                            " attributes, expected " + std::to_string(schema.size()));
        }
        // column_of[j] = column in raw holding schema attribute j
        std::vector<std::size_t> column_of(schema.size(), schema.size());
        for (std::size_t c = 0; c < raw.header.size(); ++c) {
            auto it = position.find(raw.header[c]);
            if (it == position.end() || column_of[it->second] != schema.size()) {
                throw Error(ErrorCode::schema_mismatch,
                            "table '" + raw.name + "' attribute '" + raw.header[c] + "' does not match the schema");
            }
            column_of[it->second] = c;
        }
        if (raw.rows.empty()) {
            throw Error(ErrorCode::empty_table, "table '" + raw.name + "' has no rows");
        }

        Table table;
        table.reserve(raw.rows.size());
        for (std::size_t row = 0; row < raw.rows.size(); ++row) {
            const auto& fields = raw.rows[row];
            if (fields.size() != schema.size()) {
                throw Error(ErrorCode::schema_mismatch,
                            "table '" + raw.name + "' row " + std::to_string(row) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(schema.size()));
            }
            Entity entity;
            entity.ref = EntityRef{static_cast<std::uint32_t>(source), static_cast<std::uint32_t>(row)};
            entity.values.reserve(schema.size());
            for (std::size_t j = 0; j < schema.size(); ++j) {
                entity.values.push_back(Attribute{schema[j], fields[column_of[j]]});
            }
            table.push_back(std::move(entity));
        }
        out.tables_.push_back(std::move(table));
    }
    return out;
}

} // namespace mtmatch

#endif
