#include "hps/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hps/error.hpp"

namespace hps {

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!ok) throw DataError("unknown key '" + it.key() + "' in " + where);
    }
}

std::optional<double> parse_number(std::string_view s) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
    return v;
}

std::optional<EntityId> parse_id(std::string_view s) {
    EntityId v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string quote_if_needed(const std::string& s, char delimiter) {
    const bool needs = s.find(delimiter) != std::string::npos || s.find('"') != std::string::npos ||
                       s.find('\n') != std::string::npos || (!s.empty() && (s.front() == ' ' || s.back() == ' '));
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

std::vector<std::string> split_delimited(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && trim(cur).empty()) {
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (c == delimiter) {
            out.push_back(was_quoted ? cur : trim(cur));
            cur.clear();
            was_quoted = false;
        } else if (!(was_quoted && (c == ' ' || c == '\r'))) {
            cur += c;
        }
    }
    if (quoted) throw DataError("unterminated quote");
    out.push_back(was_quoted ? cur : trim(cur));
    return out;
}

DatasetDeclaration DatasetDeclaration::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw DataError("dataset declaration must be a JSON object");
    reject_unknown_keys(j, {"delimiter", "id_column", "queryable", "hidden", "target", "rank", "missing", "meta"},
                        "dataset declaration");
    DatasetDeclaration d;
    try {
        if (j.contains("delimiter")) {
            const auto s = j.at("delimiter").get<std::string>();
            if (s.size() != 1) throw DataError("delimiter must be a single character");
            d.delimiter = s[0];
        }
        if (j.contains("id_column")) d.id_column = j.at("id_column").get<std::string>();
        for (const auto& q : j.at("queryable")) {
            reject_unknown_keys(q, {"column", "name", "domain", "bins"}, "queryable column");
            QueryableColumnDecl c;
            c.column = q.at("column").get<std::string>();
            c.name = q.value("name", c.column);
            if (q.contains("bins")) {
                c.bins = q.at("bins").get<std::vector<double>>();
                if (c.bins.size() < 2 || !std::is_sorted(c.bins.begin(), c.bins.end()) ||
                    std::adjacent_find(c.bins.begin(), c.bins.end()) != c.bins.end()) {
                    throw DataError("bins for '" + c.column + "' must be at least two strictly increasing edges");
                }
                c.infer_domain = false;
            } else {
                const auto& dom = q.value("domain", nlohmann::json("infer"));
                if (dom.is_string()) {
                    if (dom.get<std::string>() != "infer") {
                        throw DataError("domain must be \"infer\" or a list of values");
                    }
                    c.infer_domain = true;
                } else {
                    c.domain = dom.get<std::vector<std::string>>();
                    c.infer_domain = false;
                    if (c.domain.empty()) throw DataError("empty domain for '" + c.column + "'");
                }
            }
            d.queryable.push_back(std::move(c));
        }
        if (j.contains("hidden")) {
            for (const auto& h : j.at("hidden")) {
                reject_unknown_keys(h, {"column", "type"}, "hidden column");
                HiddenColumnDecl c;
                c.column = h.at("column").get<std::string>();
                const auto t = h.value("type", std::string("string"));
                if (t == "number") {
                    c.type = FieldType::Number;
                } else if (t == "string") {
                    c.type = FieldType::String;
                } else {
                    throw DataError("hidden column type must be number or string");
                }
                d.hidden.push_back(std::move(c));
            }
        }
        if (j.contains("target")) d.target = HiddenPropertySpec::from_json(j.at("target"));
        if (j.contains("rank")) {
            const auto& r = j.at("rank");
            reject_unknown_keys(r, {"column", "order"}, "rank");
            d.rank_column = r.at("column").get<std::string>();
            const auto order = r.value("order", std::string("asc"));
            if (order != "asc" && order != "desc") throw DataError("rank order must be asc or desc");
            d.rank_descending = order == "desc";
        }
        if (j.contains("missing")) d.missing_tokens = j.at("missing").get<std::vector<std::string>>();
        if (j.contains("meta")) d.meta = j.at("meta");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed dataset declaration: ") + e.what());
    }
    if (d.queryable.empty()) throw DataError("dataset declaration lists no queryable columns");
    return d;
}

DatasetDeclaration DatasetDeclaration::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open declaration file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("declaration " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

nlohmann::json DatasetDeclaration::to_json() const {
    nlohmann::json j;
    j["delimiter"] = std::string(1, delimiter);
    if (id_column) j["id_column"] = *id_column;
    j["queryable"] = nlohmann::json::array();
    for (const auto& q : queryable) {
        nlohmann::json c = {{"column", q.column}};
        if (q.name != q.column) c["name"] = q.name;
        if (!q.bins.empty()) {
            c["bins"] = q.bins;
        } else if (q.infer_domain) {
            c["domain"] = "infer";
        } else {
            c["domain"] = q.domain;
        }
        j["queryable"].push_back(c);
    }
    j["hidden"] = nlohmann::json::array();
    for (const auto& h : hidden) {
        j["hidden"].push_back({{"column", h.column}, {"type", std::string(field_type_name(h.type))}});
    }
    if (target) j["target"] = target->to_json();
    if (rank_column) j["rank"] = {{"column", *rank_column}, {"order", rank_descending ? "desc" : "asc"}};
    j["missing"] = missing_tokens;
    if (!meta.empty()) j["meta"] = meta;
    return j;
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetDeclaration& decl,
                     LoadReport* report) {
    return load_dataset(path, decl, decl.target.value_or(HiddenPropertySpec::always_true()), report);
}

Dataset load_dataset(const std::filesystem::path& path, const DatasetDeclaration& decl,
                     const HiddenPropertySpec& target, LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset file has no header: " + path.string());
    const auto header = split_delimited(line, decl.delimiter);
    std::map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index.emplace(header[i], i);
    auto require_col = [&](const std::string& c) {
        auto it = col_index.find(c);
        if (it == col_index.end()) throw DataError("missing column '" + c + "' in " + path.string());
        return it->second;
    };

    std::optional<std::size_t> id_col;
    if (decl.id_column) id_col = require_col(*decl.id_column);
    std::vector<std::size_t> q_cols;
    for (const auto& q : decl.queryable) q_cols.push_back(require_col(q.column));
    std::vector<std::size_t> h_cols;
    for (const auto& h : decl.hidden) h_cols.push_back(require_col(h.column));
    std::optional<std::size_t> rank_col;
    if (decl.rank_column) rank_col = require_col(*decl.rank_column);

    std::vector<std::size_t> used = q_cols;
    used.insert(used.end(), h_cols.begin(), h_cols.end());
    if (id_col) used.push_back(*id_col);
    if (rank_col) used.push_back(*rank_col);

    struct RawRow {
        EntityId id;
        std::vector<std::string> queryable;
        std::vector<HiddenValue> hidden;
        double rank_key = 0.0;
    };
    std::vector<RawRow> rows;
    LoadReport rep;
    std::size_t line_no = 1;
    std::size_t data_row = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++data_row;
        ++rep.rows_read;
        std::vector<std::string> fields;
        try {
            fields = split_delimited(line, decl.delimiter);
        } catch (const DataError& e) {
            throw DataError("row " + std::to_string(line_no) + ": " + e.what());
        }
        if (fields.size() != header.size()) {
            throw DataError("row " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                            " fields, found " + std::to_string(fields.size()));
        }
        const bool missing = std::any_of(used.begin(), used.end(), [&](std::size_t c) {
            return std::find(decl.missing_tokens.begin(), decl.missing_tokens.end(), fields[c]) !=
                   decl.missing_tokens.end();
        });
        if (missing) {
            ++rep.rows_skipped_missing;
            continue;
        }
        RawRow r;
        if (id_col) {
            auto id = parse_id(fields[*id_col]);
            if (!id) throw DataError("row " + std::to_string(line_no) + ": unparsable id '" + fields[*id_col] + "'");
            r.id = *id;
        } else {
            r.id = static_cast<EntityId>(data_row);
        }
        for (std::size_t c : q_cols) r.queryable.push_back(fields[c]);
        for (std::size_t k = 0; k < h_cols.size(); ++k) {
            const auto& f = fields[h_cols[k]];
            if (decl.hidden[k].type == FieldType::Number) {
                auto v = parse_number(f);
                if (!v) {
                    throw DataError("row " + std::to_string(line_no) + ": unparsable number '" + f + "' in column '" +
                                    decl.hidden[k].column + "'");
                }
                r.hidden.emplace_back(*v);
            } else {
                r.hidden.emplace_back(f);
            }
        }
        if (rank_col) {
            auto v = parse_number(fields[*rank_col]);
            if (!v) throw DataError("row " + std::to_string(line_no) + ": unparsable rank value");
            r.rank_key = *v;
        }
        rows.push_back(std::move(r));
    }

    // Resolve domains.
    std::vector<Attribute> attrs;
    for (std::size_t a = 0; a < decl.queryable.size(); ++a) {
        const auto& q = decl.queryable[a];
        Attribute attr;
        attr.name = q.name.empty() ? q.column : q.name;
        attr.source_column = q.column;
        if (!q.bins.empty()) {
            attr.bin_edges = q.bins;
            for (std::size_t b = 0; b + 1 < q.bins.size(); ++b) attr.domain.push_back(bin_label(q.bins, b));
        } else if (q.infer_domain) {
            std::set<std::string> seen;
            for (const auto& r : rows) seen.insert(r.queryable[a]);
            attr.domain.assign(seen.begin(), seen.end());
            if (attr.domain.empty()) throw DataError("no values to infer a domain for '" + q.column + "'");
        } else {
            attr.domain = q.domain;
        }
        attrs.push_back(std::move(attr));
    }
    AttributeSchema schema(attrs);

    std::vector<HiddenField> hidden;
    for (const auto& h : decl.hidden) hidden.push_back({h.column, h.type});

    std::vector<EntityRecord> records;
    records.reserve(rows.size());
    for (auto& r : rows) {
        EntityRecord rec;
        rec.id = r.id;
        rec.values.resize(schema.size());
        for (std::size_t a = 0; a < schema.size(); ++a) {
            const auto& raw = r.queryable[a];
            if (!schema[a].bin_edges.empty()) {
                auto x = parse_number(raw);
                if (!x) throw DataError("unparsable number '" + raw + "' in column '" + schema[a].source_column + "'");
                auto bin = find_bin(schema[a].bin_edges, *x);
                if (!bin) {
                    throw DataError("value " + raw + " outside the bins of '" + schema[a].source_column + "'");
                }
                rec.values[a] = static_cast<ValueCode>(*bin);
            } else {
                auto code = schema[a].code_of(raw);
                if (!code) {
                    throw DataError("value '" + raw + "' outside the declared domain of '" +
                                    schema[a].source_column + "' (entity " + std::to_string(r.id) + ")");
                }
                rec.values[a] = *code;
            }
        }
        rec.hidden = std::move(r.hidden);
        records.push_back(std::move(rec));
    }

    std::optional<std::vector<EntityId>> rank;
    if (rank_col) {
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
            if (rows[x].rank_key != rows[y].rank_key) {
                return decl.rank_descending ? rows[x].rank_key > rows[y].rank_key
                                            : rows[x].rank_key < rows[y].rank_key;
            }
            return records[x].id < records[y].id;
        });
        rank.emplace();
        for (std::size_t i : order) rank->push_back(records[i].id);
    }

    if (report) *report = rep;
    return Dataset(std::move(schema), std::move(hidden), std::move(records), target, std::move(rank));
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& csv_path,
                   const std::filesystem::path& decl_path, const nlohmann::json& meta) {
    const char delim = ',';
    const auto& schema = dataset.schema();
    std::ostringstream out;
    out << "id";
    for (const auto& a : schema.attributes()) out << delim << quote_if_needed(a.name, delim);
    for (const auto& h : dataset.hidden_fields()) out << delim << quote_if_needed(h.name, delim);
    if (dataset.has_rank()) out << delim << "rank";
    out << '\n';

    std::vector<std::size_t> rank_pos(dataset.size(), 0);
    if (dataset.has_rank()) {
        const auto& rr = dataset.rank_rows();
        for (std::size_t i = 0; i < rr.size(); ++i) rank_pos[rr[i]] = i;
    }
    for (std::size_t row = 0; row < dataset.size(); ++row) {
        const auto& rec = dataset.record(static_cast<RowIndex>(row));
        out << rec.id;
        for (std::size_t a = 0; a < schema.size(); ++a) {
            out << delim << quote_if_needed(schema[a].domain[rec.values[a]], delim);
        }
        for (const auto& v : rec.hidden) {
            if (const double* d = std::get_if<double>(&v)) {
                out << delim << format_number(*d);
            } else {
                out << delim << quote_if_needed(std::get<std::string>(v), delim);
            }
        }
        if (dataset.has_rank()) out << delim << rank_pos[row];
        out << '\n';
    }

    DatasetDeclaration decl;
    decl.delimiter = delim;
    decl.id_column = "id";
    for (const auto& a : schema.attributes()) {
        QueryableColumnDecl q;
        q.column = a.name;
        q.name = a.name;
        q.domain = a.domain;
        q.infer_domain = false;
        decl.queryable.push_back(std::move(q));
    }
    for (const auto& h : dataset.hidden_fields()) decl.hidden.push_back({h.name, h.type});
    decl.target = dataset.target_spec();
    if (dataset.has_rank()) decl.rank_column = "rank";
    decl.missing_tokens.clear();
    decl.meta = meta;

    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv) throw DataError("cannot write " + csv_path.string());
    csv << out.str();
    std::ofstream dj(decl_path, std::ios::binary);
    if (!dj) throw DataError("cannot write " + decl_path.string());
    dj << decl.to_json().dump(2) << '\n';
}

}  // namespace hps
