#include "ratingraph/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include <json.hpp>

namespace ratingraph {

namespace {

// Howard Hinnant's days_from_civil / civil_from_days.
int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t yr = static_cast<int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

int days_in_month(int y, int m) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
    return lengths[m - 1];
}

bool parse_int_field(std::string_view s, int64_t& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

// Accepts integers and integral floats ("5" and "5.0"); anything else fails.
bool parse_stars(const nlohmann::json& v, int64_t& out) {
    if (v.is_number_integer()) {
        out = v.get<int64_t>();
        return true;
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d != static_cast<int64_t>(d)) return false;
        out = static_cast<int64_t>(d);
        return true;
    }
    if (v.is_string()) {
        int64_t n = 0;
        if (parse_int_field(v.get<std::string>(), n)) {
            out = n;
            return true;
        }
    }
    return false;
}

ReviewEdge make_edge(const std::string& user, const std::string& business,
                     int64_t stars, int64_t ts, IdMap& ids, std::size_t line_no,
                     bool lookup_only) {
    if (user.empty()) throw ValidationError("empty user_id at line " + std::to_string(line_no));
    if (business.empty()) throw ValidationError("empty business_id at line " + std::to_string(line_no));
    if (stars < 1 || stars > 5)
        throw ValidationError("stars " + std::to_string(stars) + " outside [1,5] at line " +
                              std::to_string(line_no));
    if (ts < 0) throw ValidationError("negative timestamp at line " + std::to_string(line_no));

    ReviewEdge e;
    if (lookup_only) {
        const auto u = ids.find_user(user);
        const auto b = ids.find_business(business);
        if (!u) throw ValidationError("user id '" + user + "' not in id map (line " +
                                      std::to_string(line_no) + ")");
        if (!b) throw ValidationError("business id '" + business + "' not in id map (line " +
                                      std::to_string(line_no) + ")");
        e.user = *u;
        e.business = *b;
    } else {
        e.user = ids.intern_user(user);
        e.business = ids.intern_business(business);
    }
    e.stars = static_cast<int32_t>(stars);
    e.timestamp = ts;
    return e;
}

}  // namespace

int64_t timestamp_from_civil(const CivilDateTime& c) {
    return days_from_civil(c.year, static_cast<unsigned>(c.month), static_cast<unsigned>(c.day)) * 86400 +
           c.hour * 3600 + c.minute * 60 + c.second;
}

CivilDateTime civil_from_timestamp(int64_t ts) {
    int64_t days = ts / 86400;
    int64_t rem = ts % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    CivilDateTime c;
    unsigned m = 1, d = 1;
    civil_from_days(days, c.year, m, d);
    c.month = static_cast<int>(m);
    c.day = static_cast<int>(d);
    c.hour = static_cast<int>(rem / 3600);
    c.minute = static_cast<int>((rem % 3600) / 60);
    c.second = static_cast<int>(rem % 60);
    return c;
}

int64_t parse_datetime(const std::string& s) {
    const auto fail = [&]() -> int64_t {
        throw ValidationError("bad date '" + s + "' (expected YYYY-MM-DD or YYYY-MM-DD HH:MM:SS)");
    };
    if (s.size() != 10 && s.size() != 19) return fail();

    const auto digits = [&](std::size_t pos, std::size_t len, int64_t& out) {
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        }
        return parse_int_field(std::string_view(s).substr(pos, len), out);
    };

    int64_t y = 0, mo = 0, d = 0, hh = 0, mi = 0, ss = 0;
    if (s[4] != '-' || s[7] != '-') return fail();
    if (!digits(0, 4, y) || !digits(5, 2, mo) || !digits(8, 2, d)) return fail();
    if (s.size() == 19) {
        if (s[10] != ' ' || s[13] != ':' || s[16] != ':') return fail();
        if (!digits(11, 2, hh) || !digits(14, 2, mi) || !digits(17, 2, ss)) return fail();
    }
    if (mo < 1 || mo > 12) return fail();
    if (d < 1 || d > days_in_month(static_cast<int>(y), static_cast<int>(mo))) return fail();
    if (hh > 23 || mi > 59 || ss > 59) return fail();

    CivilDateTime c{static_cast<int>(y), static_cast<int>(mo), static_cast<int>(d),
                    static_cast<int>(hh), static_cast<int>(mi), static_cast<int>(ss)};
    return timestamp_from_civil(c);
}

ReviewEdge parse_review_line(const std::string& line, IdMap& ids, std::size_t line_no,
                             bool lookup_only) {
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) throw ParseError("blank line", line_no);

    if (line[first] == '{') {
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
        }
        for (const char* field : {"user_id", "business_id", "stars", "date"}) {
            if (!obj.contains(field))
                throw SchemaError("missing field '" + std::string(field) + "' at line " +
                                  std::to_string(line_no));
        }
        if (!obj["user_id"].is_string() || !obj["business_id"].is_string())
            throw SchemaError("user_id/business_id must be strings at line " + std::to_string(line_no));
        int64_t stars = 0;
        if (!parse_stars(obj["stars"], stars))
            throw ValidationError("stars is not an integer at line " + std::to_string(line_no));
        if (!obj["date"].is_string())
            throw SchemaError("date must be a string at line " + std::to_string(line_no));
        const int64_t ts = parse_datetime(obj["date"].get<std::string>());
        return make_edge(obj["user_id"].get<std::string>(), obj["business_id"].get<std::string>(),
                         stars, ts, ids, line_no, lookup_only);
    }

    // CSV row: user_id,business_id,stars,unix_ts
    const auto fields = split_csv(line);
    if (fields.size() != 4)
        throw ParseError("expected 4 CSV fields, got " + std::to_string(fields.size()), line_no);
    int64_t stars = 0, ts = 0;
    if (!parse_int_field(fields[2], stars))
        throw ParseError("stars field is not an integer", line_no);
    if (!parse_int_field(fields[3], ts))
        throw ParseError("unix_ts field is not an integer", line_no);
    return make_edge(std::string(fields[0]), std::string(fields[1]), stars, ts, ids,
                     line_no, lookup_only);
}

std::vector<ReviewEdge> filter_by_date(std::span<const ReviewEdge> edges, int64_t cutoff) {
    std::vector<ReviewEdge> out;
    out.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.timestamp >= cutoff) out.push_back(e);
    }
    return out;
}

std::vector<ReviewEdge> dedupe_edges(std::span<const ReviewEdge> edges) {
    std::unordered_map<uint64_t, std::size_t> best;  // pair key -> survivor slot
    best.reserve(edges.size());
    std::vector<ReviewEdge> out;
    out.reserve(edges.size());
    for (const auto& e : edges) {
        const uint64_t key = (static_cast<uint64_t>(e.user) << 32) | e.business;
        auto [it, inserted] = best.emplace(key, out.size());
        if (inserted) {
            out.push_back(e);
        } else if (e.timestamp >= out[it->second].timestamp) {
            out[it->second] = e;
        }
    }
    return out;
}

void sort_edges(std::vector<ReviewEdge>& edges) {
    std::sort(edges.begin(), edges.end(), [](const ReviewEdge& a, const ReviewEdge& b) {
        if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
        if (a.user != b.user) return a.user < b.user;
        return a.business < b.business;
    });
}

std::vector<ReviewEdge> read_edges_csv(const std::string& path, IdMap& ids, bool lookup_only) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "user_id,business_id,stars,unix_ts")
        throw SchemaError(path + ": unexpected header '" + line + "'");

    std::vector<ReviewEdge> edges;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        edges.push_back(parse_review_line(line, ids, line_no, lookup_only));
    }
    return edges;
}

void write_edges_csv(const std::string& path, std::span<const ReviewEdge> edges,
                     const IdMap& ids) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "user_id,business_id,stars,unix_ts\n";
    for (const auto& e : edges) {
        out << ids.user_string(e.user) << ',' << ids.business_string(e.business) << ','
            << e.stars << ',' << e.timestamp << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<ReviewEdge> read_reviews_json(const std::string& path, IdMap& ids) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<ReviewEdge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        edges.push_back(parse_review_line(line, ids, line_no));
    }
    return edges;
}

void save_idmap(const std::string& path, const IdMap& ids) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "kind,string_id,int_id\n";
    for (std::size_t i = 0; i < ids.num_users(); ++i)
        out << "user," << ids.user_string(static_cast<UserId>(i)) << ',' << i << '\n';
    for (std::size_t i = 0; i < ids.num_businesses(); ++i)
        out << "business," << ids.business_string(static_cast<BusinessId>(i)) << ',' << i << '\n';
    if (!out) throw IoError("write failed: " + path);
}

IdMap load_idmap(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path + ": empty file, expected header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "kind,string_id,int_id")
        throw SchemaError(path + ": unexpected header '" + line + "'");

    IdMap ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 3) throw ParseError("expected 3 fields in id map", line_no);
        int64_t expect = 0;
        if (!parse_int_field(fields[2], expect))
            throw ParseError("int_id is not an integer", line_no);
        uint32_t got = 0;
        if (fields[0] == "user") {
            got = ids.intern_user(std::string(fields[1]));
        } else if (fields[0] == "business") {
            got = ids.intern_business(std::string(fields[1]));
        } else {
            throw ParseError("unknown id kind '" + std::string(fields[0]) + "'", line_no);
        }
        // Rows must arrive in handle order for the mapping to reproduce.
        if (static_cast<int64_t>(got) != expect)
            throw SchemaError(path + ": id map out of order at line " + std::to_string(line_no));
    }
    return ids;
}

}  // namespace ratingraph
